#include "exlab/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>

#include "exlab/parallel.hpp"

namespace exlab {

namespace {

constexpr double kBoundaryTol = 1e-9;
constexpr double kEnumBudget = 3.2e7;
constexpr std::uint64_t kEventBudget = 4'000'000;

// Non-strict acceptance with the -inf score conventions: an infinite
// threshold blocks, a -inf threshold admits everything (including a -inf
// score: a zero-likelihood word still beats zero competition).
bool accept_ge(double lhs, double rhs) {
  if (rhs == -kInf) return true;
  if (rhs == kInf) return false;
  if (lhs == -kInf) return false;
  return lhs >= rhs;
}

bool near_margin(double lhs, double rhs) {
  return std::isfinite(lhs) && std::isfinite(rhs) && std::abs(lhs - rhs) <= kBoundaryTol;
}

double lse2(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  double hi = a > b ? a : b;
  double lo = a > b ? b : a;
  return hi + std::log1p(std::exp(lo - hi));
}

// out[m] = logsumexp over all entries except m, via prefix/suffix combines.
void lse_excluding(std::span<const double> v, std::vector<double>& pre, std::vector<double>& suf,
                   std::vector<double>& out) {
  size_t m = v.size();
  pre.assign(m + 1, -kInf);
  suf.assign(m + 1, -kInf);
  out.resize(m);
  for (size_t i = 0; i < m; ++i) pre[i + 1] = lse2(pre[i], v[i]);
  for (size_t i = m; i-- > 0;) suf[i] = lse2(suf[i + 1], v[i]);
  for (size_t i = 0; i < m; ++i) out[i] = lse2(pre[i], suf[i + 1]);
}

// Largest and second largest with the index of the largest, so a max over
// "everyone but me" costs O(1) per query.
struct Top2 {
  double first = -kInf;
  double second = -kInf;
  int arg = -1;

  void add(int i, double v) {
    if (v > first) {
      second = first;
      first = v;
      arg = i;
    } else if (v > second) {
      second = v;
    }
  }
  double excluding(int i) const { return i == arg ? second : first; }
};

// Inputs for one (codebook, output) acceptance evaluation. nf holds the
// n-scaled log metric score of every message; the other fields are only read
// for the rule kind that needs them.
struct MsgView {
  int n = 0;
  std::span<const double> nf;
  std::span<const double> h;      // GeneralH: per-message threshold values
  std::span<const int> gid;       // TypeBased: group id per message
  std::span<const int> gcount;    // TypeBased: group sizes
  std::span<const double> gnf;    // TypeBased: representative score per group
  double g = 0.0;                 // OutputOnlyG threshold
};

struct RuleScratch {
  std::vector<double> pre, suf, ex;
};

// Fills accept (1 = message on the list) and reports whether any margin sat
// within kBoundaryTol of zero.
bool evaluate_rule(const DecoderRule& rule, const MsgView& v, RuleScratch& rs,
                   std::vector<char>& accept) {
  const int m = static_cast<int>(v.nf.size());
  const double n = v.n;
  accept.assign(static_cast<size_t>(m), 0);
  bool boundary = false;
  auto judge = [&](int i, double lhs, double rhs) {
    accept[static_cast<size_t>(i)] = accept_ge(lhs, rhs) ? 1 : 0;
    boundary = boundary || near_margin(lhs, rhs);
  };
  switch (rule.kind) {
    case DecoderRule::Kind::Forney: {
      lse_excluding(v.nf, rs.pre, rs.suf, rs.ex);
      for (int i = 0; i < m; ++i) {
        double base = rs.ex[static_cast<size_t>(i)];
        judge(i, v.nf[static_cast<size_t>(i)], base == -kInf ? -kInf : n * rule.t + base);
      }
      break;
    }
    case DecoderRule::Kind::TypeBased: {
      Top2 top;
      for (int g = 0; g < static_cast<int>(v.gcount.size()); ++g)
        top.add(g, std::log(static_cast<double>(v.gcount[static_cast<size_t>(g)])) +
                       v.gnf[static_cast<size_t>(g)]);
      for (int i = 0; i < m; ++i) {
        int g = v.gid[static_cast<size_t>(i)];
        int rest = v.gcount[static_cast<size_t>(g)] - 1;
        double own = rest > 0 ? std::log(static_cast<double>(rest)) + v.gnf[static_cast<size_t>(g)]
                              : -kInf;
        double best = std::max(top.excluding(g), own);
        judge(i, v.nf[static_cast<size_t>(i)], best == -kInf ? -kInf : n * rule.t + best);
      }
      break;
    }
    case DecoderRule::Kind::GeneralH: {
      Top2 top;
      for (int i = 0; i < m; ++i) top.add(i, v.h[static_cast<size_t>(i)]);
      for (int i = 0; i < m; ++i) {
        double hm = top.excluding(i);
        double rhs = hm == -kInf ? -kInf : (hm == kInf ? kInf : n * hm);
        judge(i, v.nf[static_cast<size_t>(i)], rhs);
      }
      break;
    }
    case DecoderRule::Kind::OutputOnlyG: {
      double rhs = v.g == -kInf ? -kInf : (v.g == kInf ? kInf : n * v.g);
      for (int i = 0; i < m; ++i) judge(i, v.nf[static_cast<size_t>(i)], rhs);
      break;
    }
    case DecoderRule::Kind::ScaledMl: {
      Top2 top;
      for (int i = 0; i < m; ++i) top.add(i, v.nf[static_cast<size_t>(i)]);
      for (int i = 0; i < m; ++i) {
        double mx = top.excluding(i);
        judge(i, v.nf[static_cast<size_t>(i)], mx == -kInf ? -kInf : n * rule.t + mx);
      }
      break;
    }
  }
  return boundary;
}

void require_closures(const DecoderRule& rule) {
  if (rule.kind == DecoderRule::Kind::GeneralH && !rule.h)
    throw std::invalid_argument("decoder rule: joint threshold function missing");
  if (rule.kind == DecoderRule::Kind::OutputOnlyG && !rule.g)
    throw std::invalid_argument("decoder rule: output threshold function missing");
}

std::uint64_t bounded_draw(std::mt19937_64& g, std::uint64_t bound) {
  // rejection keeps the draw exactly uniform
  std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  for (;;) {
    std::uint64_t v = g();
    if (v < limit) return v % bound;
  }
}

double unit_draw(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1p-53; }

Matrix log_table(const Channel& v) {
  Matrix out(v.nx(), v.ny());
  for (int x = 0; x < v.nx(); ++x)
    for (int y = 0; y < v.ny(); ++y) out(x, y) = v(x, y) > 0.0 ? std::log(v(x, y)) : -kInf;
  return out;
}

// Precomputed per-(class word, output sequence) values driving the exact
// enumeration. Output sequences are indexed base-|Y|, letter 0 most
// significant; entry layout is word * ypow + yindex.
struct Tables {
  int n = 0, nx = 0, ny = 0;
  std::vector<std::vector<int>> words;  // composition class, lexicographic
  std::uint64_t ypow = 1;
  std::vector<double> nf;     // n-scaled log metric score
  std::vector<double> wprob;  // true channel probability of y given the word
  std::vector<double> hval;   // GeneralH threshold of the joint type
  std::vector<double> gval;   // OutputOnlyG threshold, per y only
  std::vector<int> tid;       // joint type id, TypeBased grouping
  int type_count = 0;
};

Tables build_tables(const DecoderRule& rule, const Setup& s, int n, int m_count) {
  require_closures(rule);
  if (n < 1) throw std::invalid_argument("simulator: blocklength must be positive");
  Tables tb;
  tb.n = n;
  tb.nx = s.w.nx();
  tb.ny = s.w.ny();
  if (s.metric.nx() != tb.nx || s.metric.ny() != tb.ny)
    throw std::invalid_argument("simulator: metric and channel alphabets differ");
  if (s.px.size() != tb.nx)
    throw std::invalid_argument("simulator: input distribution size mismatch");

  std::vector<int> counts = nearest_n_type(s.px, n);
  std::vector<int> word;
  for (int x = 0; x < tb.nx; ++x) word.insert(word.end(), static_cast<size_t>(counts[x]), x);
  do {
    tb.words.push_back(word);
  } while (std::next_permutation(word.begin(), word.end()));

  double cost = std::pow(static_cast<double>(tb.words.size()), m_count) *
                std::pow(static_cast<double>(tb.ny), n);
  if (cost > kEnumBudget)
    throw std::invalid_argument("exact enumeration needs about " + std::to_string(cost) +
                                " evaluations; the budget is 3.2e7, use Monte Carlo instead");
  for (int i = 0; i < n; ++i) tb.ypow *= static_cast<std::uint64_t>(tb.ny);

  const size_t cls = tb.words.size();
  tb.nf.resize(cls * tb.ypow);
  tb.wprob.resize(cls * tb.ypow);
  const bool need_h = rule.kind == DecoderRule::Kind::GeneralH;
  const bool need_g = rule.kind == DecoderRule::Kind::OutputOnlyG;
  const bool need_t = rule.kind == DecoderRule::Kind::TypeBased;
  if (need_h) tb.hval.resize(cls * tb.ypow);
  if (need_g) tb.gval.resize(tb.ypow);
  if (need_t) tb.tid.resize(cls * tb.ypow);

  Matrix logv = log_table(s.metric);
  std::map<std::vector<int>, int> type_ids;
  std::vector<int> y(static_cast<size_t>(n));
  std::vector<int> cell(static_cast<size_t>(tb.nx) * tb.ny);
  for (std::uint64_t yi = 0; yi < tb.ypow; ++yi) {
    std::uint64_t r = yi;
    for (int i = n - 1; i >= 0; --i) {
      y[static_cast<size_t>(i)] = static_cast<int>(r % tb.ny);
      r /= static_cast<std::uint64_t>(tb.ny);
    }
    if (need_g) {
      std::vector<double> q(static_cast<size_t>(tb.ny), 0.0);
      for (int i = 0; i < n; ++i) q[static_cast<size_t>(y[static_cast<size_t>(i)])] += 1.0 / n;
      tb.gval[yi] = rule.g(Marginal(std::move(q)));
    }
    for (size_t wi = 0; wi < cls; ++wi) {
      const std::vector<int>& xs = tb.words[wi];
      double acc = 0.0, pr = 1.0;
      for (int i = 0; i < n; ++i) {
        acc += logv(xs[static_cast<size_t>(i)], y[static_cast<size_t>(i)]);
        pr *= s.w(xs[static_cast<size_t>(i)], y[static_cast<size_t>(i)]);
      }
      tb.nf[wi * tb.ypow + yi] = acc;
      tb.wprob[wi * tb.ypow + yi] = pr;
      if (need_t) {
        std::fill(cell.begin(), cell.end(), 0);
        for (int i = 0; i < n; ++i)
          cell[static_cast<size_t>(xs[static_cast<size_t>(i)]) * tb.ny +
               static_cast<size_t>(y[static_cast<size_t>(i)])]++;
        tb.tid[wi * tb.ypow + yi] =
            type_ids.emplace(cell, static_cast<int>(type_ids.size())).first->second;
      }
      if (need_h)
        tb.hval[wi * tb.ypow + yi] = rule.h(empirical_joint(xs, y, tb.nx, tb.ny));
    }
  }
  tb.type_count = static_cast<int>(type_ids.size());
  return tb;
}

// Per-(codebook, output) rule evaluation over the tables, with all scratch
// owned here so the hot loop never allocates.
class ConfigEval {
 public:
  ConfigEval(const Tables& tb, const DecoderRule& rule, int m_count)
      : tb_(tb), rule_(rule), m_(m_count) {
    nf_.resize(static_cast<size_t>(m_));
    if (rule_.kind == DecoderRule::Kind::GeneralH) hv_.resize(static_cast<size_t>(m_));
    if (rule_.kind == DecoderRule::Kind::TypeBased) {
      gid_.resize(static_cast<size_t>(m_));
      tmap_.assign(static_cast<size_t>(tb_.type_count), -1);
    }
  }

  void run(const std::vector<std::uint64_t>& idx, std::uint64_t yi) {
    for (int m = 0; m < m_; ++m)
      nf_[static_cast<size_t>(m)] = tb_.nf[idx[static_cast<size_t>(m)] * tb_.ypow + yi];
    MsgView v;
    v.n = tb_.n;
    v.nf = nf_;
    if (rule_.kind == DecoderRule::Kind::GeneralH) {
      for (int m = 0; m < m_; ++m)
        hv_[static_cast<size_t>(m)] = tb_.hval[idx[static_cast<size_t>(m)] * tb_.ypow + yi];
      v.h = hv_;
    } else if (rule_.kind == DecoderRule::Kind::OutputOnlyG) {
      v.g = tb_.gval[yi];
    } else if (rule_.kind == DecoderRule::Kind::TypeBased) {
      gcount_.clear();
      gnf_.clear();
      for (int m = 0; m < m_; ++m) {
        int t = tb_.tid[idx[static_cast<size_t>(m)] * tb_.ypow + yi];
        int& slot = tmap_[static_cast<size_t>(t)];
        if (slot < 0) {
          slot = static_cast<int>(gcount_.size());
          gcount_.push_back(0);
          gnf_.push_back(nf_[static_cast<size_t>(m)]);
          touched_.push_back(t);
        }
        gid_[static_cast<size_t>(m)] = slot;
        gcount_[static_cast<size_t>(slot)]++;
      }
      v.gid = gid_;
      v.gcount = gcount_;
      v.gnf = gnf_;
    }
    boundary_ = evaluate_rule(rule_, v, rs_, accept_);
    if (rule_.kind == DecoderRule::Kind::TypeBased) {
      for (int t : touched_) tmap_[static_cast<size_t>(t)] = -1;
      touched_.clear();
    }
  }

  std::span<const char> accept() const { return accept_; }
  std::span<const double> nf() const { return nf_; }
  bool boundary() const { return boundary_; }

 private:
  const Tables& tb_;
  const DecoderRule& rule_;
  int m_;
  std::vector<double> nf_, hv_, gnf_;
  std::vector<int> gid_, gcount_, tmap_, touched_;
  RuleScratch rs_;
  std::vector<char> accept_;
  bool boundary_ = false;
};

// Threshold at which a likelihood-ratio rule starts rejecting this message:
// accept iff T <= this value.
double lr_knot(double nfm, double lse_others, int n) {
  if (lse_others == -kInf) return kInf;
  if (nfm == -kInf) return -kInf;
  return (nfm - lse_others) / n;
}

// Sorted event times plus prefix weights, for step-function evaluation.
struct EventCurve {
  std::vector<double> t;
  std::vector<double> pre;  // pre[i] = total weight of the first i events
  double total = 0.0;

  void build(std::vector<std::pair<double, double>>& ev) {
    std::sort(ev.begin(), ev.end());
    t.resize(ev.size());
    pre.assign(ev.size() + 1, 0.0);
    for (size_t i = 0; i < ev.size(); ++i) {
      t[i] = ev[i].first;
      pre[i + 1] = pre[i] + ev[i].second;
    }
    total = pre.back();
  }
  double below(double x) const {
    return pre[static_cast<size_t>(std::lower_bound(t.begin(), t.end(), x) - t.begin())];
  }
  double at_most(double x) const {
    return pre[static_cast<size_t>(std::upper_bound(t.begin(), t.end(), x) - t.begin())];
  }
};

}  // namespace

std::vector<int> nearest_n_type(const InputDistribution& px, int n) {
  if (n < 1) throw std::invalid_argument("nearest_n_type: blocklength must be positive");
  const int k = px.size();
  std::vector<int> c(static_cast<size_t>(k));
  std::vector<std::pair<double, int>> rem(static_cast<size_t>(k));
  int used = 0;
  for (int i = 0; i < k; ++i) {
    double exact = px(i) * n;
    c[static_cast<size_t>(i)] = static_cast<int>(std::floor(exact));
    rem[static_cast<size_t>(i)] = {exact - c[static_cast<size_t>(i)], i};
    used += c[static_cast<size_t>(i)];
  }
  std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (int j = 0; j < n - used; ++j) c[static_cast<size_t>(rem[static_cast<size_t>(j)].second)]++;
  double tv = 0.0;
  for (int i = 0; i < k; ++i) tv += std::abs(static_cast<double>(c[static_cast<size_t>(i)]) / n - px(i));
  tv *= 0.5;
  if (tv > 0.5 / n + 1e-12)
    throw std::invalid_argument("nearest_n_type: no blocklength-" + std::to_string(n) +
                                " composition within 0.5/n of the input distribution (closest " +
                                std::to_string(tv) + " away)");
  return c;
}

int message_count(int n, double rate) {
  if (n < 1) throw std::invalid_argument("message_count: blocklength must be positive");
  if (!(rate >= 0.0) || !std::isfinite(rate))
    throw std::invalid_argument("message_count: rate must be finite and nonnegative");
  double m = std::exp(n * rate);
  if (m > 1e9)
    throw std::invalid_argument("message_count: " + std::to_string(m) +
                                " messages is beyond any simulation budget");
  long long mm = std::llround(m);
  if (mm < 2)
    throw std::invalid_argument("message_count: rate " + std::to_string(rate) +
                                " rounds to fewer than 2 messages at n=" + std::to_string(n));
  return static_cast<int>(mm);
}

Codebook sample_codebook(const InputDistribution& px, int n, int m_count,
                         std::mt19937_64& rng) {
  if (m_count < 1) throw std::invalid_argument("sample_codebook: message count must be >= 1");
  std::vector<int> counts = nearest_n_type(px, n);
  std::vector<int> base;
  for (int x = 0; x < px.size(); ++x) base.insert(base.end(), static_cast<size_t>(counts[x]), x);
  Codebook cb;
  cb.n = n;
  cb.words.resize(static_cast<size_t>(m_count));
  for (int m = 0; m < m_count; ++m) {
    std::vector<int> w = base;
    for (int i = n - 1; i > 0; --i) {
      std::uint64_t j = bounded_draw(rng, static_cast<std::uint64_t>(i) + 1);
      std::swap(w[static_cast<size_t>(i)], w[static_cast<size_t>(j)]);
    }
    cb.words[static_cast<size_t>(m)] = std::move(w);
  }
  return cb;
}

DecoderRule DecoderRule::from(const ThresholdSpec& spec) {
  switch (spec.kind) {
    case ThresholdSpec::Kind::Optimal:
      return forney(spec.t);
    case ThresholdSpec::Kind::GeneralH:
      return general(spec.h);
    case ThresholdSpec::Kind::OutputOnlyG:
      return output_only(spec.g);
    case ThresholdSpec::Kind::ScaledMl:
      return scaled_ml(spec.t);
  }
  throw std::logic_error("DecoderRule::from: bad spec kind");
}

bool DecodeOutcome::contains(int m) const {
  return std::binary_search(list.begin(), list.end(), m);
}

Decoder::Decoder(DecoderRule rule, Setup s)
    : rule_(std::move(rule)), s_(std::move(s)), logv_(log_table(s_.metric)) {
  require_closures(rule_);
}

DecodeOutcome Decoder::decode(const Codebook& cb, std::span<const int> y) const {
  const int mm = static_cast<int>(cb.words.size());
  const int n = cb.n;
  if (static_cast<int>(y.size()) != n)
    throw std::invalid_argument("decode: output length does not match the codebook");
  const int nx = s_.w.nx(), ny = s_.w.ny();

  std::vector<double> nf(static_cast<size_t>(mm));
  for (int m = 0; m < mm; ++m) {
    const std::vector<int>& xs = cb.words[static_cast<size_t>(m)];
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += logv_(xs[static_cast<size_t>(i)], y[static_cast<size_t>(i)]);
    nf[static_cast<size_t>(m)] = acc;
  }

  MsgView v;
  v.n = n;
  v.nf = nf;
  std::vector<double> hv, gnf;
  std::vector<int> gid, gcount;
  if (rule_.kind == DecoderRule::Kind::GeneralH) {
    hv.resize(static_cast<size_t>(mm));
    for (int m = 0; m < mm; ++m)
      hv[static_cast<size_t>(m)] = rule_.h(empirical_joint(cb.words[static_cast<size_t>(m)], y, nx, ny));
    v.h = hv;
  } else if (rule_.kind == DecoderRule::Kind::OutputOnlyG) {
    std::vector<double> q(static_cast<size_t>(ny), 0.0);
    for (int i = 0; i < n; ++i) q[static_cast<size_t>(y[static_cast<size_t>(i)])] += 1.0 / n;
    v.g = rule_.g(Marginal(std::move(q)));
  } else if (rule_.kind == DecoderRule::Kind::TypeBased) {
    std::map<std::vector<int>, int> ids;
    std::vector<int> cell(static_cast<size_t>(nx) * ny);
    gid.resize(static_cast<size_t>(mm));
    for (int m = 0; m < mm; ++m) {
      std::fill(cell.begin(), cell.end(), 0);
      const std::vector<int>& xs = cb.words[static_cast<size_t>(m)];
      for (int i = 0; i < n; ++i)
        cell[static_cast<size_t>(xs[static_cast<size_t>(i)]) * ny +
             static_cast<size_t>(y[static_cast<size_t>(i)])]++;
      auto [it, fresh] = ids.emplace(cell, static_cast<int>(ids.size()));
      int slot = it->second;
      if (fresh) {
        gcount.push_back(0);
        gnf.push_back(nf[static_cast<size_t>(m)]);
      }
      gid[static_cast<size_t>(m)] = slot;
      gcount[static_cast<size_t>(slot)]++;
    }
    v.gid = gid;
    v.gcount = gcount;
    v.gnf = gnf;
  }

  RuleScratch rs;
  std::vector<char> accept;
  DecodeOutcome out;
  out.boundary = evaluate_rule(rule_, v, rs, accept);
  for (int m = 0; m < mm; ++m)
    if (accept[static_cast<size_t>(m)]) out.list.push_back(m);
  return out;
}

EnsembleEstimate exact_ensemble_average_m(const DecoderRule& rule, const Setup& s, int n,
                                          int m_count) {
  if (m_count < 1)
    throw std::invalid_argument("exact ensemble: message count must be >= 1");
  Tables tb = build_tables(rule, s, n, m_count);
  const std::uint64_t cls = tb.words.size();

  struct Block {
    double err = 0.0, wrong = 0.0;
    std::uint64_t bcnt = 0;
  };
  std::vector<Block> blocks(cls);
  // One block per first-word choice; block boundaries are fixed by the
  // problem, not the worker count, so totals are bit-reproducible.
  parallel_for(cls, [&](std::size_t w0) {
    ConfigEval ce(tb, rule, m_count);
    std::vector<std::uint64_t> idx(static_cast<size_t>(m_count), 0);
    idx[0] = w0;
    NeumaierSum errw, wrongw;
    std::uint64_t bcnt = 0;
    for (;;) {
      for (std::uint64_t yi = 0; yi < tb.ypow; ++yi) {
        double wgt = tb.wprob[w0 * tb.ypow + yi];
        if (wgt == 0.0) continue;
        ce.run(idx, yi);
        std::span<const char> acc = ce.accept();
        if (!acc[0]) errw.add(wgt);
        int k = 0;
        for (int m = 1; m < m_count; ++m) k += acc[static_cast<size_t>(m)] ? 1 : 0;
        if (k > 0) wrongw.add(wgt * k);
        if (ce.boundary()) ++bcnt;
      }
      int d;
      for (d = m_count - 1; d >= 1; --d) {
        if (++idx[static_cast<size_t>(d)] < cls) break;
        idx[static_cast<size_t>(d)] = 0;
      }
      if (d < 1) break;
    }
    blocks[w0] = {errw.value(), wrongw.value(), bcnt};
  });

  NeumaierSum errv, wrongv;
  std::uint64_t bcnt = 0;
  for (const Block& b : blocks) {
    errv.add(b.err);
    wrongv.add(b.wrong);
    bcnt += b.bcnt;
  }
  double denom = 1.0;
  for (int i = 0; i < m_count; ++i) denom *= static_cast<double>(cls);
  EnsembleEstimate est;
  est.p_err = errv.value() / denom;
  est.avg_wrong = wrongv.value() / denom;
  est.any_boundary = bcnt > 0;
  est.boundary_events = bcnt;
  est.evaluations = static_cast<std::uint64_t>(denom) * tb.ypow;
  return est;
}

EnsembleEstimate exact_ensemble_average(const DecoderRule& rule, const Setup& s, int n,
                                        double rate) {
  return exact_ensemble_average_m(rule, s, n, message_count(n, rate));
}

EnsembleEstimate monte_carlo_average_m(const DecoderRule& rule, const Setup& s, int n,
                                       int m_count, std::uint64_t trials, std::uint64_t seed) {
  if (m_count < 1) throw std::invalid_argument("monte carlo: message count must be >= 1");
  if (trials == 0) throw std::invalid_argument("monte carlo: need at least one trial");
  Decoder dec(rule, s);
  std::mt19937_64 rng(seed);
  const int ny = s.w.ny();
  std::vector<int> y(static_cast<size_t>(n));
  NeumaierSum es, e2, ws, w2;
  std::uint64_t bcnt = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    Codebook cb = sample_codebook(s.px, n, m_count, rng);
    for (int i = 0; i < n; ++i) {
      double u = unit_draw(rng);
      int x = cb.words[0][static_cast<size_t>(i)];
      double cum = 0.0;
      int pick = ny - 1;
      for (int yy = 0; yy < ny; ++yy) {
        cum += s.w(x, yy);
        if (u < cum) {
          pick = yy;
          break;
        }
      }
      y[static_cast<size_t>(i)] = pick;
    }
    DecodeOutcome out = dec.decode(cb, y);
    double e = out.contains(0) ? 0.0 : 1.0;
    double k = 0.0;
    for (int m : out.list)
      if (m != 0) k += 1.0;
    es.add(e);
    e2.add(e * e);
    ws.add(k);
    w2.add(k * k);
    if (out.boundary) ++bcnt;
  }
  double nn = static_cast<double>(trials);
  EnsembleEstimate est;
  est.p_err = es.value() / nn;
  est.avg_wrong = ws.value() / nn;
  if (trials > 1) {
    double ve = (e2.value() - nn * est.p_err * est.p_err) / (nn - 1.0);
    double vw = (w2.value() - nn * est.avg_wrong * est.avg_wrong) / (nn - 1.0);
    est.stderr_err = std::sqrt(std::max(0.0, ve) / nn);
    est.stderr_wrong = std::sqrt(std::max(0.0, vw) / nn);
  }
  est.any_boundary = bcnt > 0;
  est.boundary_events = bcnt;
  est.evaluations = trials;
  return est;
}

EnsembleEstimate monte_carlo_average(const DecoderRule& rule, const Setup& s, int n,
                                     double rate, std::uint64_t trials, std::uint64_t seed) {
  return monte_carlo_average_m(rule, s, n, message_count(n, rate), trials, seed);
}

DominanceReport dominance_check(const DecoderRule& rule, const Setup& s, int n, int m_count) {
  if (m_count < 1) throw std::invalid_argument("dominance check: message count must be >= 1");
  Tables tb = build_tables(rule, s, n, m_count);
  const std::uint64_t cls = tb.words.size();
  std::uint64_t tuples = 1;
  for (int i = 0; i < m_count; ++i) tuples *= cls;
  if (tuples * tb.ypow * static_cast<std::uint64_t>(m_count) > kEventBudget)
    throw std::invalid_argument("dominance check: event list too large; shrink n or messages");
  const double denom = static_cast<double>(tuples);
  const bool forney_rule = rule.kind == DecoderRule::Kind::Forney;

  ConfigEval ce(tb, rule, m_count);
  std::vector<std::uint64_t> idx(static_cast<size_t>(m_count), 0);
  std::vector<double> pre, suf, ex;
  std::vector<std::pair<double, double>> err_ev, list_ev;
  NeumaierSum pe_acc, la_acc;
  for (;;) {
    for (std::uint64_t yi = 0; yi < tb.ypow; ++yi) {
      double wgt = tb.wprob[idx[0] * tb.ypow + yi] / denom;
      if (wgt == 0.0) continue;
      ce.run(idx, yi);
      std::span<const double> nf = ce.nf();
      lse_excluding(nf, pre, suf, ex);
      // Knots of the likelihood-ratio family. The checked rule, when it is
      // itself a threshold rule, is judged in the same knot arithmetic so
      // exact ties cannot split between the two computations.
      double k0 = lr_knot(nf[0], ex[0], n);
      bool acc0 = forney_rule ? rule.t <= k0 : ce.accept()[0] != 0;
      if (!acc0) pe_acc.add(wgt);
      err_ev.emplace_back(k0, wgt);
      int k = 0;
      for (int m = 1; m < m_count; ++m) {
        double km = lr_knot(nf[static_cast<size_t>(m)], ex[static_cast<size_t>(m)], n);
        bool accm = forney_rule ? rule.t <= km : ce.accept()[static_cast<size_t>(m)] != 0;
        k += accm ? 1 : 0;
        list_ev.emplace_back(km, wgt);
      }
      if (k > 0) la_acc.add(wgt * k);
    }
    int d;
    for (d = m_count - 1; d >= 0; --d) {
      if (++idx[static_cast<size_t>(d)] < cls) break;
      idx[static_cast<size_t>(d)] = 0;
    }
    if (d < 0) break;
  }

  DominanceReport rep;
  rep.p_err = pe_acc.value();
  rep.avg_wrong = la_acc.value();

  std::vector<double> knots;
  knots.reserve(err_ev.size() + list_ev.size());
  for (const auto& e : err_ev) knots.push_back(e.first);
  for (const auto& e : list_ev) knots.push_back(e.first);
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  EventCurve err, lst;
  err.build(err_ev);
  lst.build(list_ev);

  // Family operating points: threshold at each knot, just above each knot,
  // and the two extremes. p_err grows with T, the list weight shrinks, so
  // the points come out ordered.
  struct Point {
    double pe, la, t;
  };
  std::vector<Point> pts;
  pts.push_back({0.0, lst.total, -kInf});
  for (double kv : knots) {
    pts.push_back({err.below(kv), lst.total - lst.below(kv), kv});
    pts.push_back({err.at_most(kv), lst.total - lst.at_most(kv), kv});
  }
  pts.push_back({err.below(kInf), lst.total - lst.below(kInf), kInf});

  double best = kInf;
  double tw = 0.0;
  for (const Point& p : pts) {
    double sl = std::max(p.pe - rep.p_err, p.la - rep.avg_wrong);
    if (sl < best) {
      best = sl;
      tw = p.t;
    }
  }
  // Randomized mixes of adjacent family points cover the chords between
  // them; match the error coordinate and compare list weights.
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    const Point& a = pts[i];
    const Point& b = pts[i + 1];
    if (a.pe <= rep.p_err && rep.p_err <= b.pe && b.pe > a.pe) {
      double lam = (rep.p_err - a.pe) / (b.pe - a.pe);
      double la_mix = a.la + lam * (b.la - a.la);
      double sl = std::max(0.0, la_mix - rep.avg_wrong);
      if (sl < best) {
        best = sl;
        tw = a.t;
      }
    }
  }
  rep.slack = best;
  rep.dominated = best <= 1e-9;
  rep.t_witness = tw;
  return rep;
}

}  // namespace exlab
