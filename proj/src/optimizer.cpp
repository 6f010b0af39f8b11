#include "exlab/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace exlab {
namespace {

constexpr double kTieTol = 1e-12;       // value ties resolved lexicographically
constexpr double kSlackHard = 1e-12;    // max clamped negative mass accepted as exact
constexpr double kSlackWeight = 1e6;    // steers the feasibility probe onto the slice first
constexpr double kPassTol = 1e-13;      // coordinate-descent stops below this improvement
constexpr size_t kGridCap = 30000000;   // coarse grids beyond this are rejected, not attempted

// a - b for constraint violations; never NaN. When both are infinite the
// result errs on the side matching the first operand's sign.
double diff_inf(double a, double b) {
  if (a == -kInf) return -kInf;
  if (b == -kInf) return kInf;
  if (a == kInf) return kInf;
  if (b == kInf) return -kInf;
  return a - b;
}

struct KernelShape {
  int nx = 0, ny = 0;
  std::vector<int> free_rows;
  int det_row = -1;  // row recovered from the target marginal; -1 when marginal is free
  std::vector<int> filler_rows;  // zero-probability inputs, content irrelevant
  int coords() const { return static_cast<int>(free_rows.size()) * (ny - 1); }
};

KernelShape make_shape(const InputDistribution& px, int ny, bool on_slice) {
  KernelShape sh;
  sh.nx = px.size();
  sh.ny = ny;
  int last_pos = -1;
  for (int x = 0; x < px.size(); ++x)
    if (px(x) > 0.0) last_pos = x;
  for (int x = 0; x < px.size(); ++x) {
    if (px(x) <= 0.0) {
      sh.filler_rows.push_back(x);
    } else if (on_slice && x == last_pos) {
      sh.det_row = x;
    } else {
      sh.free_rows.push_back(x);
    }
  }
  return sh;
}

// Fills `out` from the free coordinates. Free rows carry their first ny-1
// entries in theta with the last entry completing the row; the determined row
// is solved from the target marginal. Returns the total negative mass that
// had to be clamped away (slice infeasibility measure), or +inf when a row
// degenerates entirely.
double materialize(const KernelShape& sh, const double* th, const InputDistribution& px,
                   const Marginal* target, Matrix* out) {
  double slack = 0.0;
  int c = 0;
  for (int r : sh.free_rows) {
    double sum = 0.0;
    for (int y = 0; y < sh.ny - 1; ++y) {
      double v = th[c++];
      if (v < 0.0) {  // brackets are clipped to [0,1]; guard rounding only
        slack += -v;
        v = 0.0;
      }
      (*out)(r, y) = v;
      sum += v;
    }
    double lastv = 1.0 - sum;
    if (lastv < 0.0) {
      slack += -lastv;
      lastv = 0.0;
    }
    (*out)(r, sh.ny - 1) = lastv;
    double rowsum = sum + lastv;
    if (rowsum <= 0.0) return kInf;
    for (int y = 0; y < sh.ny; ++y) (*out)(r, y) /= rowsum;
  }
  if (sh.det_row >= 0) {
    double pdet = px(sh.det_row);
    double rowsum = 0.0;
    for (int y = 0; y < sh.ny; ++y) {
      double used = 0.0;
      for (int r : sh.free_rows) used += px(r) * (*out)(r, y);
      double raw = ((*target)(y) - used) / pdet;
      if (raw < 0.0) {
        slack += -raw * pdet;
        raw = 0.0;
      }
      (*out)(sh.det_row, y) = raw;
      rowsum += raw;
    }
    if (rowsum <= 0.0) return kInf;
    for (int y = 0; y < sh.ny; ++y) (*out)(sh.det_row, y) /= rowsum;
  }
  for (int r : sh.filler_rows) {
    for (int y = 0; y < sh.ny; ++y)
      (*out)(r, y) = target ? (*target)(y) : 1.0 / sh.ny;
  }
  return slack;
}

enum class Mode { Objective, Violation };

struct Problem {
  const Setup* s = nullptr;
  const OptimizeOptions* o = nullptr;
  bool is_pair = false;
  KernelShape sha, shb;
  const Marginal* fixed_marg = nullptr;  // single problems only
  const SingleObjective* obj1 = nullptr;
  const PairObjective* obj2 = nullptr;
  const std::vector<Constraint>* cons = nullptr;
  const std::vector<SingleViolation>* cust1 = nullptr;
  const std::vector<PairViolation>* cust2 = nullptr;

  int dim() const { return sha.coords() + (is_pair ? shb.coords() : 0); }

  // Mode::Objective: +inf when any constraint (or the slice algebra) fails,
  // the objective value otherwise. Mode::Violation: weighted infeasibility
  // score, 0 on feasible points.
  double probe(const double* th, Mode mode) const {
    Matrix ka(sha.nx, sha.ny);
    double slack = materialize(sha, th, s->px, is_pair ? nullptr : fixed_marg, &ka);
    if (slack == kInf) return kInf;
    if (mode == Mode::Objective && slack > kSlackHard) return kInf;
    JointType ja(s->px, std::move(ka));
    Eval ea(ja, *s);

    std::optional<JointType> jb;
    if (is_pair) {
      Matrix kb(shb.nx, shb.ny);
      const Marginal& tgt = ja.marginal();
      double sb = materialize(shb, th + sha.coords(), s->px, &tgt, &kb);
      if (sb == kInf) return kInf;
      slack += sb;
      if (mode == Mode::Objective && slack > kSlackHard) return kInf;
      jb.emplace(s->px, std::move(kb));
    }
    std::optional<Eval> eb;
    if (jb) eb.emplace(*jb, *s);

    double score = slack * kSlackWeight;
    bool infeasible = false;
    auto consider = [&](double viol) {
      if (mode == Mode::Objective) {
        if (!(viol <= o->eps_feas)) infeasible = true;
      } else {
        double p = pos_part(viol);
        if (p == kInf)
          score = kInf;
        else if (score != kInf)
          score += p;
      }
    };

    const Eval& eq = is_pair ? *eb : ea;  // f/I constraints target the info side
    for (const Constraint& c : *cons) {
      if (infeasible) break;
      switch (c.kind) {
        case Constraint::Kind::FGe: consider(diff_inf(c.bound, eq.f())); break;
        case Constraint::Kind::FLe: consider(diff_inf(eq.f(), c.bound)); break;
        case Constraint::Kind::IGe: consider(diff_inf(c.bound, eq.mi())); break;
        case Constraint::Kind::ILe: consider(diff_inf(eq.mi(), c.bound)); break;
        case Constraint::Kind::DLe: consider(diff_inf(ea.div(), c.bound)); break;
        case Constraint::Kind::FPairGe: {
          double rhs = eq.f() == -kInf ? -kInf : eq.f() + c.bound;
          consider(diff_inf(ea.f(), rhs));
          break;
        }
        case Constraint::Kind::MarginalEq: break;  // structural
      }
    }
    if (!infeasible) {
      if (is_pair && cust2) {
        for (const auto& v : *cust2) {
          if (infeasible) break;
          consider(v(ea, *eb));
        }
      } else if (!is_pair && cust1) {
        for (const auto& v : *cust1) {
          if (infeasible) break;
          consider(v(ea));
        }
      }
    }
    if (mode == Mode::Violation) return score;
    if (infeasible) return kInf;
    double val = is_pair ? (*obj2)(ea, *eb) : (*obj1)(ea);
    if (std::isnan(val)) throw std::logic_error("optimizer: objective produced NaN");
    return val;
  }

  // Witnesses and the flattened kernels used for lexicographic tie-breaks.
  void witnesses(const double* th, std::optional<JointType>* a, std::optional<JointType>* b) const {
    Matrix ka(sha.nx, sha.ny);
    materialize(sha, th, s->px, is_pair ? nullptr : fixed_marg, &ka);
    a->emplace(s->px, std::move(ka));
    if (is_pair) {
      Matrix kb(shb.nx, shb.ny);
      const Marginal& tgt = (*a)->marginal();
      materialize(shb, th + sha.coords(), s->px, &tgt, &kb);
      b->emplace(s->px, std::move(kb));
    }
  }

  std::vector<double> flatten(const double* th) const {
    std::optional<JointType> a, b;
    witnesses(th, &a, &b);
    std::vector<double> out = a->kernel().data();
    if (b) out.insert(out.end(), b->kernel().data().begin(), b->kernel().data().end());
    return out;
  }
};

struct Candidate {
  double value = kInf;
  std::vector<double> theta;
};

// Sparse joint-move pattern; stepping along it keeps the block's output
// marginal fixed, so determined rows and marginal-keyed bounds stay put.
using Direction = std::vector<std::pair<int, double>>;

class Engine {
 public:
  Engine(const Problem& p) : p_(p) {}

  MinResult run() {
    build_grid();
    build_directions();
    std::vector<Candidate> top;
    scan(Mode::Objective, &top);

    std::vector<Candidate> finals;
    if (!top.empty() && top.front().value == -kInf) {
      finals.push_back(top.front());  // unbounded below: nothing to refine
    } else if (!top.empty()) {
      for (auto& c : top) {
        double li = 0.0;
        c.value = refine(c.theta, c.value, Mode::Objective, &li);
        polish(c.theta, c.value);
        c.value = refine(c.theta, c.value, Mode::Objective, &li);
        last_improve_ = std::max(last_improve_, li);
        finals.push_back(c);
      }
    } else {
      // Feasibility probe: chase the least-violating point, then restart the
      // objective refinement from it if it lands inside the constraint set.
      std::vector<Candidate> vtop;
      scan(Mode::Violation, &vtop);
      if (!vtop.empty()) {
        Candidate c = vtop.front();
        double li = 0.0;
        c.value = refine(c.theta, c.value, Mode::Violation, &li);
        double obj = p_.probe(c.theta.data(), Mode::Objective);
        if (obj < kInf) {
          Candidate f{obj, c.theta};
          f.value = refine(f.theta, f.value, Mode::Objective, &li);
          polish(f.theta, f.value);
          f.value = refine(f.theta, f.value, Mode::Objective, &li);
          last_improve_ = std::max(last_improve_, li);
          finals.push_back(f);
        }
      }
    }

    MinResult res;
    if (finals.empty()) return res;  // infeasible: +inf, no witnesses
    const Candidate* best = &finals.front();
    for (const auto& c : finals) {
      if (c.value < best->value - kTieTol) {
        best = &c;
      } else if (std::abs(c.value - best->value) <= kTieTol && &c != best) {
        if (p_.flatten(c.theta.data()) < p_.flatten(best->theta.data())) best = &c;
      }
    }
    if (best->value == kInf) return res;
    res.value = best->value;
    res.feasible = true;
    std::optional<JointType> wa, wb;
    p_.witnesses(best->theta.data(), &wa, &wb);
    if (p_.is_pair) {
      res.q_tilde = std::move(wa);
      res.q = std::move(wb);
    } else {
      res.q = std::move(wa);
    }
    res.gap_estimate = gap(best->theta, best->value);
    return res;
  }

 private:
  void build_grid() {
    int k = static_cast<int>(std::lround(1.0 / p_.o->delta0));
    if (k < 1) k = 1;
    rows_.clear();
    std::vector<int> c(p_.sha.ny, 0);
    enumerate_rows(p_.sha.ny, k, 0, k, &c);
    size_t nfree = p_.sha.free_rows.size() + (p_.is_pair ? p_.shb.free_rows.size() : 0);
    double total = 1.0;
    for (size_t i = 0; i < nfree; ++i) total *= static_cast<double>(rows_.size());
    if (total > static_cast<double>(kGridCap))
      throw std::runtime_error(
          "optimizer: coarse grid has " + std::to_string(total) +
          " points; raise delta0 (alphabets this large need a coarser scan)");
    nfree_ = nfree;
  }

  // Coordinate descent alone cannot slide along a constraint ridge that the
  // shared marginal creates: moving one kernel entry shifts the marginal and
  // with it the other side's determined row. Paired moves on two rows of the
  // same block, weighted inversely by the input masses, span exactly the
  // marginal-preserving subspace.
  void build_directions() {
    dirs_.clear();
    auto add_block = [&](const KernelShape& sh, int offset) {
      const InputDistribution& px = p_.s->px;
      int nr = static_cast<int>(sh.free_rows.size());
      for (int i = 0; i + 1 < nr; ++i) {
        for (int j = i + 1; j < nr; ++j) {
          double wi = 1.0 / px(sh.free_rows[i]);
          double wj = 1.0 / px(sh.free_rows[j]);
          double scale = 1.0 / std::max(wi, wj);
          for (int y = 0; y + 1 < sh.ny; ++y) {
            Direction d;
            d.emplace_back(offset + i * (sh.ny - 1) + y, wi * scale);
            d.emplace_back(offset + j * (sh.ny - 1) + y, -wj * scale);
            dirs_.push_back(std::move(d));
          }
        }
      }
    };
    add_block(p_.sha, 0);
    if (p_.is_pair) add_block(p_.shb, p_.sha.coords());
  }

  void enumerate_rows(int ny, int k, int pos, int left, std::vector<int>* c) {
    if (pos == ny - 1) {
      (*c)[pos] = left;
      std::vector<double> row(ny);
      for (int i = 0; i < ny; ++i) row[i] = static_cast<double>((*c)[i]) / k;
      rows_.push_back(std::move(row));
      return;
    }
    for (int v = 0; v <= left; ++v) {
      (*c)[pos] = v;
      enumerate_rows(ny, k, pos + 1, left - v, c);
    }
  }

  void scan(Mode mode, std::vector<Candidate>* top) {
    int dim = p_.dim();
    std::vector<double> th(dim, 0.0);
    std::vector<size_t> idx(nfree_, 0);
    int keep = std::max(1, p_.o->refine_top_k);
    auto offer = [&](double v) {
      if (v == kInf) return;
      if (top->size() < static_cast<size_t>(keep) || v < top->back().value) {
        Candidate c{v, th};
        auto it = std::upper_bound(top->begin(), top->end(), v,
                                   [](double a, const Candidate& b) { return a < b.value; });
        top->insert(it, std::move(c));
        if (top->size() > static_cast<size_t>(keep)) top->pop_back();
      }
    };
    for (;;) {
      int c = 0;
      for (size_t r = 0; r < nfree_; ++r) {
        const std::vector<double>& row = rows_[idx[r]];
        for (int y = 0; y + 1 < p_.sha.ny; ++y) th[c++] = row[y];
      }
      offer(p_.probe(th.data(), mode));
      // odometer, last digit fastest: lexicographic in the flattened kernels
      size_t r = nfree_;
      for (;;) {
        if (r == 0) return;
        --r;
        if (++idx[r] < rows_.size()) break;
        idx[r] = 0;
      }
    }
  }

  double refine(std::vector<double>& th, double v, Mode mode, double* last_improve) {
    int dim = p_.dim();
    for (int pass = 0; pass < p_.o->max_passes; ++pass) {
      double v0 = v;
      for (int i = 0; i < dim; ++i) v = zoom_coord(th, i, v, mode);
      for (const Direction& d : dirs_) v = zoom_dir(th, d, v, mode);
      double imp = v0 - v;
      if (std::isfinite(imp)) *last_improve = imp;
      if (!(imp > kPassTol)) break;
    }
    return v;
  }

  double zoom_dir(std::vector<double>& th, const Direction& d, double v, Mode mode) {
    double tlo = -p_.o->delta0, thi = p_.o->delta0;
    for (const auto& [i, w] : d) {
      double up = (1.0 - th[i]) / w, dn = (0.0 - th[i]) / w;
      if (w < 0) std::swap(up, dn);
      thi = std::min(thi, up);
      tlo = std::max(tlo, dn);
    }
    if (!(thi - tlo > p_.o->delta1)) return v;
    std::vector<double> scratch = th;
    auto probe_at = [&](double t) {
      for (const auto& [i, w] : d) scratch[i] = std::clamp(th[i] + t * w, 0.0, 1.0);
      return p_.probe(scratch.data(), mode);
    };
    double best_t = 0.0, best_v = v;
    double lo = tlo, hi = thi;
    int P = std::max(5, p_.o->zoom_points);
    for (int stage = 0; stage < 80 && hi - lo > p_.o->delta1; ++stage) {
      double w = (hi - lo) / (P - 1);
      for (int j = 0; j < P; ++j) {
        double t = lo + j * w;
        double pv = probe_at(t);
        if (pv < best_v) {
          best_v = pv;
          best_t = t;
        }
      }
      lo = std::max(tlo, best_t - w);
      hi = std::min(thi, best_t + w);
    }
    if (best_v < v) {
      for (const auto& [i, w] : d) th[i] = std::clamp(th[i] + best_t * w, 0.0, 1.0);
      return best_v;
    }
    return v;
  }

  double zoom_coord(std::vector<double>& th, int i, double v, Mode mode) {
    double lo = std::max(0.0, th[i] - p_.o->delta0);
    double hi = std::min(1.0, th[i] + p_.o->delta0);
    double best_t = th[i], best_v = v;
    int P = std::max(5, p_.o->zoom_points);
    for (int stage = 0; stage < 80 && hi - lo > p_.o->delta1; ++stage) {
      double w = (hi - lo) / (P - 1);
      for (int j = 0; j < P; ++j) {
        double t = lo + j * w;
        th[i] = t;
        double pv = p_.probe(th.data(), mode);
        if (pv < best_v) {
          best_v = pv;
          best_t = t;
        }
      }
      lo = std::max(0.0, best_t - w);
      hi = std::min(1.0, best_t + w);
    }
    th[i] = best_t;
    return best_v;
  }

  // Push the point flush against whichever inequality surface stops it: the
  // zoom cannot localize a constraint boundary below delta1, the bisection
  // can. Matters for linear objectives whose minimum sits exactly on a
  // boundary.
  void polish(std::vector<double>& th, double& v) {
    if (!p_.o->boundary_polish || !std::isfinite(v)) return;
    int dim = p_.dim();
    for (int i = 0; i < dim; ++i) {
      for (int dir = -1; dir <= 1; dir += 2) {
        double room = dir > 0 ? 1.0 - th[i] : th[i];
        double tmax = std::min(room, 8 * p_.o->delta1);
        if (tmax <= 0) continue;
        double base = th[i];
        th[i] = base + dir * tmax;
        double pv = p_.probe(th.data(), Mode::Objective);
        if (pv == kInf) {
          double lo = 0.0, hi = tmax;  // probe(base) is feasible
          for (int it = 0; it < 60; ++it) {
            double mid = 0.5 * (lo + hi);
            th[i] = base + dir * mid;
            if (p_.probe(th.data(), Mode::Objective) == kInf)
              hi = mid;
            else
              lo = mid;
          }
          th[i] = base + dir * lo;
          pv = p_.probe(th.data(), Mode::Objective);
        }
        if (pv < v) {
          v = pv;
        } else {
          th[i] = base;
        }
      }
    }
  }

  // First-order bound on what refining past delta1 could still recover.
  double gap(const std::vector<double>& th, double v) {
    if (!std::isfinite(v)) return 0.0;
    std::vector<double> t = th;
    double sum = 0.0;
    for (size_t i = 0; i < t.size(); ++i) {
      double step = 0.0;
      for (int dir = -1; dir <= 1; dir += 2) {
        double x = th[i] + dir * p_.o->delta1;
        if (x < 0.0 || x > 1.0) continue;
        t[i] = x;
        double pv = p_.probe(t.data(), Mode::Objective);
        if (std::isfinite(pv)) step = std::max(step, std::abs(pv - v));
      }
      t[i] = th[i];
      sum += step;
    }
    return last_improve_ + sum + 1e-12;
  }

  const Problem& p_;
  std::vector<std::vector<double>> rows_;
  std::vector<Direction> dirs_;
  size_t nfree_ = 0;
  double last_improve_ = 0.0;
};

void validate_common(const Problem& p) {
  for (const Constraint& c : *p.cons) {
    if (c.kind == Constraint::Kind::FPairGe && !p.is_pair)
      throw std::invalid_argument("optimizer: f_pair_ge constraint in a single problem");
    if (c.kind == Constraint::Kind::MarginalEq && !p.is_pair && !p.fixed_marg)
      throw std::invalid_argument("optimizer: marginal_eq without a fixed marginal");
  }
  if (p.is_pair) {
    bool coupled = false;
    for (const Constraint& c : *p.cons)
      if (c.kind == Constraint::Kind::MarginalEq) coupled = true;
    if (!coupled)
      throw std::invalid_argument("optimizer: pair problems require marginal_eq");
  }
}

}  // namespace

Minimizer::Minimizer(Setup setup, OptimizeOptions opts)
    : setup_(std::move(setup)), opts_(opts) {
  if (setup_.px.size() != setup_.w.nx())
    throw std::invalid_argument("optimizer: input distribution does not match channel");
  if (setup_.metric.nx() != setup_.w.nx() || setup_.metric.ny() != setup_.w.ny())
    throw std::invalid_argument("optimizer: metric channel alphabets differ from channel");
  if (!(opts_.delta0 > 0) || !(opts_.delta1 > 0))
    throw std::invalid_argument("optimizer: resolutions must be positive");
}

MinResult Minimizer::single(const SingleObjective& objective,
                            const std::vector<Constraint>& constraints,
                            const std::optional<Marginal>& fixed_marginal,
                            const std::vector<SingleViolation>& custom) const {
  if (fixed_marginal && fixed_marginal->size() != setup_.w.ny())
    throw std::invalid_argument("optimizer: fixed marginal does not match output alphabet");
  Problem p;
  p.s = &setup_;
  p.o = &opts_;
  p.is_pair = false;
  p.sha = make_shape(setup_.px, setup_.w.ny(), fixed_marginal.has_value());
  p.fixed_marg = fixed_marginal ? &*fixed_marginal : nullptr;
  p.obj1 = &objective;
  p.cons = &constraints;
  p.cust1 = &custom;
  validate_common(p);
  return Engine(p).run();
}

MinResult Minimizer::pair(const PairObjective& objective,
                          const std::vector<Constraint>& constraints,
                          const std::vector<PairViolation>& custom) const {
  Problem p;
  p.s = &setup_;
  p.o = &opts_;
  p.is_pair = true;
  p.sha = make_shape(setup_.px, setup_.w.ny(), false);
  p.shb = make_shape(setup_.px, setup_.w.ny(), true);
  p.obj2 = &objective;
  p.cons = &constraints;
  p.cust2 = &custom;
  validate_common(p);
  return Engine(p).run();
}

MinResult minimize_single(const Setup& s, const SingleObjective& objective,
                          const std::vector<Constraint>& constraints,
                          const std::optional<Marginal>& fixed_marginal,
                          const std::vector<SingleViolation>& custom,
                          const OptimizeOptions& opts) {
  return Minimizer(s, opts).single(objective, constraints, fixed_marginal, custom);
}

MinResult minimize_pair(const Setup& s, const PairObjective& objective,
                        const std::vector<Constraint>& constraints,
                        const std::vector<PairViolation>& custom,
                        const OptimizeOptions& opts) {
  return Minimizer(s, opts).pair(objective, constraints, custom);
}

}  // namespace exlab
