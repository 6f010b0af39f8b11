// Command-line front end: exponent sweeps, threshold synthesis, figure
// regeneration, and finite-blocklength simulation, all emitting
// self-describing CSV plus gnuplot scripts that reference only the CSV.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "exlab/exponents.hpp"
#include "exlab/figures.hpp"
#include "exlab/io.hpp"
#include "exlab/parallel.hpp"
#include "exlab/simulator.hpp"
#include "exlab/thresholds.hpp"
#include "exlab/typespace.hpp"

namespace {

using namespace exlab;

constexpr double kLn2 = 0.69314718055994531;

struct Options {
  std::string channel = "w1";
  std::string px = "uniform";
  double t = 0.0;
  bool t_given = false;
  double target_ee = 0.0;
  bool target_given = false;
  std::string rates;
  int points = 21;
  std::string cls = "optimal";
  double delta0 = 1.0 / 50;
  double delta1 = 1e-5;
  std::uint64_t seed = 1;
  std::uint64_t trials = 0;  // zero selects exact enumeration
  int n = 4;
  long long m = 0;  // zero derives M from the rate
  double rate = -1.0;
  std::string out;
  bool bits = false;
  bool dominance = false;
  int g_grid = 5;
  int which = 1;
  std::string lengths = "2:6";
};

OptimizeOptions make_opts(const Options& o) {
  OptimizeOptions opts;
  opts.delta0 = o.delta0;
  opts.delta1 = o.delta1;
  return opts;
}

std::vector<double> parse_rate_spec(const std::string& spec) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : spec) {
    if (c == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  if (parts.size() == 1) return {parse_value(parts[0], "--rates")};
  if (parts.size() != 3) throw std::runtime_error("--rates wants lo:hi:count or a single rate");
  double lo = parse_value(parts[0], "--rates");
  double hi = parse_value(parts[1], "--rates");
  long n = std::strtol(parts[2].c_str(), nullptr, 10);
  if (n < 1) throw std::runtime_error("--rates: count must be >= 1");
  if (n == 1) return {lo};
  std::vector<double> out(static_cast<size_t>(n));
  for (long i = 0; i < n; ++i)
    out[static_cast<size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  return out;
}

std::vector<double> resolve_rates(const Options& o, const Setup& s, int default_points) {
  if (!o.rates.empty()) return parse_rate_spec(o.rates);
  return rate_grid(s, o.points > 0 ? o.points : default_points);
}

double branch_code(Branch b) {
  switch (b) {
    case Branch::A: return 0.0;
    case Branch::B: return 1.0;
    default: return 2.0;
  }
}

std::string basename_of(const std::string& path) {
  size_t slash = path.find_last_of('/');
  return slash == std::string::npos ? path : path.substr(slash + 1);
}

std::string script_path_for(const std::string& csv_path) {
  std::string p = csv_path;
  if (p.size() > 4 && p.compare(p.size() - 4, 4, ".csv") == 0) p.resize(p.size() - 4);
  return p + ".gnuplot";
}

// Shared header block: version, normalized config, resolutions. No
// timestamps, so regeneration with the same config is byte-identical.
std::vector<std::string> base_header(const Options& o, const std::string& command,
                                     const Setup& s) {
  std::vector<std::string> h;
  h.push_back(std::string("tool: ") + kToolVersion);
  h.push_back("command: " + command);
  std::string rows;
  for (int x = 0; x < s.w.nx(); ++x) {
    std::vector<double> row(static_cast<size_t>(s.w.ny()));
    for (int y = 0; y < s.w.ny(); ++y) row[static_cast<size_t>(y)] = s.w(x, y);
    if (x) rows += "; ";
    rows += format_row(row);
  }
  h.push_back("channel: " + o.channel + " rows " + rows);
  h.push_back("px: " + format_row(s.px.probs()));
  h.push_back("units: nats");
  h.push_back("delta0: " + format_value(o.delta0) + " delta1: " + format_value(o.delta1));
  return h;
}

std::string target_desc(const Options& o) {
  if (o.target_given) return "fixed " + format_value(o.target_ee);
  return "per-rate optimal error exponent at offset " + format_value(o.t);
}

// Human-readable echo; conv marks columns that are nats and convert under
// --bits. The CSV on disk always stays in nats.
void echo_table(const CsvTable& t, const std::vector<char>& conv, bool bits) {
  double scale = bits ? 1.0 / kLn2 : 1.0;
  std::vector<int> width(t.columns.size());
  std::string head;
  for (size_t i = 0; i < t.columns.size(); ++i) {
    width[i] = std::max<int>(13, static_cast<int>(t.columns[i].size()) + 1);
    char buf[48];
    std::snprintf(buf, sizeof buf, "%*s", width[i], t.columns[i].c_str());
    head += buf;
  }
  std::printf("%s%s\n", head.c_str(), bits ? "   [bits]" : "");
  for (const auto& row : t.rows) {
    std::string line;
    for (size_t i = 0; i < row.size(); ++i) {
      double v = row[i];
      if (i < conv.size() && conv[i] && std::isfinite(v)) v *= scale;
      char buf[48];
      if (v == kInf)
        std::snprintf(buf, sizeof buf, "%*s", width[i], "+inf");
      else if (v == -kInf)
        std::snprintf(buf, sizeof buf, "%*s", width[i], "-inf");
      else
        std::snprintf(buf, sizeof buf, "%*.6g", width[i], v);
      line += buf;
    }
    std::printf("%s\n", line.c_str());
  }
}

int rule_code(DecoderRule::Kind k) {
  switch (k) {
    case DecoderRule::Kind::Forney: return 0;
    case DecoderRule::Kind::TypeBased: return 1;
    case DecoderRule::Kind::GeneralH: return 2;
    case DecoderRule::Kind::OutputOnlyG: return 3;
    default: return 4;
  }
}

// Builds the decoder under test. Threshold classes psi/lambda1/lambda2 are
// synthesized at (rate, target) from the memoized threshold solver; forney
// and typebased take the offset directly.
DecoderRule make_rule(const Options& o, const Setup& s, double rate, double target,
                      const OptimizeOptions& opts, double* param_out) {
  *param_out = o.t;
  if (o.cls == "optimal" || o.cls == "forney") return DecoderRule::forney(o.t);
  if (o.cls == "typebased") return DecoderRule::type_based(o.t);
  GStarFn gfn(s, opts);
  if (o.cls == "psi") {
    *param_out = target;
    return DecoderRule::general(gfn.as_h_star(rate, target));
  }
  if (o.cls == "lambda1") {
    *param_out = target;
    return DecoderRule::output_only(gfn.as_g_star(target));
  }
  if (o.cls == "lambda2") {
    double t2 = t_star(rate, target, s, opts);
    *param_out = t2;
    return DecoderRule::scaled_ml(t2);
  }
  throw std::runtime_error("unknown decoder class '" + o.cls + "'");
}

int run_exponents(const Options& o) {
  Channel w = load_channel(o.channel);
  Setup s = matched(w, load_px(o.px, w.nx()));
  OptimizeOptions opts = make_opts(o);
  std::vector<double> rates = resolve_rates(o, s, 21);
  bool with_class = o.cls != "optimal" && o.cls != "forney" && o.cls != "typebased";

  CsvTable t;
  t.header = base_header(o, "exponents", s);
  t.header.push_back("offset T: " + format_value(o.t));
  t.header.push_back("branch codes: 0 coupled-pair minimum, 1 low-metric minimum, 2 degenerate");
  if (with_class) t.header.push_back("class: " + o.cls + ", target: " + target_desc(o));
  t.columns = {"rate", "ee_opt", "el_opt", "ee_a", "ee_b", "branch"};
  if (with_class) {
    t.columns.push_back(o.cls + "_ee");
    t.columns.push_back(o.cls + "_el");
  }
  t.rows.assign(rates.size(), {});

  GStarFn gfn(s, opts);
  parallel_for(rates.size(), [&](std::size_t i) {
    double r = rates[i];
    ExponentResult a = e_a(r, o.t, s, opts);
    ExponentResult b = e_b(r, o.t, s, opts);
    const ExponentResult& win = (a.value <= b.value) ? a : b;
    double ee = win.value;
    double el = (win.feasible && win.value != kInf) ? ee + o.t : win.value;
    std::vector<double> row = {r, ee, el, a.value, b.value, branch_code(win.branch)};
    if (with_class) {
      double target = o.target_given ? o.target_ee : ee;
      if (o.cls == "psi") {
        JointThreshold h = gfn.as_h_star(r, target);
        row.push_back(psi_error_exponent(r, h, s, opts).value);
        row.push_back(psi_list_exponent(r, h, s, opts).value);
      } else if (o.cls == "lambda1") {
        ClassExponents ce = lambda1_exponents(r, gfn.as_g_star(target), s, opts);
        row.push_back(ce.ee.value);
        row.push_back(ce.el.value);
      } else if (o.cls == "lambda2") {
        double t2 = t_star(r, target, s, opts);
        ClassExponents ce = lambda2_exponents(r, t2, s, opts);
        row.push_back(ce.ee.value);
        row.push_back(ce.el.value);
      } else {
        throw std::runtime_error("unknown decoder class '" + o.cls + "'");
      }
    }
    t.rows[i] = std::move(row);
  });

  std::string out = o.out.empty() ? "exponents.csv" : o.out;
  write_csv(out, t);
  std::vector<char> conv(t.columns.size(), 1);
  conv[5] = 0;
  echo_table(t, conv, o.bits);
  std::printf("wrote %s (%zu rates)\n", out.c_str(), t.rows.size());
  return 0;
}

int run_thresholds(const Options& o) {
  Channel w = load_channel(o.channel);
  Setup s = matched(w, load_px(o.px, w.nx()));
  OptimizeOptions opts = make_opts(o);
  std::vector<double> rates = resolve_rates(o, s, 5);
  const int ny = s.w.ny();
  const int gk = ny == 2 ? std::max(2, o.g_grid) : 0;

  CsvTable t;
  t.header = base_header(o, "thresholds", s);
  t.header.push_back("offset T: " + format_value(o.t));
  t.header.push_back("target: " + target_desc(o));
  if (gk > 0)
    t.header.push_back("gstar columns sample the output marginal qy(0) = j/" +
                       std::to_string(gk - 1));
  else
    t.header.push_back("gstar sampling skipped: output alphabet is not binary");
  t.columns = {"rate", "e_target", "t_star", "rbar_cr", "rlow_cr"};
  for (int j = 0; j < gk; ++j) t.columns.push_back("gstar_" + std::to_string(j));
  t.rows.assign(rates.size(), {});

  // rlow depends only on the offset; compute once outside the rate loop.
  double rlow = kInf;
  try {
    rlow = critical_rate_low(o.t, s, opts).value;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "note: lower critical rate unavailable: %s\n", e.what());
  }

  GStarFn gfn(s, opts);
  parallel_for(rates.size(), [&](std::size_t i) {
    double r = rates[i];
    double target = o.target_given ? o.target_ee
                                   : optimal_exponents(r, o.t, s, opts).ee.value;
    double ts = t_star(r, target, s, opts);
    double rbar = kInf;
    if (target >= 0.0 && target < kInf) {
      try {
        rbar = critical_rate_high(target, s, r, opts).value;
      } catch (const std::exception& e) {
        std::fprintf(stderr, "note: upper critical rate at rate %g: %s\n", r, e.what());
      }
    }
    std::vector<double> row = {r, target, ts, rbar, rlow};
    for (int j = 0; j < gk; ++j) {
      double q0 = static_cast<double>(j) / (gk - 1);
      row.push_back(gfn(Marginal({q0, 1.0 - q0}), target));
    }
    t.rows[i] = std::move(row);
  });

  std::string out = o.out.empty() ? "thresholds.csv" : o.out;
  write_csv(out, t);
  echo_table(t, std::vector<char>(t.columns.size(), 1), o.bits);
  std::printf("wrote %s (%zu rates)\n", out.c_str(), t.rows.size());
  return 0;
}

int run_figure(Options o) {
  if (o.which != 1 && o.which != 2) throw std::runtime_error("--which must be 1 or 2");
  if (o.channel == "w1" && o.which == 2) o.channel = "w2";
  if (!o.t_given) o.t = o.which == 1 ? 0.05 : -0.05;
  Channel w = load_channel(o.channel);
  Setup s = matched(w, load_px(o.px, w.nx()));
  OptimizeOptions opts = make_opts(o);
  std::vector<double> rates = resolve_rates(o, s, 21);

  std::vector<FigureRow> rows = figure_curve(s, o.t, rates, opts);

  CsvTable t;
  t.header = base_header(o, "figure " + std::to_string(o.which), s);
  t.header.push_back("offset T: " + format_value(o.t));
  t.header.push_back("per-rate target: optimal error exponent at this offset");
  t.header.push_back("branch codes: 0 coupled-pair minimum, 1 low-metric minimum, 2 degenerate");
  t.columns = {"rate", "ee_opt", "el_opt", "el_psi", "el_lambda1", "el_lambda2", "branch"};
  for (const FigureRow& fr : rows)
    t.rows.push_back({fr.r, fr.ee_opt, fr.el_opt, fr.el_psi, fr.el_l1, fr.el_l2,
                      branch_code(fr.branch)});

  std::string out = o.out.empty() ? "figure" + std::to_string(o.which) + ".csv" : o.out;
  write_csv(out, t);
  std::string script = plot_script(
      basename_of(out), "list exponents, offset T = " + format_value(o.t), "rate (nats)",
      "exponent (nats)", 1,
      {{2, "error, optimal"},
       {3, "list, optimal"},
       {4, "list, joint-type threshold"},
       {5, "list, output-marginal threshold"},
       {6, "list, scaled ML"}});
  write_text_file(script_path_for(out), script);
  std::vector<char> conv(t.columns.size(), 1);
  conv[6] = 0;
  echo_table(t, conv, o.bits);
  std::printf("wrote %s and %s (%zu rates)\n", out.c_str(), script_path_for(out).c_str(),
              t.rows.size());
  return 0;
}

int run_simulate(const Options& o) {
  Channel w = load_channel(o.channel);
  Setup s = matched(w, load_px(o.px, w.nx()));
  OptimizeOptions opts = make_opts(o);
  if (o.n < 1) throw std::runtime_error("--n must be >= 1");
  int m = o.m > 0 ? static_cast<int>(o.m) : message_count(o.n, o.rate >= 0 ? o.rate : 0.0);
  if (o.m <= 0 && o.rate < 0)
    throw std::runtime_error("simulate needs --M or a nonnegative --rate");
  double rate_n = std::log(static_cast<double>(m)) / o.n;
  double r_syn = o.rate >= 0 ? o.rate : rate_n;
  double target = o.target_given ? o.target_ee
                                 : optimal_exponents(r_syn, o.t, s, opts).ee.value;

  double param = 0.0;
  DecoderRule rule = make_rule(o, s, r_syn, target, opts, &param);
  EnsembleEstimate est = o.trials > 0
                             ? monte_carlo_average_m(rule, s, o.n, m, o.trials, o.seed)
                             : exact_ensemble_average_m(rule, s, o.n, m);

  CsvTable t;
  t.header = base_header(o, "simulate", s);
  t.header.push_back("class: " + o.cls + ", synthesis rate: " + format_value(r_syn) +
                     ", target: " + target_desc(o));
  std::vector<int> comp = nearest_n_type(s.px, o.n);
  std::string comp_s;
  for (size_t i = 0; i < comp.size(); ++i)
    comp_s += (i ? "," : "") + std::to_string(comp[i]);
  t.header.push_back("composition: counts " + comp_s + " over n = " + std::to_string(o.n));
  t.header.push_back("mode: " + std::string(o.trials > 0 ? "monte carlo" : "exact") +
                     ", evaluations: " + std::to_string(est.evaluations));
  t.header.push_back("boundary events: " + std::to_string(est.boundary_events));
  t.header.push_back(
      "decoder codes: 0 likelihood ratio, 1 type based, 2 joint-type threshold, "
      "3 output-marginal threshold, 4 scaled ML");
  if (o.dominance) {
    DominanceReport rep = dominance_check(rule, s, o.n, m);
    t.header.push_back("dominance: " + std::string(rep.dominated ? "dominated" : "undominated") +
                       ", slack " + format_value(rep.slack) + ", threshold " +
                       format_value(rep.t_witness));
  }
  t.columns = {"n",         "M",         "rate",        "decoder_kind", "decoder_params",
               "p_e",       "list_size", "stderr_pe",   "stderr_list",  "seed"};
  t.rows.push_back({static_cast<double>(o.n), static_cast<double>(m), rate_n,
                    static_cast<double>(rule_code(rule.kind)), param, est.p_err, est.avg_wrong,
                    est.stderr_err, est.stderr_wrong, static_cast<double>(o.seed)});

  std::string out = o.out.empty() ? "simulate.csv" : o.out;
  write_csv(out, t);
  std::vector<char> conv(t.columns.size(), 0);
  conv[2] = 1;
  echo_table(t, conv, o.bits);
  std::printf("wrote %s\n", out.c_str());
  return 0;
}

int run_sweep(const Options& o) {
  Channel w = load_channel(o.channel);
  Setup s = matched(w, load_px(o.px, w.nx()));
  OptimizeOptions opts = make_opts(o);
  if (o.rate < 0) throw std::runtime_error("sweep needs a nonnegative --rate");
  int lo = 0, hi = 0;
  {
    size_t colon = o.lengths.find(':');
    try {
      if (colon == std::string::npos) {
        lo = hi = std::stoi(o.lengths);
      } else {
        lo = std::stoi(o.lengths.substr(0, colon));
        hi = std::stoi(o.lengths.substr(colon + 1));
      }
    } catch (const std::exception&) {
      throw std::runtime_error("--lengths wants lo:hi or a single blocklength");
    }
  }
  if (lo < 1 || hi < lo) throw std::runtime_error("--lengths wants 1 <= lo <= hi");
  std::vector<int> ns;
  for (int n = lo; n <= hi; ++n) ns.push_back(n);

  CsvTable t;
  t.header = base_header(o, "sweep", s);
  t.header.push_back("offset T: " + format_value(o.t) + ", class: " + o.cls);
  t.header.push_back("rate request: " + format_value(o.rate) +
                     "; per-n rate is log(M)/n after rounding M");
  t.header.push_back("e_hat compares the finite-length error rate against the "
                     "single-letter exponent at the realized rate");
  t.columns = {"n", "M", "rate", "p_e", "list_size", "e_hat", "ee_bound", "gap"};
  t.rows.assign(ns.size(), {});

  for (size_t i = 0; i < ns.size(); ++i) {
    int n = ns[i];
    int m = message_count(n, o.rate);
    double rate_n = std::log(static_cast<double>(m)) / n;
    double bound = optimal_exponents(rate_n, o.t, s, opts).ee.value;
    double target = o.target_given ? o.target_ee : bound;
    double param = 0.0;
    DecoderRule rule = make_rule(o, s, rate_n, target, opts, &param);
    EnsembleEstimate est = o.trials > 0
                               ? monte_carlo_average_m(rule, s, n, m, o.trials, o.seed)
                               : exact_ensemble_average_m(rule, s, n, m);
    double e_hat = est.p_err > 0 ? -std::log(est.p_err) / n : kInf;
    double gap = (bound == kInf || e_hat == kInf) ? kInf : bound - e_hat;
    t.rows[i] = {static_cast<double>(n), static_cast<double>(m), rate_n, est.p_err,
                 est.avg_wrong, e_hat, bound, gap};
  }

  std::string out = o.out.empty() ? "sweep.csv" : o.out;
  write_csv(out, t);
  std::vector<char> conv = {0, 0, 1, 0, 0, 1, 1, 1};
  echo_table(t, conv, o.bits);
  std::printf("wrote %s (%zu blocklengths)\n", out.c_str(), t.rows.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"exact erasure/list decoding exponents and finite-length simulation"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file; command-line flags override");

  app.add_option("--channel", o.channel, "w1, w2, bsc:<p>, or a matrix file")
      ->capture_default_str();
  app.add_option("--px", o.px, "'uniform' or a one-row probability file")
      ->capture_default_str();
  auto* opt_t = app.add_option("--T", o.t, "acceptance offset in nats");
  auto* opt_e = app.add_option("--target-ee", o.target_ee,
                               "fixed error-exponent target; default derives it per rate");
  app.add_option("--rates", o.rates, "lo:hi:count, or a single rate");
  app.add_option("--points", o.points, "rate grid size when --rates is absent")
      ->capture_default_str();
  app.add_option("--class", o.cls,
                 "optimal|psi|lambda1|lambda2 (exponents), plus forney|typebased (simulate)")
      ->capture_default_str();
  app.add_option("--delta0", o.delta0, "coarse search grid step")->capture_default_str();
  app.add_option("--delta1", o.delta1, "refinement resolution")->capture_default_str();
  app.add_option("--seed", o.seed, "monte carlo seed")->capture_default_str();
  app.add_option("--trials", o.trials, "monte carlo trials; 0 = exact enumeration")
      ->capture_default_str();
  app.add_option("--out", o.out, "output CSV path (default depends on the command)");
  app.add_flag("--bits", o.bits, "display rates/exponents in bits (files stay in nats)");

  auto* c_exp = app.add_subcommand("exponents", "optimal exponent sweep over rates");
  auto* c_thr = app.add_subcommand("thresholds", "optimal threshold synthesis per rate");
  auto* c_fig = app.add_subcommand("figure", "regenerate a full comparison curve");
  auto* c_sim = app.add_subcommand("simulate", "finite-blocklength ensemble averages");
  auto* c_swp = app.add_subcommand("sweep", "exact error trend across blocklengths");
  for (CLI::App* sub : {c_exp, c_thr, c_fig, c_sim, c_swp}) sub->fallthrough();

  c_fig->add_option("--which", o.which, "1: symmetric preset, 2: asymmetric preset")
      ->capture_default_str();
  c_thr->add_option("--g-grid", o.g_grid, "output-marginal sample count (binary outputs)")
      ->capture_default_str();
  for (CLI::App* sub : {c_sim, c_swp}) {
    sub->add_option("--n", o.n, "blocklength")->capture_default_str();
    sub->add_option("--rate", o.rate, "target rate in nats; M = round(exp(n rate))");
  }
  c_sim->add_option("--M", o.m, "message count override");
  c_sim->add_flag("--dominance", o.dominance,
                  "check the rule against the likelihood-ratio threshold family");
  c_swp->add_option("--lengths", o.lengths, "blocklength range lo:hi")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  o.t_given = opt_t->count() > 0;
  o.target_given = opt_e->count() > 0;

  try {
    if (c_exp->parsed()) return run_exponents(o);
    if (c_thr->parsed()) return run_thresholds(o);
    if (c_fig->parsed()) return run_figure(o);
    if (c_sim->parsed()) return run_simulate(o);
    if (c_swp->parsed()) return run_sweep(o);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
