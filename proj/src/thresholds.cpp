#include "exlab/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace exlab {

namespace {

// Lattice pitch for memoized queries, in probability and in nats. Snapping
// feeds straight into synthesized offsets, so the pitch has to sit well
// under the acceptance tolerances.
constexpr double kLattice = 1e-5;
constexpr long long kBudgetTop = std::numeric_limits<long long>::max();

// One-shot solves behind the free functions. Linear objective, so the
// minimum sits on the budget boundary; the tight bracket plus boundary
// polish keeps the value good to ~1e-8.
OptimizeOptions exact_opts(OptimizeOptions o) {
  o.delta1 = std::min(o.delta1, 1e-9);
  return o;
}

// Memoized solves run inside optimizer scans, so trade accuracy for speed.
OptimizeOptions memo_opts(OptimizeOptions o) {
  o.delta1 = std::min(o.delta1, 1e-6);
  o.refine_top_k = std::min(o.refine_top_k, 2);
  o.zoom_points = std::min(o.zoom_points, 9);
  o.max_passes = std::min(o.max_passes, 12);
  return o;
}

double solve_g(const Setup& s, const OptimizeOptions& o, const Marginal& qy, double budget) {
  if (budget < 0.0) return kInf;
  std::vector<Constraint> cons;
  if (budget != kInf) cons.push_back(Constraint::d_le(budget));
  MinResult mr = minimize_single(
      s, [](const Eval& e) { return e.f(); }, cons, qy, {}, o);
  return mr.feasible ? mr.value : kInf;
}

void check_rate_arg(double r, const char* who) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument(std::string(who) + ": rate must be finite and nonnegative");
}

}  // namespace

double g_star(const Marginal& qy, double budget, const Setup& s, const OptimizeOptions& opts) {
  return solve_g(s, exact_opts(opts), qy, budget);
}

double h_star(const JointType& q, double r, double budget, const Setup& s,
              const OptimizeOptions& opts) {
  check_rate_arg(r, "h_star");
  if (budget == kInf) return g_star(q.marginal(), kInf, s, opts);
  return g_star(q.marginal(), budget - pos_part(mutual_information(q) - r), s, opts);
}

struct GStarFn::Impl {
  Setup setup;
  OptimizeOptions opts;
  mutable std::mutex mu;
  mutable std::map<std::vector<long long>, double> cache;

  double at(const Marginal& qy, double budget) const {
    if (budget < 0.0) return kInf;
    std::vector<long long> key;
    key.reserve(static_cast<size_t>(qy.size()) + 1);
    for (int y = 0; y < qy.size(); ++y) key.push_back(std::llround(qy(y) / kLattice));
    key.push_back(budget == kInf ? kBudgetTop : std::llround(budget / kLattice));
    {
      std::lock_guard<std::mutex> lk(mu);
      auto it = cache.find(key);
      if (it != cache.end()) return it->second;
    }
    // Solve at the lattice point itself so every query landing in this cell
    // sees one consistent value.
    double b = budget == kInf ? kInf : static_cast<double>(key.back()) * kLattice;
    std::vector<double> probs(static_cast<size_t>(qy.size()));
    double tot = 0.0;
    for (size_t y = 0; y < probs.size(); ++y) {
      probs[y] = std::max(0.0, static_cast<double>(key[y]) * kLattice);
      tot += probs[y];
    }
    for (double& p : probs) p /= tot;
    double v = solve_g(setup, opts, Marginal(std::move(probs)), b);
    std::lock_guard<std::mutex> lk(mu);
    cache.emplace(std::move(key), v);
    return v;
  }
};

GStarFn::GStarFn(Setup s, OptimizeOptions opts) : impl_(std::make_shared<Impl>()) {
  impl_->setup = std::move(s);
  impl_->opts = memo_opts(opts);
}

double GStarFn::operator()(const Marginal& qy, double budget) const {
  return impl_->at(qy, budget);
}

double GStarFn::h_star(const JointType& q, double r, double budget) const {
  if (budget == kInf) return impl_->at(q.marginal(), kInf);
  return impl_->at(q.marginal(), budget - pos_part(mutual_information(q) - r));
}

JointThreshold GStarFn::as_h_star(double r, double budget) const {
  auto impl = impl_;
  return [impl, r, budget](const JointType& q) {
    if (budget == kInf) return impl->at(q.marginal(), kInf);
    return impl->at(q.marginal(), budget - pos_part(mutual_information(q) - r));
  };
}

MarginalThreshold GStarFn::as_g_star(double budget) const {
  auto impl = impl_;
  return [impl, budget](const Marginal& qy) { return impl->at(qy, budget); };
}

std::size_t GStarFn::cache_size() const {
  std::lock_guard<std::mutex> lk(impl_->mu);
  return impl_->cache.size();
}

double t_star(double r, double budget, const Setup& s, const OptimizeOptions& opts) {
  check_rate_arg(r, "t_star");
  if (budget < 0.0) return kInf;
  GStarFn gfn(s, opts);
  MinResult mr = minimize_single(
      s,
      [&](const Eval& e) {
        double hs = gfn.h_star(e.jt(), r, budget);
        // Types whose threshold is infinite, or whose metric is -inf, never
        // cap the offset.
        if (hs == kInf) return kInf;
        if (hs == -kInf) return -kInf;
        double fv = e.f();
        return fv == -kInf ? kInf : hs - fv;
      },
      {}, {}, {}, opts);
  return mr.feasible ? mr.value : kInf;
}

ExponentResult optimal_list_exponent(DecoderClass cls, double r, double e_target,
                                     const Setup& s, const OptimizeOptions& opts) {
  check_rate_arg(r, "optimal_list_exponent");
  switch (cls) {
    case DecoderClass::Lambda1: {
      GStarFn gfn(s, opts);
      return lambda1_exponents(r, gfn.as_g_star(e_target), s, opts).el;
    }
    case DecoderClass::Psi: {
      GStarFn gfn(s, opts);
      return psi_list_exponent(r, gfn.as_h_star(r, e_target), s, opts);
    }
    case DecoderClass::Lambda2: {
      double t = t_star(r, e_target, s, opts);
      if (t == kInf) return {};  // offset unbounded: the rule never lists
      ClassExponents ce = lambda2_exponents(r, t, s, opts);
      return ce.el;
    }
  }
  throw std::logic_error("optimal_list_exponent: bad class");
}

CriticalRate critical_rate_high(double e_target, const Setup& s, double r0,
                                const OptimizeOptions& opts) {
  check_rate_arg(r0, "critical_rate_high");
  double rk = r0;
  std::vector<double> trace{rk};
  for (int it = 0; it < 100; ++it) {
    ExponentResult res = optimal_list_exponent(DecoderClass::Lambda1, rk, e_target, s, opts);
    if (!res.feasible || !res.q_tilde)
      throw std::runtime_error("critical_rate_high: list solve infeasible at r=" +
                               std::to_string(rk));
    double rn = mutual_information(*res.q_tilde);
    trace.push_back(rn);
    if (std::abs(rn - rk) <= 1e-4) return {rn, *res.q_tilde};
    rk = rn;
  }
  std::string msg = "critical_rate_high: no fixed point; iterates:";
  for (double v : trace) msg += " " + std::to_string(v);
  throw std::runtime_error(msg);
}

CriticalRate critical_rate_low(double t, const Setup& s, const OptimizeOptions& opts) {
  MinResult mr = minimize_pair(
      s,
      [](const Eval& qt, const Eval& q) {
        double d = qt.div();
        return d == kInf ? kInf : d + q.mi();
      },
      {Constraint::marginal_eq(), Constraint::f_pair_ge(t)}, {}, opts);
  if (!mr.feasible || !mr.q_tilde)
    throw std::runtime_error("critical_rate_low: rate-free solve infeasible at t=" +
                             std::to_string(t));
  return {mutual_information(*mr.q_tilde), *mr.q_tilde};
}

double compound_g_star(const Marginal& qy, double budget, const std::vector<Channel>& family,
                       const InputDistribution& px, const OptimizeOptions& opts) {
  if (family.empty()) throw std::invalid_argument("compound_g_star: empty family");
  double best = kInf;
  for (const Channel& w : family) best = std::min(best, g_star(qy, budget, matched(w, px), opts));
  return best;
}

}  // namespace exlab
