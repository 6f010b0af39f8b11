#include "exlab/exponents.hpp"

#include <cmath>
#include <stdexcept>

namespace exlab {
namespace {

// a - b, never NaN (same convention as the optimizer's constraint algebra).
double diff_inf(double a, double b) {
  if (a == -kInf) return -kInf;
  if (b == -kInf) return kInf;
  if (a == kInf) return kInf;
  if (b == kInf) return -kInf;
  return a - b;
}

void check_rate(double r) {
  if (!(r >= 0.0) || r == kInf) throw std::invalid_argument("exponents: rate must be finite, >= 0");
}

// Exponents that are nonnegative by construction get the last few ulps of
// optimizer noise clamped away; anything worse is a real defect and stays
// visible.
double clamp_nonneg(double v) { return (v < 0.0 && v > -1e-9) ? 0.0 : v; }

// Nested 1-D slice problems dominate the cost of the outer scans; a slightly
// lighter refinement there does not move results at the grid tolerance.
OptimizeOptions inner_opts(const OptimizeOptions& o) {
  OptimizeOptions i = o;
  i.refine_top_k = 2;
  i.zoom_points = 9;
  i.max_passes = 12;
  return i;
}

ExponentResult from_pair(MinResult&& mr, double shift) {
  ExponentResult out;
  out.feasible = mr.feasible;
  out.gap_estimate = mr.gap_estimate;
  if (mr.feasible) {
    out.value = mr.value == -kInf ? -kInf : mr.value + shift;
    out.q_tilde = std::move(mr.q_tilde);
    out.q = std::move(mr.q);
  }
  return out;
}

}  // namespace

ExponentResult e_a(double r, double t, const Setup& s, const OptimizeOptions& opts) {
  check_rate(r);
  Minimizer m(s, opts);
  MinResult mr = m.pair(
      [](const Eval& qt, const Eval& q) { return qt.div() + q.mi(); },
      {Constraint::marginal_eq(), Constraint::f_pair_ge(t), Constraint::i_ge(r)});
  ExponentResult out = from_pair(std::move(mr), -r);
  out.branch = Branch::A;
  if (out.feasible) out.value = clamp_nonneg(out.value);
  return out;
}

ExponentResult e_b(double r, double t, const Setup& s, const OptimizeOptions& opts) {
  check_rate(r);
  Minimizer m(s, opts);
  Minimizer mi(s, inner_opts(opts));
  // Largest metric spread f(Q) - I(Q) reachable on the slice at rates <= r.
  auto spread = [&](const Marginal& qy) -> double {
    MinResult inner = mi.single([](const Eval& e) { return diff_inf(e.mi(), e.f()); },
                                {Constraint::i_le(r)}, qy);
    if (!inner.feasible) return -kInf;
    return inner.value == -kInf ? kInf : -inner.value;
  };
  std::vector<SingleViolation> membership;
  membership.push_back([&](const Eval& e) {
    double cap = spread(e.jt().marginal());
    double rhs = cap == -kInf ? -kInf : (cap == kInf ? kInf : r + t + cap);
    return diff_inf(e.f(), rhs);
  });
  MinResult mr = m.single([](const Eval& e) { return e.div(); }, {}, {}, membership);
  ExponentResult out;
  out.feasible = mr.feasible;
  out.gap_estimate = mr.gap_estimate;
  out.branch = Branch::B;
  if (mr.feasible) {
    out.value = clamp_nonneg(mr.value);
    out.q_tilde = std::move(mr.q);
  }
  return out;
}

OptimalExponents optimal_exponents(double r, double t, const Setup& s,
                                   const OptimizeOptions& opts) {
  ExponentResult a = e_a(r, t, s, opts);
  ExponentResult b = e_b(r, t, s, opts);
  // Ties keep the coupled-pair branch, which carries both witnesses.
  ExponentResult& win = (a.value <= b.value) ? a : b;
  OptimalExponents out;
  out.ee = win;
  out.el = win;
  if (out.el.feasible && out.el.value != kInf) out.el.value = out.ee.value + t;
  out.el.branch = out.ee.branch;
  return out;
}

ExponentResult psi_error_exponent(double r, const JointThreshold& h, const Setup& s,
                                  const OptimizeOptions& opts) {
  check_rate(r);
  if (!h) throw std::invalid_argument("psi exponent: empty threshold");
  ExponentResult out =
      threshold_error_exponent(r, s, opts, [&](const Eval& q) { return h(q.jt()); });
  if (out.feasible) out.value = clamp_nonneg(out.value);
  return out;
}

ExponentResult threshold_list_exponent(double r, const Setup& s, const OptimizeOptions& opts,
                                       const std::function<double(const Eval&)>& accept_bound) {
  Minimizer outer(s, opts);
  Minimizer inner(s, inner_opts(opts));
  auto inner_info = [&](const Marginal& qy, double bound) -> double {
    if (bound == kInf) return kInf;
    MinResult mr = inner.single([](const Eval& e) { return e.mi(); },
                                {Constraint::f_ge(bound)}, qy);
    return mr.feasible ? mr.value : kInf;
  };
  SingleObjective obj = [&](const Eval& qt) -> double {
    double d = qt.div();
    if (d == kInf) return kInf;
    double info = inner_info(qt.jt().marginal(), accept_bound(qt));
    return info == kInf ? kInf : d + info;
  };
  MinResult mr = outer.single(obj, {});
  ExponentResult out;
  out.feasible = mr.feasible;
  out.gap_estimate = mr.gap_estimate;
  if (!mr.feasible) return out;
  out.value = mr.value == -kInf ? -kInf : mr.value - r;
  out.q_tilde = std::move(mr.q);
  if (out.q_tilde) {
    // Reattach the inner witness for the reported pair.
    MinResult iw = inner.single([](const Eval& e) { return e.mi(); },
                                {Constraint::f_ge(accept_bound(Eval(*out.q_tilde, s)))},
                                out.q_tilde->marginal());
    if (iw.feasible) out.q = std::move(iw.q);
  }
  return out;
}

ExponentResult threshold_error_exponent(double r, const Setup& s, const OptimizeOptions& opts,
                                        const std::function<double(const Eval&)>& accept_bound) {
  Minimizer outer(s, opts);
  Minimizer inner(s, inner_opts(opts));
  auto inner_div = [&](const Marginal& qy, double bound) -> double {
    MinResult mr = inner.single([](const Eval& e) { return e.div(); },
                                {Constraint::f_le(bound)}, qy);
    return mr.feasible ? mr.value : kInf;
  };
  SingleObjective obj = [&](const Eval& q) -> double {
    double d = inner_div(q.jt().marginal(), accept_bound(q));
    return d == kInf ? kInf : d + pos_part(q.mi() - r);
  };
  MinResult mr = outer.single(obj, {});
  ExponentResult out;
  out.feasible = mr.feasible;
  out.gap_estimate = mr.gap_estimate;
  if (!mr.feasible) return out;
  out.value = mr.value;
  out.q = std::move(mr.q);
  if (out.q && out.value < kInf) {
    // Reattach the inner witness for the reported pair.
    MinResult iw = inner.single([](const Eval& e) { return e.div(); },
                                {Constraint::f_le(accept_bound(Eval(*out.q, s)))},
                                out.q->marginal());
    if (iw.feasible) out.q_tilde = std::move(iw.q);
  }
  return out;
}

ExponentResult psi_list_exponent(double r, const JointThreshold& h, const Setup& s,
                                 const OptimizeOptions& opts) {
  check_rate(r);
  if (!h) throw std::invalid_argument("psi exponent: empty threshold");
  Minimizer inner(s, inner_opts(opts));
  // Largest threshold among low-information types on the slice: every
  // accepted competitor must clear it.
  auto big_v = [&](const Marginal& qy) -> double {
    MinResult mr = inner.single([&](const Eval& e) { return -h(e.jt()); },
                                {Constraint::i_le(r)}, qy);
    if (!mr.feasible) return -kInf;
    return mr.value == -kInf ? kInf : -mr.value;
  };
  return threshold_list_exponent(r, s, opts, [&](const Eval& qt) {
    double v = big_v(qt.jt().marginal());
    double own = h(qt.jt());
    return v > own ? v : own;
  });
}

ClassExponents lambda1_exponents(double r, const MarginalThreshold& g, const Setup& s,
                                 const OptimizeOptions& opts) {
  check_rate(r);
  if (!g) throw std::invalid_argument("lambda1 exponents: empty threshold");
  Minimizer m(s, opts);
  ClassExponents out;

  std::vector<SingleViolation> erased;
  erased.push_back([&](const Eval& e) {
    // True message erased: its metric stays at or under the output threshold.
    return diff_inf(e.f(), g(e.jt().marginal()));
  });
  MinResult ee = m.single([](const Eval& e) { return e.div(); }, {}, {}, erased);
  out.ee.feasible = ee.feasible;
  out.ee.gap_estimate = ee.gap_estimate;
  if (ee.feasible) {
    out.ee.value = clamp_nonneg(ee.value);
    out.ee.q_tilde = std::move(ee.q);
  }

  // Listed wrong message: same nested shape as the other classes, with the
  // acceptance bound read off the shared output marginal.
  out.el = threshold_list_exponent(r, s, opts,
                                   [&](const Eval& qt) { return g(qt.jt().marginal()); });
  return out;
}

ClassExponents lambda2_exponents(double r, double t, const Setup& s,
                                 const OptimizeOptions& opts) {
  check_rate(r);
  Minimizer inner(s, inner_opts(opts));
  ClassExponents out;

  out.ee = threshold_error_exponent(r, s, opts, [&](const Eval& q) {
    double own = q.f();
    if (own == -kInf) return -kInf;
    return own == kInf ? kInf : t + own;
  });
  if (out.ee.feasible) out.ee.value = clamp_nonneg(out.ee.value);

  // Largest metric among low-information types on the slice.
  auto vbar = [&](const Marginal& qy) -> double {
    MinResult mr = inner.single([](const Eval& e) { return e.f() == -kInf ? kInf : -e.f(); },
                                {Constraint::i_le(r)}, qy);
    if (!mr.feasible) return -kInf;
    return mr.value == -kInf ? kInf : -mr.value;
  };
  out.el = threshold_list_exponent(r, s, opts, [&](const Eval& qt) {
    double v = vbar(qt.jt().marginal());
    double own = qt.f();
    double base = v > own ? v : own;
    if (base == kInf) return kInf;
    if (base == -kInf) return -kInf;
    return t + base;
  });
  return out;
}

ClassExponents class_exponents(const ThresholdSpec& spec, double r, const Setup& s,
                               const OptimizeOptions& opts) {
  switch (spec.kind) {
    case ThresholdSpec::Kind::Optimal: {
      OptimalExponents oe = optimal_exponents(r, spec.t, s, opts);
      return ClassExponents{oe.ee, oe.el};
    }
    case ThresholdSpec::Kind::GeneralH:
      return ClassExponents{psi_error_exponent(r, spec.h, s, opts),
                            psi_list_exponent(r, spec.h, s, opts)};
    case ThresholdSpec::Kind::OutputOnlyG:
      return lambda1_exponents(r, spec.g, s, opts);
    case ThresholdSpec::Kind::ScaledMl:
      return lambda2_exponents(r, spec.t, s, opts);
  }
  throw std::logic_error("class_exponents: bad threshold kind");
}

}  // namespace exlab
