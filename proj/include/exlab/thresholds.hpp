#pragma once

// Threshold synthesis: given an error-exponent target, build the pointwise
// largest acceptance thresholds that still meet it, and evaluate what each
// decoder family gains from them (best list exponents, critical rates).

#include <cstddef>
#include <memory>
#include <vector>

#include "exlab/exponents.hpp"
#include "exlab/optimizer.hpp"
#include "exlab/typespace.hpp"

namespace exlab {

// Smallest metric value among types on the output-marginal slice whose
// divergence stays within budget. +inf when budget < 0 (empty feasible set),
// -inf when the metric is unbounded below there. Non-increasing in the
// budget; any type with divergence <= budget has metric >= this value.
double g_star(const Marginal& qy, double budget, const Setup& s,
              const OptimizeOptions& opts = {});

// Joint-type version: the budget shrinks by the information overshoot above
// the rate, so high-information types face a stricter (larger) threshold.
double h_star(const JointType& q, double r, double budget, const Setup& s,
              const OptimizeOptions& opts = {});

// Memoizing evaluator for the synthesized thresholds. Queries are snapped to
// a 1e-4 lattice in both the marginal and the budget and solved once per
// lattice point, so the optimizer can afford to call these inside scans. Use
// the free g_star/h_star when the exact argument matters.
class GStarFn {
 public:
  explicit GStarFn(Setup s, OptimizeOptions opts = {});

  double operator()(const Marginal& qy, double budget) const;
  double h_star(const JointType& q, double r, double budget) const;

  // Threshold closures for exponent formulas and simulated decoders. They
  // share this object's cache and keep it alive.
  JointThreshold as_h_star(double r, double budget) const;
  MarginalThreshold as_g_star(double budget) const;

  std::size_t cache_size() const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

// Largest metric offset t such that t + f(Q) stays below the synthesized
// joint threshold for every type Q, i.e. the best scaled-metric rule that
// still meets the error target. +inf when the budget is negative.
double t_star(double r, double budget, const Setup& s, const OptimizeOptions& opts = {});

enum class DecoderClass { Lambda1, Psi, Lambda2 };

// Best list exponent the family reaches at rate r once its threshold is
// synthesized for error-exponent target e_target.
ExponentResult optimal_list_exponent(DecoderClass cls, double r, double e_target,
                                     const Setup& s, const OptimizeOptions& opts = {});

struct CriticalRate {
  double value;        // equals the information of the witness
  JointType witness;   // divergence-side minimizer at the fixed point
};

// Fixed point r = I(q_tilde*) of the output-only list solve at target
// e_target: at and above it the output-only family matches the joint one.
// Throws std::runtime_error (with the iterate trace) if the iteration does
// not settle within 1e-4.
CriticalRate critical_rate_high(double e_target, const Setup& s, double r0 = 0.0,
                                const OptimizeOptions& opts = {});

// Information of the rate-free list minimizer at metric offset t: at and
// below it the scaled-metric family matches the unconstrained optimum.
CriticalRate critical_rate_low(double t, const Setup& s, const OptimizeOptions& opts = {});

// Output-only threshold for a family of channels sharing one input
// distribution: the pointwise minimum over members preserves each member's
// error guarantee simultaneously.
double compound_g_star(const Marginal& qy, double budget, const std::vector<Channel>& family,
                       const InputDistribution& px, const OptimizeOptions& opts = {});

}  // namespace exlab
