#pragma once

// Random-coding exponents for erasure/list decoding over a DMC with a
// fixed-composition ensemble. Error exponents track P(true message not on the
// list); list exponents track the expected number of wrong messages on the
// list. Four decoder families: the likelihood-ratio threshold family
// (optimal), thresholds on the full joint type (general h), thresholds on the
// output composition only (g), and scaled maximum-likelihood (scalar T).

#include <functional>
#include <optional>

#include "exlab/optimizer.hpp"
#include "exlab/typespace.hpp"

namespace exlab {

// Threshold callables return +inf outside their domain; a +inf threshold
// blocks acceptance wherever it appears as a competitor.
using JointThreshold = std::function<double(const JointType&)>;
using MarginalThreshold = std::function<double(const Marginal&)>;

struct ThresholdSpec {
  enum class Kind { Optimal, GeneralH, OutputOnlyG, ScaledMl };
  Kind kind = Kind::Optimal;
  double t = 0.0;
  JointThreshold h;
  MarginalThreshold g;

  static ThresholdSpec optimal(double t) { return {Kind::Optimal, t, {}, {}}; }
  static ThresholdSpec general(JointThreshold h) { return {Kind::GeneralH, 0.0, std::move(h), {}}; }
  static ThresholdSpec output_only(MarginalThreshold g) {
    return {Kind::OutputOnlyG, 0.0, {}, std::move(g)};
  }
  static ThresholdSpec scaled_ml(double t) { return {Kind::ScaledMl, t, {}, {}}; }
};

enum class Branch { A, B, Single };

struct ExponentResult {
  double value = kInf;
  bool feasible = false;
  std::optional<JointType> q_tilde;  // divergence-side witness
  std::optional<JointType> q;        // information-side witness
  Branch branch = Branch::Single;
  double gap_estimate = 0.0;
};

// Dominant-pair branch of the optimal-family error exponent: coupled types
// with the information constraint active.
ExponentResult e_a(double r, double t, const Setup& s, const OptimizeOptions& opts = {});

// Low-metric branch: smallest divergence among types whose metric falls under
// the achievable spread at rate r.
ExponentResult e_b(double r, double t, const Setup& s, const OptimizeOptions& opts = {});

struct OptimalExponents {
  ExponentResult ee;
  ExponentResult el;  // el.value == ee.value + t by construction
};

OptimalExponents optimal_exponents(double r, double t, const Setup& s,
                                   const OptimizeOptions& opts = {});

// General joint-type threshold decoder.
ExponentResult psi_error_exponent(double r, const JointThreshold& h, const Setup& s,
                                  const OptimizeOptions& opts = {});
ExponentResult psi_list_exponent(double r, const JointThreshold& h, const Setup& s,
                                 const OptimizeOptions& opts = {});

struct ClassExponents {
  ExponentResult ee;
  ExponentResult el;
};

// Output-marginal threshold decoder. The error exponent does not depend on r.
ClassExponents lambda1_exponents(double r, const MarginalThreshold& g, const Setup& s,
                                 const OptimizeOptions& opts = {});

// Scaled maximum-likelihood decoder with offset t.
ClassExponents lambda2_exponents(double r, double t, const Setup& s,
                                 const OptimizeOptions& opts = {});

// Dispatcher over ThresholdSpec kinds.
ClassExponents class_exponents(const ThresholdSpec& spec, double r, const Setup& s,
                               const OptimizeOptions& opts = {});

// Common core of every list exponent: for each divergence-side type, the
// cheapest-information type on its slice whose metric clears accept_bound,
// minus the rate. accept_bound sees the divergence-side type and may return
// +/-inf.
ExponentResult threshold_list_exponent(double r, const Setup& s, const OptimizeOptions& opts,
                                       const std::function<double(const Eval&)>& accept_bound);

// Error-side counterpart: for each competitor type, its information excess
// over the rate plus the cheapest divergence on its slice among types whose
// metric stays at or under accept_bound. Splitting the pair this way keeps
// the metric wall inside a fixed slice, where it is easy to track.
ExponentResult threshold_error_exponent(double r, const Setup& s, const OptimizeOptions& opts,
                                        const std::function<double(const Eval&)>& accept_bound);

}  // namespace exlab
