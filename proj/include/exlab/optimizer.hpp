#pragma once

// Grid + coordinate-refinement minimization over joint types. Objectives are
// arbitrary callables (may return +inf to veto a point); constraint sets are
// generally nonconvex (information superlevel sets), which is why this is an
// exhaustive coarse scan followed by local refinement rather than a convex
// solver. Deterministic: same inputs give bit-identical results.

#include <functional>
#include <optional>
#include <vector>

#include "exlab/parallel.hpp"
#include "exlab/typespace.hpp"

namespace exlab {

struct OptimizeOptions {
  double delta0 = 1.0 / 50;  // coarse grid resolution per kernel coordinate
  double delta1 = 1e-5;      // refinement stops once brackets shrink below this
  int refine_top_k = 6;      // coarse candidates kept for refinement
  int zoom_points = 13;      // probes per 1-D zoom stage (endpoints included)
  int max_passes = 40;       // coordinate-descent passes per candidate
  double eps_feas = 1e-6;    // inequality slack when filtering feasibility
  bool boundary_polish = true;  // bisect onto binding constraint surfaces
};

// Declarative constraint kinds. In pair problems, f/I kinds apply to the
// second component Q and d_le applies to the first component Q-tilde; the
// pair is always coupled by equal output marginals (structurally, via the
// slice parameterization, to tolerance 1e-9).
struct Constraint {
  enum class Kind { FGe, FLe, FPairGe, IGe, ILe, DLe, MarginalEq };
  Kind kind{};
  double bound = 0.0;

  static Constraint f_ge(double b) { return {Kind::FGe, b}; }
  static Constraint f_le(double b) { return {Kind::FLe, b}; }
  // f(Q) + c >= f(Q-tilde)
  static Constraint f_pair_ge(double c) { return {Kind::FPairGe, c}; }
  static Constraint i_ge(double b) { return {Kind::IGe, b}; }
  static Constraint i_le(double b) { return {Kind::ILe, b}; }
  static Constraint d_le(double b) { return {Kind::DLe, b}; }
  static Constraint marginal_eq() { return {Kind::MarginalEq, 0.0}; }
};

// Lazy per-probe functional cache so objectives and constraints each compute
// f/I/D at most once per joint type.
class Eval {
 public:
  Eval(const JointType& jt, const Setup& s) : jt_(&jt), s_(&s) {}
  double f() const { ensure(); return vals_.f; }
  double mi() const { ensure(); return vals_.mi; }
  double div() const { ensure(); return vals_.div; }
  const JointType& jt() const { return *jt_; }

 private:
  void ensure() const {
    if (!ready_) {
      vals_ = evaluate_functionals(*jt_, s_->w, s_->metric);
      ready_ = true;
    }
  }
  const JointType* jt_;
  const Setup* s_;
  mutable Functionals vals_{};
  mutable bool ready_ = false;
};

using SingleObjective = std::function<double(const Eval&)>;
using PairObjective = std::function<double(const Eval& qtilde, const Eval& q)>;
// Custom inequality constraints, expressed as violation functions: feasible
// iff violation <= eps_feas. May return +/-inf.
using SingleViolation = std::function<double(const Eval&)>;
using PairViolation = std::function<double(const Eval& qtilde, const Eval& q)>;

struct MinResult {
  double value = kInf;
  bool feasible = false;
  std::optional<JointType> q;        // single problems; pair problems: second component
  std::optional<JointType> q_tilde;  // pair problems: first component
  double gap_estimate = 0.0;         // upper estimate of the residual refinement error
};

class Minimizer {
 public:
  explicit Minimizer(Setup setup, OptimizeOptions opts = {});

  // Minimize over kernels Q_{Y|X} with the input distribution fixed. When
  // fixed_marginal is set, the search is restricted to the affine slice
  // {Q : Q_Y = fixed_marginal}.
  MinResult single(const SingleObjective& objective,
                   const std::vector<Constraint>& constraints,
                   const std::optional<Marginal>& fixed_marginal = {},
                   const std::vector<SingleViolation>& custom = {}) const;

  // Minimize over coupled pairs (Q-tilde, Q) sharing one output marginal.
  // constraints must include marginal_eq.
  MinResult pair(const PairObjective& objective,
                 const std::vector<Constraint>& constraints,
                 const std::vector<PairViolation>& custom = {}) const;

  const Setup& setup() const { return setup_; }
  const OptimizeOptions& options() const { return opts_; }

 private:
  Setup setup_;
  OptimizeOptions opts_;
};

MinResult minimize_single(const Setup& s, const SingleObjective& objective,
                          const std::vector<Constraint>& constraints,
                          const std::optional<Marginal>& fixed_marginal = {},
                          const std::vector<SingleViolation>& custom = {},
                          const OptimizeOptions& opts = {});

MinResult minimize_pair(const Setup& s, const PairObjective& objective,
                        const std::vector<Constraint>& constraints,
                        const std::vector<PairViolation>& custom = {},
                        const OptimizeOptions& opts = {});

// Solve one parameterized family over a grid; results keep grid order and do
// not depend on the worker count.
template <class P>
std::vector<MinResult> sweep(const std::function<MinResult(const P&)>& family,
                             const std::vector<P>& grid) {
  std::vector<MinResult> out(grid.size());
  parallel_for(grid.size(), [&](size_t i) { out[i] = family(grid[i]); });
  return out;
}

}  // namespace exlab
