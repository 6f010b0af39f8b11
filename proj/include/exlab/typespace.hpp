#pragma once

// Core value types for discrete memoryless channels and joint types, plus the
// three functionals every exponent computation is built from. All quantities
// are in nats. +inf/-inf are legal sentinel values (infeasible minima,
// divergence off the channel support, log of zero likelihood); arithmetic in
// this library never produces NaN.

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace exlab {

using Nats = double;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// [t]_+ = max{t, 0}
inline double pos_part(double t) { return t > 0.0 ? t : 0.0; }

// Neumaier compensated summation. Used wherever reproducibility or tight
// identities (1e-10 scale) depend on the accumulation error, and in the
// simulator so totals are insensitive to accumulation order.
class NeumaierSum {
 public:
  void add(double x) {
    double t = s_ + x;
    if (std::abs(s_) >= std::abs(x))
      c_ += (s_ - t) + x;
    else
      c_ += (x - t) + s_;
    s_ = t;
  }
  double value() const { return s_ + c_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

struct Alphabet {
  int size = 0;
  std::vector<std::string> labels;  // empty, or one label per symbol

  void validate(int min_size) const;
};

// Dense row-major matrix, just big enough for |X| x |Y| tables.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0);
  Matrix(int rows, int cols, std::vector<double> data);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& operator()(int r, int c) { return a_[static_cast<size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return a_[static_cast<size_t>(r) * cols_ + c]; }
  const std::vector<double>& data() const { return a_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> a_;
};

// Row-stochastic transition matrix W(y|x). Rows must sum to 1 within 1e-12,
// entries in [0, 1].
class Channel {
 public:
  Channel() = default;
  explicit Channel(Matrix w);

  int nx() const { return w_.rows(); }
  int ny() const { return w_.cols(); }
  double operator()(int x, int y) const { return w_(x, y); }
  const Matrix& matrix() const { return w_; }

 private:
  Matrix w_;
};

// Probability vector over the input alphabet; sums to 1 within 1e-12.
class InputDistribution {
 public:
  InputDistribution() = default;
  explicit InputDistribution(std::vector<double> p);

  int size() const { return static_cast<int>(p_.size()); }
  double operator()(int x) const { return p_[x]; }
  const std::vector<double>& probs() const { return p_; }

 private:
  std::vector<double> p_;
};

// Probability vector over the output alphabet; sums to 1 within 1e-12.
class Marginal {
 public:
  Marginal() = default;
  explicit Marginal(std::vector<double> q);

  int size() const { return static_cast<int>(q_.size()); }
  double operator()(int y) const { return q_[y]; }
  const std::vector<double>& probs() const { return q_; }

 private:
  std::vector<double> q_;
};

// Joint type Q = P_X x Q_{Y|X} with its output marginal cached at
// construction. Instances are immutable: rebuild, never edit, so the cached
// marginal is structurally consistent with (input, kernel).
class JointType {
 public:
  JointType() = default;
  JointType(InputDistribution px, Matrix kernel);

  int nx() const { return kernel_.rows(); }
  int ny() const { return kernel_.cols(); }
  const InputDistribution& input() const { return px_; }
  const Matrix& kernel() const { return kernel_; }
  const Marginal& marginal() const { return qy_; }
  double px(int x) const { return px_(x); }
  double kern(int x, int y) const { return kernel_(x, y); }
  double qy(int y) const { return qy_(y); }
  // Joint cell mass Q(x, y).
  double joint(int x, int y) const { return px_(x) * kernel_(x, y); }

 private:
  InputDistribution px_;
  Matrix kernel_;
  Marginal qy_;
};

// Channel plus ensemble input distribution, and the metric channel the
// decoder scores with. metric == w unless decoding is mismatched.
struct Setup {
  Channel w;
  InputDistribution px;
  Channel metric;
};

Setup matched(Channel w, InputDistribution px);
// Exponents of a decoder that scores likelihoods with ch_decoder while the
// data flows through ch_true. Alphabets must agree.
Setup set_mismatch(Channel ch_true, Channel ch_decoder, InputDistribution px);

// f(Q) = sum_{x,y} Q(x,y) log V(y|x), the per-letter expected log-metric.
// Always <= 0; -inf when Q puts mass where V vanishes; 0*log0 = 0.
Nats f_functional(const JointType& q, const Channel& v);

// D(Q_{Y|X} || W | P_X), conditional divergence of the kernel from W weighted
// by the input distribution. >= 0; +inf when the kernel puts conditional mass
// where W vanishes (for an x with positive input probability).
Nats cond_divergence(const JointType& q, const Channel& w);

// I(Q), mutual information of the joint type. >= 0, finite always.
Nats mutual_information(const JointType& q);

struct Functionals {
  Nats f = 0;
  Nats mi = 0;
  Nats div = 0;
};

// One fused pass computing f (against metric), I, and D (against w).
Functionals evaluate_functionals(const JointType& q, const Channel& w, const Channel& metric);

// Relative-frequency joint type of two parallel symbol sequences. The input
// marginal equals the composition of xs; kernel rows for symbols absent from
// xs are set uniform (they carry zero mass in every functional).
JointType empirical_joint(std::span<const int> xs, std::span<const int> ys, int nx, int ny);

// Binary symmetric channel with the given crossover probability.
Channel bsc(double crossover);

// Uniform input distribution on n symbols.
InputDistribution uniform_input(int n);

// Output marginal of P_X pushed through W.
Marginal push_forward(const InputDistribution& px, const Channel& w);

}  // namespace exlab
