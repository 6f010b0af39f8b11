#include "exlab/typespace.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace exlab {

namespace {

constexpr double kSumTol = 1e-12;

void check_prob_vector(const std::vector<double>& p, const char* what) {
  if (p.empty()) throw std::invalid_argument(std::string(what) + ": empty");
  NeumaierSum s;
  for (size_t i = 0; i < p.size(); ++i) {
    double v = p[i];
    if (!(v >= 0.0) || v > 1.0 + kSumTol || std::isnan(v))
      throw std::invalid_argument(std::string(what) + ": entry " + std::to_string(i) +
                                  " out of [0,1]: " + std::to_string(v));
    s.add(v);
  }
  if (std::abs(s.value() - 1.0) > kSumTol)
    throw std::invalid_argument(std::string(what) + ": sums to " + std::to_string(s.value()) +
                                ", expected 1 within 1e-12");
}

}  // namespace

void Alphabet::validate(int min_size) const {
  if (size < min_size)
    throw std::invalid_argument("alphabet size " + std::to_string(size) + " < " +
                                std::to_string(min_size));
  if (!labels.empty() && static_cast<int>(labels.size()) != size)
    throw std::invalid_argument("alphabet has " + std::to_string(labels.size()) +
                                " labels for " + std::to_string(size) + " symbols");
}

Matrix::Matrix(int rows, int cols, double fill)
    : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, fill) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("matrix: negative dimension");
}

Matrix::Matrix(int rows, int cols, std::vector<double> data)
    : rows_(rows), cols_(cols), a_(std::move(data)) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("matrix: negative dimension");
  if (a_.size() != static_cast<size_t>(rows) * cols)
    throw std::invalid_argument("matrix: data size mismatch");
}

Channel::Channel(Matrix w) : w_(std::move(w)) {
  if (w_.rows() < 1 || w_.cols() < 1) throw std::invalid_argument("channel: empty matrix");
  for (int x = 0; x < w_.rows(); ++x) {
    NeumaierSum s;
    for (int y = 0; y < w_.cols(); ++y) {
      double v = w_(x, y);
      if (!(v >= 0.0) || v > 1.0 + kSumTol || std::isnan(v))
        throw std::invalid_argument("channel: W(" + std::to_string(y) + "|" + std::to_string(x) +
                                    ") out of [0,1]");
      s.add(v);
    }
    if (std::abs(s.value() - 1.0) > kSumTol)
      throw std::invalid_argument("channel: row " + std::to_string(x) + " sums to " +
                                  std::to_string(s.value()) + ", expected 1 within 1e-12");
  }
}

InputDistribution::InputDistribution(std::vector<double> p) : p_(std::move(p)) {
  check_prob_vector(p_, "input distribution");
}

Marginal::Marginal(std::vector<double> q) : q_(std::move(q)) {
  check_prob_vector(q_, "marginal");
}

JointType::JointType(InputDistribution px, Matrix kernel) : px_(std::move(px)) {
  if (kernel.rows() != px_.size())
    throw std::invalid_argument("joint type: kernel has " + std::to_string(kernel.rows()) +
                                " rows for " + std::to_string(px_.size()) + " input symbols");
  // Validate rows through the Channel invariant, then cache the marginal.
  Channel check(std::move(kernel));
  kernel_ = check.matrix();
  std::vector<double> qy(kernel_.cols());
  for (int y = 0; y < kernel_.cols(); ++y) {
    NeumaierSum s;
    for (int x = 0; x < kernel_.rows(); ++x) s.add(px_(x) * kernel_(x, y));
    qy[y] = s.value();
  }
  // The columns of a row-stochastic kernel mixed by a probability vector sum
  // to 1 up to rounding; renormalization would mask real construction bugs,
  // so only clamp the last ulps of drift.
  NeumaierSum tot;
  for (double v : qy) tot.add(v);
  if (std::abs(tot.value() - 1.0) > 1e-9)
    throw std::invalid_argument("joint type: cached marginal sums to " +
                                std::to_string(tot.value()));
  qy_ = Marginal(std::move(qy));
}

Setup matched(Channel w, InputDistribution px) {
  if (px.size() != w.nx())
    throw std::invalid_argument("setup: input distribution size does not match channel");
  Channel metric = w;
  return Setup{std::move(w), std::move(px), std::move(metric)};
}

Setup set_mismatch(Channel ch_true, Channel ch_decoder, InputDistribution px) {
  if (ch_true.nx() != ch_decoder.nx() || ch_true.ny() != ch_decoder.ny())
    throw std::invalid_argument("mismatch: channel alphabets differ");
  if (px.size() != ch_true.nx())
    throw std::invalid_argument("mismatch: input distribution size does not match channel");
  return Setup{std::move(ch_true), std::move(px), std::move(ch_decoder)};
}

Nats f_functional(const JointType& q, const Channel& v) {
  if (q.nx() != v.nx() || q.ny() != v.ny())
    throw std::invalid_argument("f: dimension mismatch");
  NeumaierSum s;
  for (int x = 0; x < q.nx(); ++x) {
    for (int y = 0; y < q.ny(); ++y) {
      double m = q.joint(x, y);
      if (m <= 0.0) continue;  // 0 * log(anything) = 0
      double w = v(x, y);
      if (w <= 0.0) return -kInf;
      s.add(m * std::log(w));
    }
  }
  return s.value();
}

Nats cond_divergence(const JointType& q, const Channel& w) {
  if (q.nx() != w.nx() || q.ny() != w.ny())
    throw std::invalid_argument("divergence: dimension mismatch");
  NeumaierSum s;
  for (int x = 0; x < q.nx(); ++x) {
    double p = q.px(x);
    if (p <= 0.0) continue;
    for (int y = 0; y < q.ny(); ++y) {
      double k = q.kern(x, y);
      if (k <= 0.0) continue;
      double ww = w(x, y);
      if (ww <= 0.0) return kInf;
      s.add(p * k * (std::log(k) - std::log(ww)));
    }
  }
  return s.value();
}

Nats mutual_information(const JointType& q) {
  NeumaierSum s;
  for (int y = 0; y < q.ny(); ++y) {
    double m = q.qy(y);
    if (m <= 0.0) continue;
    double logm = std::log(m);
    for (int x = 0; x < q.nx(); ++x) {
      double cell = q.joint(x, y);
      if (cell <= 0.0) continue;
      s.add(cell * (std::log(q.kern(x, y)) - logm));
    }
  }
  double v = s.value();
  return v > 0.0 ? v : 0.0;  // clamp -1ulp rounding, I >= 0
}

Functionals evaluate_functionals(const JointType& q, const Channel& w, const Channel& metric) {
  if (q.nx() != w.nx() || q.ny() != w.ny() || q.nx() != metric.nx() || q.ny() != metric.ny())
    throw std::invalid_argument("functionals: dimension mismatch");
  NeumaierSum sf, si, sd;
  bool f_neg_inf = false, d_pos_inf = false;
  std::vector<double> logq(q.ny(), 0.0);
  for (int y = 0; y < q.ny(); ++y) {
    double m = q.qy(y);
    if (m > 0.0) logq[y] = std::log(m);
  }
  for (int x = 0; x < q.nx(); ++x) {
    double p = q.px(x);
    if (p <= 0.0) continue;
    for (int y = 0; y < q.ny(); ++y) {
      double k = q.kern(x, y);
      if (k <= 0.0) continue;
      double cell = p * k;
      double logk = std::log(k);
      double v = metric(x, y);
      if (v <= 0.0)
        f_neg_inf = true;
      else
        sf.add(cell * std::log(v));
      double ww = w(x, y);
      if (ww <= 0.0)
        d_pos_inf = true;
      else
        sd.add(cell * (logk - std::log(ww)));
      si.add(cell * (logk - logq[y]));
    }
  }
  Functionals out;
  out.f = f_neg_inf ? -kInf : sf.value();
  out.div = d_pos_inf ? kInf : (sd.value() > 0.0 ? sd.value() : 0.0);
  out.mi = si.value() > 0.0 ? si.value() : 0.0;
  return out;
}

JointType empirical_joint(std::span<const int> xs, std::span<const int> ys, int nx, int ny) {
  if (xs.size() != ys.size() || xs.empty())
    throw std::invalid_argument("empirical joint: sequences empty or of different length");
  if (nx < 1 || ny < 1) throw std::invalid_argument("empirical joint: bad alphabet sizes");
  std::vector<int> rowc(nx, 0);
  Matrix counts(nx, ny, 0.0);
  for (size_t i = 0; i < xs.size(); ++i) {
    int x = xs[i], y = ys[i];
    if (x < 0 || x >= nx || y < 0 || y >= ny)
      throw std::invalid_argument("empirical joint: symbol out of range at position " +
                                  std::to_string(i));
    ++rowc[x];
    counts(x, y) += 1.0;
  }
  double n = static_cast<double>(xs.size());
  std::vector<double> px(nx);
  Matrix kernel(nx, ny, 0.0);
  for (int x = 0; x < nx; ++x) {
    px[x] = rowc[x] / n;
    for (int y = 0; y < ny; ++y)
      kernel(x, y) = rowc[x] > 0 ? counts(x, y) / rowc[x] : 1.0 / ny;
  }
  return JointType(InputDistribution(std::move(px)), std::move(kernel));
}

Channel bsc(double crossover) {
  if (!(crossover >= 0.0 && crossover <= 1.0))
    throw std::invalid_argument("bsc: crossover out of [0,1]");
  return Channel(Matrix(2, 2, {1.0 - crossover, crossover, crossover, 1.0 - crossover}));
}

InputDistribution uniform_input(int n) {
  if (n < 1) throw std::invalid_argument("uniform input: n < 1");
  return InputDistribution(std::vector<double>(n, 1.0 / n));
}

Marginal push_forward(const InputDistribution& px, const Channel& w) {
  if (px.size() != w.nx()) throw std::invalid_argument("push forward: dimension mismatch");
  std::vector<double> q(w.ny());
  for (int y = 0; y < w.ny(); ++y) {
    NeumaierSum s;
    for (int x = 0; x < w.nx(); ++x) s.add(px(x) * w(x, y));
    q[y] = s.value();
  }
  return Marginal(std::move(q));
}

}  // namespace exlab
