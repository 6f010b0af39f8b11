#pragma once

// Random channels and marginal-coupled joint-type pairs for identity and
// property tests. Entries are kept away from zero so every functional stays
// finite and tolerances are meaningful.

#include <random>
#include <vector>

#include "exlab/typespace.hpp"

namespace testutil {

inline exlab::Channel random_channel(std::mt19937_64& rng, int nx, int ny) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  exlab::Matrix m(nx, ny);
  for (int x = 0; x < nx; ++x) {
    double s = 0.0;
    for (int y = 0; y < ny; ++y) {
      m(x, y) = u(rng);
      s += m(x, y);
    }
    for (int y = 0; y < ny; ++y) m(x, y) /= s;
  }
  return exlab::Channel(m);
}

inline exlab::InputDistribution random_input(std::mt19937_64& rng, int nx) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<double> p(static_cast<size_t>(nx));
  double s = 0.0;
  for (double& v : p) {
    v = u(rng);
    s += v;
  }
  for (double& v : p) v /= s;
  return exlab::InputDistribution(p);
}

// Starts from the product kernel (every row equals qy, so the output marginal
// is qy for any input law) and applies random four-entry exchanges that leave
// the marginal unchanged. Entries stay in [0.01, 0.99].
inline exlab::JointType coupled_type(std::mt19937_64& rng, const exlab::InputDistribution& px,
                                     const std::vector<double>& qy, int moves) {
  int nx = px.size();
  int ny = static_cast<int>(qy.size());
  exlab::Matrix k(nx, ny);
  for (int x = 0; x < nx; ++x)
    for (int y = 0; y < ny; ++y) k(x, y) = qy[static_cast<size_t>(y)];

  std::uniform_int_distribution<int> rx(0, nx - 1), ry(0, ny - 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int m = 0; m < moves; ++m) {
    int x1 = rx(rng), x2 = rx(rng), y1 = ry(rng), y2 = ry(rng);
    if (x1 == x2 || y1 == y2) continue;
    double w1 = 1.0 / px(x1), w2 = 1.0 / px(x2);
    // K(x1,y1) += t*w1, K(x1,y2) -= t*w1, K(x2,y1) -= t*w2, K(x2,y2) += t*w2
    double hi = std::min((0.99 - k(x1, y1)) / w1, (k(x1, y2) - 0.01) / w1);
    hi = std::min(hi, std::min((k(x2, y1) - 0.01) / w2, (0.99 - k(x2, y2)) / w2));
    double lo = std::max((0.01 - k(x1, y1)) / w1, (k(x1, y2) - 0.99) / w1);
    lo = std::max(lo, std::max((k(x2, y1) - 0.99) / w2, (0.01 - k(x2, y2)) / w2));
    if (!(hi > lo)) continue;
    double t = lo + (hi - lo) * u(rng);
    k(x1, y1) += t * w1;
    k(x1, y2) -= t * w1;
    k(x2, y1) -= t * w2;
    k(x2, y2) += t * w2;
  }
  return exlab::JointType(px, k);
}

inline std::vector<double> random_marginal(std::mt19937_64& rng, int ny) {
  std::uniform_real_distribution<double> u(0.15, 1.0);
  std::vector<double> q(static_cast<size_t>(ny));
  double s = 0.0;
  for (double& v : q) {
    v = u(rng);
    s += v;
  }
  for (double& v : q) v /= s;
  return q;
}

}  // namespace testutil
