#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "exlab/typespace.hpp"
#include "random_types.hpp"

using namespace exlab;

TEST_CASE("pos_part clamps at zero") {
  CHECK(pos_part(0.3) == 0.3);
  CHECK(pos_part(0.0) == 0.0);
  CHECK(pos_part(-2.0) == 0.0);
  CHECK(pos_part(-kInf) == 0.0);
  CHECK(pos_part(kInf) == kInf);
}

TEST_CASE("neumaier sum keeps cancelled mass") {
  NeumaierSum s;
  s.add(1e16);
  s.add(1.0);
  s.add(-1e16);
  CHECK(s.value() == 1.0);
}

TEST_CASE("matrix is row major") {
  Matrix m(2, 3, {1, 2, 3, 4, 5, 6});
  CHECK(m(0, 0) == 1);
  CHECK(m(0, 2) == 3);
  CHECK(m(1, 0) == 4);
  CHECK(m.data()[4] == 5);
  CHECK_THROWS_AS(Matrix(2, 2, {1.0, 2.0, 3.0}), std::invalid_argument);
}

TEST_CASE("channel validates stochastic rows") {
  CHECK_NOTHROW(Channel(Matrix(2, 2, {0.5, 0.5, 0.1, 0.9})));
  CHECK_THROWS_AS(Channel(Matrix(2, 2, {0.6, 0.5, 0.1, 0.9})), std::invalid_argument);
  CHECK_THROWS_AS(Channel(Matrix(2, 2, {-0.1, 1.1, 0.5, 0.5})), std::invalid_argument);
  Channel w = bsc(0.01);
  CHECK(w.nx() == 2);
  CHECK(w(0, 0) == 0.99);
  CHECK(w(0, 1) == 0.01);
  CHECK_THROWS_AS(bsc(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(bsc(1.5), std::invalid_argument);
}

TEST_CASE("input distribution and marginal validate") {
  CHECK_THROWS_AS(InputDistribution({0.5, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(InputDistribution(std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(Marginal({1.2, -0.2}), std::invalid_argument);
  InputDistribution u = uniform_input(4);
  CHECK(u.size() == 4);
  CHECK(u(2) == 0.25);
  CHECK_THROWS_AS(uniform_input(0), std::invalid_argument);
}

TEST_CASE("joint type caches a consistent output marginal") {
  JointType q(uniform_input(2), Matrix(2, 2, {0.9, 0.1, 0.2, 0.8}));
  CHECK(q.qy(0) == doctest::Approx(0.55).epsilon(1e-15));
  CHECK(q.joint(1, 0) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(q.marginal().size() == 2);
  CHECK_THROWS_AS(JointType(uniform_input(3), Matrix(2, 2, {1, 0, 0, 1})),
                  std::invalid_argument);
}

TEST_CASE("matched channel closed forms") {
  Setup s = matched(bsc(0.01), uniform_input(2));
  JointType chan(s.px, s.w.matrix());
  // f at the channel itself is minus the crossover's binary entropy
  CHECK(f_functional(chan, s.metric) == doctest::Approx(-0.056001534354847345).epsilon(1e-14));
  CHECK(cond_divergence(chan, s.w) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(mutual_information(chan) == doctest::Approx(0.6371456462050979).epsilon(1e-14));

  JointType tilted(s.px, Matrix(2, 2, {0.9, 0.1, 0.1, 0.9}));
  CHECK(cond_divergence(tilted, s.w) == doctest::Approx(0.1444793474755122).epsilon(1e-13));
}

TEST_CASE("f is nonpositive and minus infinity off the metric support") {
  std::mt19937_64 rng(7);
  Setup s = matched(bsc(0.2), uniform_input(2));
  for (int i = 0; i < 50; ++i) {
    JointType q = testutil::coupled_type(rng, s.px, testutil::random_marginal(rng, 2), 3);
    CHECK(f_functional(q, s.metric) <= 0.0);
  }
  Channel v(Matrix(2, 2, {1.0, 0.0, 0.0, 1.0}));
  JointType q(uniform_input(2), Matrix(2, 2, {0.5, 0.5, 0.5, 0.5}));
  CHECK(f_functional(q, v) == -kInf);
  CHECK(cond_divergence(q, v) == kInf);
  // zero-mass cells never poison the value
  JointType onsupport(uniform_input(2), Matrix(2, 2, {1.0, 0.0, 0.0, 1.0}));
  CHECK(f_functional(onsupport, v) == 0.0);
  CHECK(cond_divergence(onsupport, v) == 0.0);
}

TEST_CASE("f is linear in the joint type") {
  Setup s = matched(bsc(0.1), uniform_input(2));
  Matrix a(2, 2, {0.7, 0.3, 0.2, 0.8}), b(2, 2, {0.5, 0.5, 0.4, 0.6});
  for (double lam : {0.0, 0.25, 0.5, 0.9, 1.0}) {
    Matrix mix(2, 2);
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) mix(x, y) = lam * a(x, y) + (1 - lam) * b(x, y);
    double fa = f_functional(JointType(s.px, a), s.metric);
    double fb = f_functional(JointType(s.px, b), s.metric);
    double fm = f_functional(JointType(s.px, mix), s.metric);
    CHECK(fm == doctest::Approx(lam * fa + (1 - lam) * fb).epsilon(1e-12));
  }
}

TEST_CASE("divergence and information are convex along kernel mixtures") {
  Setup s = matched(bsc(0.05), uniform_input(2));
  Matrix a(2, 2, {0.9, 0.1, 0.3, 0.7}), b(2, 2, {0.6, 0.4, 0.1, 0.9});
  Matrix mid(2, 2);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) mid(x, y) = 0.5 * (a(x, y) + b(x, y));
  double da = cond_divergence(JointType(s.px, a), s.w);
  double db = cond_divergence(JointType(s.px, b), s.w);
  double dm = cond_divergence(JointType(s.px, mid), s.w);
  CHECK(dm <= 0.5 * (da + db) + 1e-12);
}

TEST_CASE("fused functional evaluation matches the individual functions") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 30; ++i) {
    Channel w = testutil::random_channel(rng, 3, 3);
    Channel v = testutil::random_channel(rng, 3, 3);
    InputDistribution px = testutil::random_input(rng, 3);
    JointType q = testutil::coupled_type(rng, px, testutil::random_marginal(rng, 3), 4);
    Functionals fn = evaluate_functionals(q, w, v);
    CHECK(fn.f == doctest::Approx(f_functional(q, v)).epsilon(1e-13));
    CHECK(fn.div == doctest::Approx(cond_divergence(q, w)).epsilon(1e-13));
    CHECK(fn.mi == doctest::Approx(mutual_information(q)).epsilon(1e-13));
  }
}

TEST_CASE("exchange identity on marginal-coupled pairs") {
  // D(qt) + I(q) == D(q) + I(qt) + f(q) - f(qt) whenever the two output
  // marginals agree and the metric is the channel itself.
  std::mt19937_64 rng(2026);
  for (int nx : {2, 3}) {
    for (int i = 0; i < 100; ++i) {
      Channel w = testutil::random_channel(rng, nx, nx);
      InputDistribution px = testutil::random_input(rng, nx);
      std::vector<double> qy = testutil::random_marginal(rng, nx);
      JointType q = testutil::coupled_type(rng, px, qy, 6);
      JointType qt = testutil::coupled_type(rng, px, qy, 6);
      double lhs = cond_divergence(qt, w) + mutual_information(q);
      double rhs = cond_divergence(q, w) + mutual_information(qt) +
                   f_functional(q, w) - f_functional(qt, w);
      CHECK(std::abs(lhs - rhs) <= 1e-10);
    }
  }
}

TEST_CASE("empirical joint counts relative frequencies") {
  std::vector<int> xs = {0, 1, 1, 0};
  std::vector<int> ys = {1, 1, 0, 1};
  JointType q = empirical_joint(xs, ys, 2, 2);
  CHECK(q.px(0) == 0.5);
  CHECK(q.px(1) == 0.5);
  CHECK(q.kern(0, 1) == 1.0);
  CHECK(q.kern(1, 0) == 0.5);
  CHECK(q.joint(1, 1) == doctest::Approx(0.25).epsilon(1e-15));
  // absent input symbols get a uniform placeholder row with zero mass
  std::vector<int> xs2 = {0, 0};
  std::vector<int> ys2 = {0, 1};
  JointType q2 = empirical_joint(xs2, ys2, 3, 2);
  CHECK(q2.px(2) == 0.0);
  CHECK(q2.kern(2, 0) == 0.5);
  CHECK_THROWS_AS(empirical_joint(std::vector<int>{0}, std::vector<int>{0, 1}, 2, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(empirical_joint(xs, std::vector<int>{0, 1, 2, 5}, 2, 4),
                  std::invalid_argument);
}

TEST_CASE("push forward composes the marginal") {
  Marginal m1 = push_forward(uniform_input(2), bsc(0.01));
  CHECK(m1(0) == doctest::Approx(0.5).epsilon(1e-15));
  Channel asym(Matrix(2, 2, {0.6, 0.4, 0.01, 0.99}));
  Marginal m2 = push_forward(uniform_input(2), asym);
  CHECK(m2(0) == doctest::Approx(0.305).epsilon(1e-14));
  CHECK(m2(1) == doctest::Approx(0.695).epsilon(1e-14));
}

TEST_CASE("mismatched setup keeps both channels") {
  Setup s = set_mismatch(bsc(0.01), bsc(0.05), uniform_input(2));
  CHECK(s.w(0, 1) == 0.01);
  CHECK(s.metric(0, 1) == 0.05);
  CHECK_THROWS_AS(set_mismatch(bsc(0.1), Channel(Matrix(2, 3, {0.5, 0.3, 0.2, 0.1, 0.2, 0.7})),
                               uniform_input(2)),
                  std::invalid_argument);
}
