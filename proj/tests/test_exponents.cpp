#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "exlab/exponents.hpp"
#include "oracle.hpp"

using namespace exlab;

namespace {

Setup w1_setup() { return matched(bsc(0.01), uniform_input(2)); }
Setup w2_setup() {
  return matched(Channel(Matrix(2, 2, {0.6, 0.4, 0.01, 0.99})), uniform_input(2));
}

}  // namespace

TEST_CASE("erasure branch values pin to frozen regressions") {
  Setup s1 = w1_setup(), s2 = w2_setup();
  CHECK(e_a(0.2, 0.05, s1).value == doctest::Approx(0.287069333542).epsilon(1e-9));
  CHECK(e_a(0.3, 0.05, s1).value == doctest::Approx(0.187069333542).epsilon(1e-9));
  CHECK(e_b(0.2, 0.05, s1).value == doctest::Approx(0.378070598028).epsilon(1e-9));
  CHECK(e_a(0.2, -0.05, s2).value == doctest::Approx(0.018135238495).epsilon(1e-9));
}

TEST_CASE("erasure branches agree with the dense lattice") {
  Setup s = w1_setup();
  oracle::SliceScan sc = oracle::build_scan(oracle::w1(), oracle::w1(), 400);
  oracle::SlicePrefix sp = oracle::build_prefix(sc);
  for (double r : {0.2, 0.4}) {
    double lib_a = e_a(r, 0.05, s).value;
    double ref_a = oracle::ea_ref(r, 0.05, sc);
    CHECK(lib_a <= ref_a + 1e-6);
    CHECK(lib_a >= ref_a - 8e-3);
    double lib_b = e_b(r, 0.05, s).value;
    double ref_b = oracle::eb_fast(r, 0.05, sc, sp);
    CHECK(lib_b <= ref_b + 1e-6);
    CHECK(lib_b >= ref_b - 1e-2);
  }
}

TEST_CASE("offset limits and monotonicity") {
  Setup s = w1_setup();
  // metric values span a few nats; an offset of -50 makes acceptance
  // impossible, so the true message never misses the list
  ExponentResult never = e_a(0.2, -50.0, s);
  CHECK((!never.feasible || never.value == kInf));
  CHECK(e_b(0.2, -10.0, s).value == kInf);
  // both branches relax as the offset grows
  CHECK(e_a(0.2, 1.0, s).value <= e_a(0.2, 0.05, s).value + 1e-9);
  CHECK(e_b(0.2, 1.0, s).value <= e_b(0.2, 0.05, s).value + 1e-9);
  // at high rate and offset the channel itself lands in the second branch
  ExponentResult free_b = e_b(0.5, 0.2, s);
  REQUIRE(free_b.feasible);
  CHECK(free_b.value == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("optimal list exponent is the error exponent plus the offset") {
  Setup s1 = w1_setup(), s2 = w2_setup();
  for (double r : {0.0, 0.15, 0.35, 0.55}) {
    OptimalExponents oe = optimal_exponents(r, 0.05, s1, {});
    REQUIRE(oe.ee.feasible);
    CHECK(oe.el.value == oe.ee.value + 0.05);  // composed, not re-solved
    OptimalExponents on = optimal_exponents(r, -0.05, s2, {});
    REQUIRE(on.ee.feasible);
    CHECK(on.el.value == on.ee.value - 0.05);
  }
}

TEST_CASE("branch bookkeeping reports which minimum won") {
  Setup s = w1_setup();
  OptimalExponents lo = optimal_exponents(0.2, 0.05, s);
  CHECK(lo.ee.branch == Branch::A);
  OptimalExponents hi = optimal_exponents(0.4, 0.2, s);
  CHECK(hi.ee.branch == Branch::B);
  CHECK(hi.ee.value == doctest::Approx(0.029565206346).epsilon(1e-8));
  CHECK(e_a(0.4, 0.2, s).value >= hi.ee.value - 1e-12);
}

TEST_CASE("general threshold class specializes to the output-only class") {
  Setup s = w1_setup();
  // h reading only the output marginal collapses onto the lambda1 formulas
  auto g = [](const Marginal& qy) { return -0.55 - 0.35 * qy(0); };
  JointThreshold h = [&](const JointType& q) { return g(q.marginal()); };
  for (double r : {0.15, 0.4}) {
    ClassExponents l1 = lambda1_exponents(r, g, s);
    double psi_ee = psi_error_exponent(r, h, s).value;
    double psi_el = psi_list_exponent(r, h, s).value;
    CHECK(std::abs(psi_ee - l1.ee.value) <= 2e-3);
    CHECK(std::abs(psi_el - l1.el.value) <= 2e-3);
  }
}

TEST_CASE("general threshold class specializes to the scaled-ml class") {
  Setup s = w1_setup();
  double t = 0.05;
  JointThreshold h = [&, t](const JointType& q) {
    double f = f_functional(q, s.metric);
    return f == -kInf ? -kInf : t + f;
  };
  for (double r : {0.15, 0.4}) {
    ClassExponents l2 = lambda2_exponents(r, t, s);
    double psi_ee = psi_error_exponent(r, h, s).value;
    double psi_el = psi_list_exponent(r, h, s).value;
    CHECK(std::abs(psi_ee - l2.ee.value) <= 2e-3);
    CHECK(std::abs(psi_el - l2.el.value) <= 2e-3);
  }
}

TEST_CASE("output-only thresholds pin to frozen regressions and the lattice") {
  Setup s = w1_setup();
  MarginalThreshold g = [](const Marginal&) { return -0.7; };
  ClassExponents ce = lambda1_exponents(0.2, g, s);
  CHECK(ce.ee.value == doctest::Approx(0.277413596458).epsilon(1e-8));
  CHECK(ce.el.value == doctest::Approx(0.070180473509).epsilon(1e-7));

  oracle::SliceScan sc = oracle::build_scan(oracle::w1(), oracle::w1(), 400);
  oracle::SlicePrefix sp = oracle::build_prefix(sc);
  double ref_ee = oracle::lambda1_ee_ref(sc, [](int) { return -0.7; });
  double ref_el = oracle::lambda1_el_fast(0.2, sc, sp, [](int) { return -0.7; });
  CHECK(ce.ee.value <= ref_ee + 1e-6);
  CHECK(ce.ee.value >= ref_ee - 5e-3);
  CHECK(ce.el.value <= ref_el + 1e-6);
  CHECK(ce.el.value >= ref_el - 5e-3);
}

TEST_CASE("output-only threshold edge cases") {
  Setup s = w1_setup();
  // a threshold above every attainable metric value erases everything
  MarginalThreshold high = [](const Marginal&) { return 0.5; };
  ClassExponents always = lambda1_exponents(0.2, high, s);
  CHECK(always.ee.value == doctest::Approx(0.0).epsilon(1e-9));
  CHECK((!always.el.feasible || always.el.value == kInf));
  // a threshold below every metric value never erases: the erasure event is
  // unreachable and the wrong-list cost loses its constraint
  MarginalThreshold low = [](const Marginal&) { return -50.0; };
  ClassExponents never = lambda1_exponents(0.2, low, s);
  CHECK((!never.ee.feasible || never.ee.value == kInf));
  REQUIRE(never.el.feasible);
  oracle::SliceScan sc = oracle::build_scan(oracle::w1(), oracle::w1(), 400);
  double ref = oracle::kInf;  // min D + I - r without any f constraint
  for (const auto& v : sc.by_sum) {
    double dmin = oracle::kInf, imin = oracle::kInf;
    for (const oracle::Cell& c : v) {
      dmin = std::min(dmin, c.d);
      imin = std::min(imin, c.i);
    }
    if (dmin < oracle::kInf) ref = std::min(ref, dmin + imin);
  }
  ref -= 0.2;
  CHECK(never.el.value <= ref + 1e-6);
  CHECK(never.el.value >= ref - 5e-3);
}

TEST_CASE("error exponent of the output-only class ignores the rate") {
  Setup s = w1_setup();
  MarginalThreshold g = [](const Marginal& qy) { return -0.6 - 0.2 * qy(0); };
  double a = lambda1_exponents(0.1, g, s).ee.value;
  double b = lambda1_exponents(0.5, g, s).ee.value;
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("scaled-ml class tracks the lattice and its own regression") {
  Setup s = w1_setup();
  ClassExponents ce = lambda2_exponents(0.2, 0.05, s);
  CHECK(ce.el.value == doctest::Approx(0.337017508504).epsilon(1e-8));
  oracle::SliceScan sc = oracle::build_scan(oracle::w1(), oracle::w1(), 400);
  oracle::SlicePrefix sp = oracle::build_prefix(sc);
  double ref_ee = oracle::lambda2_ee_ref(0.2, 0.05, sc);
  double ref_el = oracle::lambda2_el_fast(0.2, 0.05, sc, sp);
  CHECK(ce.ee.value <= ref_ee + 1e-6);
  CHECK(ce.ee.value >= ref_ee - 8e-3);
  CHECK(ce.el.value <= ref_el + 1e-6);
  CHECK(ce.el.value >= ref_el - 8e-3);
}

TEST_CASE("list exponents never drop below minus the rate") {
  Setup s = w2_setup();
  for (double r : {0.1, 0.3, 0.5}) {
    ClassExponents ce = lambda2_exponents(r, -0.05, s);
    if (ce.el.feasible) CHECK(ce.el.value >= -r - 1e-9);
  }
}

TEST_CASE("general-class error exponent is monotone in the rate") {
  // the rate only enters through [I - R]_+, so growing R can only help
  Setup s = w1_setup();
  JointThreshold h = [](const JointType& q) { return -0.4 - 0.1 * q.qy(0); };
  double prev = kInf;
  for (double r : {0.1, 0.3, 0.5}) {
    double v = psi_error_exponent(r, h, s).value;
    CHECK(v <= prev + 1e-6);
    prev = v;
  }
}

TEST_CASE("mismatched decoding never beats matched decoding") {
  Setup matched_s = w1_setup();
  Setup mis = set_mismatch(bsc(0.01), bsc(0.05), uniform_input(2));
  double em = e_a(0.2, 0.05, matched_s).value;
  double ex = e_a(0.2, 0.05, mis).value;
  CHECK(ex <= em + 1e-6);
  // scoring with the true channel reproduces the matched numbers exactly
  Setup same = set_mismatch(bsc(0.01), bsc(0.01), uniform_input(2));
  CHECK(e_a(0.2, 0.05, same).value == doctest::Approx(em).epsilon(1e-12));
}

TEST_CASE("threshold spec dispatch routes to each class") {
  Setup s = w1_setup();
  ClassExponents opt = class_exponents(ThresholdSpec::optimal(0.05), 0.2, s);
  CHECK(opt.ee.value == doctest::Approx(e_a(0.2, 0.05, s).value).epsilon(1e-12));
  ClassExponents sml = class_exponents(ThresholdSpec::scaled_ml(0.05), 0.2, s);
  CHECK(sml.ee.value ==
        doctest::Approx(lambda2_exponents(0.2, 0.05, s).ee.value).epsilon(1e-12));
  MarginalThreshold g = [](const Marginal&) { return -0.7; };
  ClassExponents l1 = class_exponents(ThresholdSpec::output_only(g), 0.2, s);
  CHECK(l1.ee.value == doctest::Approx(0.277413596458).epsilon(1e-8));
  JointThreshold h = [](const JointType&) { return -0.1; };
  ClassExponents ps = class_exponents(ThresholdSpec::general(h), 0.2, s);
  CHECK(ps.ee.value == doctest::Approx(psi_error_exponent(0.2, h, s).value).epsilon(1e-12));
}

TEST_CASE("rate and threshold arguments are validated") {
  Setup s = w1_setup();
  CHECK_THROWS_AS(e_a(-0.1, 0.05, s), std::invalid_argument);
  CHECK_THROWS_AS(lambda1_exponents(0.2, MarginalThreshold{}, s), std::invalid_argument);
  CHECK_THROWS_AS(psi_error_exponent(0.2, JointThreshold{}, s), std::invalid_argument);
}
