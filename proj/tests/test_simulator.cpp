#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "exlab/simulator.hpp"

using namespace exlab;

namespace {

Setup w1_setup() { return matched(bsc(0.01), uniform_input(2)); }

Codebook two_words() {
  Codebook cb;
  cb.n = 3;
  cb.words = {{0, 0, 1}, {0, 1, 1}};
  return cb;
}

}  // namespace

TEST_CASE("nearest composition rounds by largest remainder") {
  InputDistribution u2({0.5, 0.5});
  CHECK(nearest_n_type(u2, 3) == std::vector<int>{2, 1});  // tie goes to index 0
  CHECK(nearest_n_type(u2, 4) == std::vector<int>{2, 2});
  CHECK(nearest_n_type(InputDistribution({0.7, 0.3}), 10) == std::vector<int>{7, 3});
  CHECK_THROWS_AS(nearest_n_type(u2, 0), std::invalid_argument);
  // three symbols at n=4 cannot land within the tolerance band
  InputDistribution u3({1.0 / 3, 1.0 / 3, 1.0 / 3});
  CHECK_THROWS_AS(nearest_n_type(u3, 4), std::invalid_argument);
  CHECK(nearest_n_type(u3, 6) == std::vector<int>{2, 2, 2});
}

TEST_CASE("message count rounds the exponential and guards its range") {
  CHECK(message_count(3, std::log(5.0) / 3) == 5);
  CHECK(message_count(4, std::log(2.0) / 4) == 2);
  CHECK_THROWS_AS(message_count(2, 0.0), std::invalid_argument);     // rounds to 1
  CHECK_THROWS_AS(message_count(4, 10.0), std::invalid_argument);    // beyond any budget
  CHECK_THROWS_AS(message_count(3, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(message_count(0, 0.5), std::invalid_argument);
}

TEST_CASE("sampled codebooks stay in the composition class") {
  InputDistribution px({0.6, 0.4});
  std::vector<int> base = nearest_n_type(px, 5);
  std::mt19937_64 rng(11);
  Codebook cb = sample_codebook(px, 5, 6, rng);
  CHECK(cb.n == 5);
  CHECK(cb.words.size() == 6);
  for (const auto& w : cb.words) {
    REQUIRE(w.size() == 5);
    std::vector<int> counts(2, 0);
    for (int x : w) counts[static_cast<size_t>(x)]++;
    CHECK(counts == base);
  }
  std::mt19937_64 rng2(11);
  Codebook cb2 = sample_codebook(px, 5, 6, rng2);
  CHECK(cb.words == cb2.words);  // same seed, same draw order
}

TEST_CASE("decode follows each acceptance rule on a hand case") {
  Setup s = w1_setup();
  Codebook cb = two_words();
  std::vector<int> y = {0, 0, 1};  // exactly word 0

  // a nonpositive offset always keeps the best-scoring message
  Decoder ml(DecoderRule::scaled_ml(-0.05), s);
  DecodeOutcome o = ml.decode(cb, y);
  CHECK(o.contains(0));
  CHECK_FALSE(o.erased());

  // an unreachable joint threshold erases everything
  Decoder wall(DecoderRule::general([](const JointType&) { return kInf; }), s);
  CHECK(wall.decode(cb, y).erased());

  // a bottomless output threshold accepts everything
  Decoder open(DecoderRule::output_only([](const Marginal&) { return -kInf; }), s);
  DecodeOutcome all = open.decode(cb, y);
  CHECK(all.list == std::vector<int>{0, 1});

  // a huge offset erases even the true word
  Decoder strict(DecoderRule::forney(10.0), s);
  CHECK(strict.decode(cb, std::vector<int>{0, 0, 1}).erased());

  CHECK_THROWS_AS(ml.decode(cb, std::vector<int>{0, 1}), std::invalid_argument);
}

TEST_CASE("rules that need a threshold function reject empty ones") {
  Setup s = w1_setup();
  CHECK_THROWS_AS(Decoder(DecoderRule::general({}), s), std::invalid_argument);
  CHECK_THROWS_AS(Decoder(DecoderRule::output_only({}), s), std::invalid_argument);
}

TEST_CASE("noiseless two-word ensemble averages by hand") {
  // composition class of (1,1) has two words; with a clean channel the sent
  // word is always recovered and the impostor ties exactly when the codebook
  // repeats a word, so half the codebooks list one wrong message
  Setup s0 = matched(bsc(0.0), uniform_input(2));
  EnsembleEstimate est = exact_ensemble_average_m(DecoderRule::forney(0.0), s0, 2, 2);
  CHECK(est.p_err == 0.0);
  CHECK(est.avg_wrong == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(est.stderr_err == 0.0);
  CHECK(est.stderr_wrong == 0.0);
  CHECK(est.any_boundary);
  CHECK(est.boundary_events >= 1);
  CHECK(est.evaluations > 0);
}

TEST_CASE("a single message never lists a wrong one") {
  Setup s = w1_setup();
  EnsembleEstimate est = exact_ensemble_average_m(DecoderRule::forney(0.0), s, 2, 1);
  CHECK(est.avg_wrong == 0.0);
  CHECK(est.p_err == 0.0);  // no competitor, so the sum it must beat is empty
}

TEST_CASE("exact ensemble averages pin to regressions") {
  Setup s = w1_setup();
  EnsembleEstimate est = exact_ensemble_average_m(DecoderRule::forney(0.05), s, 4, 2);
  CHECK(est.p_err == doctest::Approx(0.180032).epsilon(1e-5));
  CHECK(est.avg_wrong == doctest::Approx(6.73283e-05).epsilon(1e-5));
  CHECK(est.stderr_err == 0.0);

  // the rate entry point routes through message_count
  EnsembleEstimate viaRate =
      exact_ensemble_average(DecoderRule::forney(0.05), s, 4, std::log(2.0) / 4);
  CHECK(viaRate.p_err == est.p_err);
  CHECK(viaRate.avg_wrong == est.avg_wrong);
}

TEST_CASE("monte carlo matches exact enumeration inside three sigma") {
  Setup s = w1_setup();
  DecoderRule rule = DecoderRule::forney(0.05);
  EnsembleEstimate exact = exact_ensemble_average_m(rule, s, 3, 2);
  EnsembleEstimate mc = monte_carlo_average_m(rule, s, 3, 2, 20000, 7);
  CHECK(std::abs(mc.p_err - exact.p_err) <= 3 * mc.stderr_err + 1e-12);
  CHECK(std::abs(mc.avg_wrong - exact.avg_wrong) <= 3 * mc.stderr_wrong + 1e-12);
  CHECK(mc.evaluations == 20000);

  EnsembleEstimate mc2 = monte_carlo_average_m(rule, s, 3, 2, 20000, 7);
  CHECK(mc.p_err == mc2.p_err);  // fixed seed reproduces exactly
  CHECK(mc.avg_wrong == mc2.avg_wrong);
  CHECK(mc.stderr_err == mc2.stderr_err);

  EnsembleEstimate mc3 = monte_carlo_average_m(rule, s, 3, 2, 20000, 8);
  CHECK(mc.p_err != mc3.p_err);  // a different seed actually changes the draw

  CHECK_THROWS_AS(monte_carlo_average_m(rule, s, 3, 2, 0, 7), std::invalid_argument);
}

TEST_CASE("likelihood ratio family dominates its own members") {
  Setup s = w1_setup();
  DominanceReport rep = dominance_check(DecoderRule::forney(0.05), s, 3, 2);
  CHECK(rep.dominated);
  CHECK(rep.slack <= 1e-9);
  EnsembleEstimate est = exact_ensemble_average_m(DecoderRule::forney(0.05), s, 3, 2);
  CHECK(rep.p_err == doctest::Approx(est.p_err).epsilon(1e-12));
  CHECK(rep.avg_wrong == doctest::Approx(est.avg_wrong).epsilon(1e-12));
  CHECK_THROWS_AS(dominance_check(DecoderRule::forney(0.05), s, 3, 0), std::invalid_argument);
}

TEST_CASE("oversized enumerations point at the sampling path") {
  Setup s = w1_setup();
  try {
    exact_ensemble_average_m(DecoderRule::forney(0.0), s, 16, 2);
    FAIL("expected the enumeration budget to trip");
  } catch (const std::invalid_argument& e) {
    std::string msg = e.what();
    CHECK(msg.find("3.2e7") != std::string::npos);
    CHECK(msg.find("Monte Carlo") != std::string::npos);
  }
}
