#pragma once

// Finite-blocklength cross-check for the asymptotic formulas: fixed
// composition random codebooks, the threshold decoders run on actual
// sequences, and ensemble averages of the error probability and of the
// number of wrong messages on the list, either exactly by enumeration or by
// Monte Carlo. All decoders accept with non-strict inequalities and work in
// the log domain; -inf scores (zero metric likelihood) are legal.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "exlab/exponents.hpp"
#include "exlab/typespace.hpp"

namespace exlab {

// Blocklength-n composition closest to px: largest-remainder rounding,
// remainder ties going to the lower symbol index. Throws when even the best
// composition is farther than 0.5/n from px in total variation.
std::vector<int> nearest_n_type(const InputDistribution& px, int n);

// round(exp(n*rate)); throws when below 2 or above the enumeration budget.
int message_count(int n, double rate);

struct Codebook {
  int n = 0;
  std::vector<std::vector<int>> words;  // one composition-class word per message
};

// All words drawn independently and uniformly from the composition class of
// nearest_n_type(px, n). Draw order: message 0..M-1, each word one
// Fisher-Yates shuffle of the sorted base word.
Codebook sample_codebook(const InputDistribution& px, int n, int m_count,
                         std::mt19937_64& rng);

// Acceptance rules. Scores are per-letter log metric values f(Q^) of the
// empirical joint type of (codeword, y); likelihoods are their n-scaled
// counterparts.
struct DecoderRule {
  enum class Kind {
    Forney,       // log P(m) >= nT + logsumexp over other messages
    TypeBased,    // n f(m) >= nT + max over competitor types of (log count + n f)
    GeneralH,     // f(m) >= max over other messages of h(their joint type)
    OutputOnlyG,  // f(m) >= g(empirical output marginal)
    ScaledMl,     // f(m) >= T + max over other messages of f
  };
  Kind kind{};
  double t = 0.0;
  JointThreshold h;
  MarginalThreshold g;

  static DecoderRule forney(double t) { return {Kind::Forney, t, {}, {}}; }
  static DecoderRule type_based(double t) { return {Kind::TypeBased, t, {}, {}}; }
  static DecoderRule general(JointThreshold h) { return {Kind::GeneralH, 0.0, std::move(h), {}}; }
  static DecoderRule output_only(MarginalThreshold g) {
    return {Kind::OutputOnlyG, 0.0, {}, std::move(g)};
  }
  static DecoderRule scaled_ml(double t) { return {Kind::ScaledMl, t, {}, {}}; }
  // Optimal maps to Forney; the other kinds carry over unchanged.
  static DecoderRule from(const ThresholdSpec& spec);
};

struct DecodeOutcome {
  std::vector<int> list;   // accepted message indices, ascending
  bool boundary = false;   // some accept margin was within 1e-9 of zero

  bool contains(int m) const;
  bool erased() const { return list.empty(); }
};

// One decoder bound to a scoring metric. decode() never mutates state and is
// safe to call concurrently.
class Decoder {
 public:
  Decoder(DecoderRule rule, Setup s);

  DecodeOutcome decode(const Codebook& cb, std::span<const int> y) const;

 private:
  DecoderRule rule_;
  Setup s_;
  Matrix logv_;  // log of the metric table, -inf at zeros
};

struct EnsembleEstimate {
  double p_err = 0.0;         // P(sent message not on the list)
  double avg_wrong = 0.0;     // E[number of wrong messages on the list]
  double stderr_err = 0.0;    // zero for exact enumeration
  double stderr_wrong = 0.0;
  bool any_boundary = false;  // some decode sat within 1e-9 of an accept margin
  std::uint64_t boundary_events = 0;  // decodes that sat on a margin
  std::uint64_t evaluations = 0;
};

// Exact ensemble average over all codebooks (composition class to the power
// M) and all output sequences, sent message fixed to 0 by symmetry. Cost is
// |class|^M * |Y|^n decode evaluations; throws over ~3e7.
EnsembleEstimate exact_ensemble_average_m(const DecoderRule& rule, const Setup& s, int n,
                                          int m_count);
EnsembleEstimate exact_ensemble_average(const DecoderRule& rule, const Setup& s, int n,
                                        double rate);

// Monte Carlo over codebooks and channel noise with message 0 sent. Draw
// order per trial: codebook, then the n channel uses. Deterministic for a
// fixed seed, independent of worker count.
EnsembleEstimate monte_carlo_average_m(const DecoderRule& rule, const Setup& s, int n,
                                       int m_count, std::uint64_t trials, std::uint64_t seed);
EnsembleEstimate monte_carlo_average(const DecoderRule& rule, const Setup& s, int n,
                                     double rate, std::uint64_t trials, std::uint64_t seed);

// Where the rule's exact operating point (p_err, avg_wrong) stands against
// the family of likelihood-ratio threshold rules on the same ensemble:
// dominated means some threshold, or a randomized mix of two adjacent ones,
// is at least as good in both coordinates (within 1e-9).
struct DominanceReport {
  bool dominated = false;
  double p_err = 0.0;      // checked rule's operating point
  double avg_wrong = 0.0;
  double slack = 0.0;      // smallest worst-coordinate excess over the family
  double t_witness = 0.0;  // threshold attaining it (left end when mixing)
};

DominanceReport dominance_check(const DecoderRule& rule, const Setup& s, int n, int m_count);

}  // namespace exlab
