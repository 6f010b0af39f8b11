#pragma once

#include <vector>

#include "exlab/exponents.hpp"
#include "exlab/thresholds.hpp"

namespace exlab {

// One rate point of a comparison curve: the optimal pair at offset T, then
// each threshold class run at its own best list exponent subject to matching
// the optimal error exponent at this rate.
struct FigureRow {
  double r = 0.0;
  double ee_opt = kInf;   // optimal erasure error exponent
  double el_opt = kInf;   // optimal list exponent (ee_opt + T)
  double e_target = kInf; // error-exponent constraint handed to the classes
  double el_psi = kInf;
  double el_l1 = kInf;
  double el_l2 = kInf;
  Branch branch = Branch::Single;  // which side won the optimal minimum
};

// Equally spaced rates from zero to the mutual information of the channel
// under the given input distribution. points >= 2.
std::vector<double> rate_grid(const Setup& s, int points);

// Full curve at offset t. Rows come back in the order of `rates`; each rate's
// synthesis is independent, so points run in parallel.
std::vector<FigureRow> figure_curve(const Setup& s, double t, const std::vector<double>& rates,
                                    const OptimizeOptions& opts = {});

}  // namespace exlab
