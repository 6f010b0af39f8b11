#include "exlab/figures.hpp"

#include <stdexcept>

#include "exlab/parallel.hpp"

namespace exlab {

std::vector<double> rate_grid(const Setup& s, int points) {
  if (points < 2) throw std::invalid_argument("rate grid needs at least two points");
  JointType q(s.px, s.w.matrix());
  double cap = mutual_information(q);
  std::vector<double> rates(static_cast<size_t>(points));
  for (int i = 0; i < points; ++i)
    rates[static_cast<size_t>(i)] = cap * static_cast<double>(i) / (points - 1);
  return rates;
}

std::vector<FigureRow> figure_curve(const Setup& s, double t, const std::vector<double>& rates,
                                    const OptimizeOptions& opts) {
  std::vector<FigureRow> rows(rates.size());
  parallel_for(rates.size(), [&](std::size_t i) {
    double r = rates[i];
    FigureRow row;
    row.r = r;
    OptimalExponents oe = optimal_exponents(r, t, s, opts);
    row.ee_opt = oe.ee.value;
    row.el_opt = oe.el.value;
    row.branch = oe.ee.branch;
    row.e_target = oe.ee.value;
    if (row.e_target < kInf) {
      row.el_psi = optimal_list_exponent(DecoderClass::Psi, r, row.e_target, s, opts).value;
      row.el_l1 = optimal_list_exponent(DecoderClass::Lambda1, r, row.e_target, s, opts).value;
      row.el_l2 = optimal_list_exponent(DecoderClass::Lambda2, r, row.e_target, s, opts).value;
    }
    rows[i] = row;
  });
  return rows;
}

}  // namespace exlab
