#include "boxrelax/specfns.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace boxrelax::specfns {

Probability q_function(double x) {
  if (!std::isfinite(x)) {
    throw std::domain_error("q_function: non-finite input");
  }
  double q = 0.5 * std::erfc(x / std::numbers::sqrt2);
  if (q == 0.0) {
    q = std::numeric_limits<double>::denorm_min();
  }
  return Probability(q);
}

double normal_pdf(double x) {
  if (!std::isfinite(x)) {
    throw std::domain_error("normal_pdf: non-finite input");
  }
  constexpr double inv_sqrt_2pi = 0.3989422804014326779;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

}  // namespace boxrelax::specfns
