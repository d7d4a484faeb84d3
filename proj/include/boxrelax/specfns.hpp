#ifndef BOXRELAX_SPECFNS_HPP_
#define BOXRELAX_SPECFNS_HPP_

#include <stdexcept>

namespace boxrelax::specfns {

/// A real number constrained to [0, 1]. Construction validates the range
/// (NaN rejected); reads convert implicitly to double.
class Probability {
 public:
  Probability() = default;
  explicit Probability(double v) : value_(v) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::domain_error("Probability: value outside [0, 1]");
    }
  }
  operator double() const noexcept { return value_; }
  double value() const noexcept { return value_; }

 private:
  double value_ = 0.0;
};

/// Upper tail of the standard normal distribution,
///   Q(x) = int_x^inf (1/sqrt(2 pi)) exp(-h^2/2) dh.
///
/// Evaluated as 0.5 * erfc(x / sqrt(2)); erfc keeps full relative accuracy
/// deep in the tail, where 1 - Phi(x) would cancel catastrophically.
/// For finite x the result is strictly positive: if erfc underflows to zero
/// the smallest positive subnormal is returned instead.
/// Throws std::domain_error for non-finite input.
Probability q_function(double x);

/// Standard normal density (1/sqrt(2 pi)) exp(-x^2/2).
/// Throws std::domain_error for non-finite input.
double normal_pdf(double x);

}  // namespace boxrelax::specfns

#endif  // BOXRELAX_SPECFNS_HPP_
