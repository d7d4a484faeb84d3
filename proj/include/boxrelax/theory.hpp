#ifndef BOXRELAX_THEORY_HPP_
#define BOXRELAX_THEORY_HPP_

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

#include "boxrelax/specfns.hpp"

// Deterministic asymptotic predictions for the box-relaxation decoder:
// the scalar convex objectives whose minimizer tau* drives every formula,
// the solver for tau*, closed-form bounds, the matched-filter and
// zero-forcing baselines, and the limiting law of the error vector.
//
// Conventions: snr is linear (snr_db = 10 log10 snr), delta = m/n, and the
// M-PAM constellation is {+-1, +-3, ..., +-(M-1)} so that
// snr = (M^2 - 1) / (3 sigma^2).

namespace boxrelax::theory {

using specfns::Probability;

/// Raised when a prediction is requested outside the regime where the
/// asymptotic theory is defined (tau* diverges at the boundary).
class InfeasibleRegimeError : public std::domain_error {
 public:
  explicit InfeasibleRegimeError(const std::string& what)
      : std::domain_error(what) {}
};

struct AsymptoticRegime {
  double delta;              // receive/transmit antenna ratio m/n
  double snr;                // linear SNR
  int constellation_order;   // M = 2^b

  AsymptoticRegime(double delta, double snr, int constellation_order);

  /// Predictions exist only for delta > 1 - 1/M (with a small margin;
  /// at the boundary tau* diverges).
  bool feasible() const noexcept;
  void require_feasible() const;  // throws InfeasibleRegimeError
};

struct TheoryResult {
  double tau_star = 0.0;          // unique positive minimizer of F / F_M
  Probability predicted_ser;      // 2 (1 - 1/M) Q(1/tau*)
  Probability lower_bound;        // Q(sqrt(delta snr)) for M = 2; 0 otherwise
  Probability upper_bound;        // closed-form bound, tight at high SNR
  Probability high_snr_ser;       // high-SNR approximation
  double objective_at_min = 0.0;  // F(tau*) (M = 2) or F_M(tau*) (M > 2)
};

/// Mixed limiting law of a single error-vector coordinate (BPSK, x0 = +1):
/// atom 1/2 at 0, atom Q(2/tau*) at -2, scaled normal density in between.
struct LimitingDistribution {
  double tau_star = 0.0;
  Probability atom_at_zero;
  Probability atom_at_minus_two;
  std::function<double(double)> interior_density;  // valid on (-2, 0)
  std::function<double(double)> cdf;               // valid on [-2, 0]
};

/// snr = (M^2 - 1) / (3 sigma_sq); reduces to 1/sigma_sq for M = 2.
double snr_from_sigma(double sigma_sq, int constellation_order);

/// Inverse of snr_from_sigma: sigma_sq = (M^2 - 1) / (3 snr).
double sigma_from_snr(double snr, int constellation_order);

/// S(alpha; ell) = (alpha + ell^2/alpha) Q(ell/alpha)
///               - (ell / sqrt(2 pi)) exp(-ell^2 / (2 alpha^2)).
/// Equals alpha * int_{ell/alpha}^inf (h - ell/alpha)^2 p(h) dh.
double s_term(double alpha, double ell);

struct STermDerivatives {
  double first;   // S'(alpha), strictly increasing from 0 to 1/2
  double second;  // S''(alpha) = 2 (ell/alpha)^2 Q(ell/alpha) > 0
};
STermDerivatives s_term_derivatives(double alpha, double ell);

/// BPSK objective F(tau) = tau (delta - 1/2) + (1/snr)/tau + S(tau; 2).
double f_bpsk(double tau, const AsymptoticRegime& regime);

/// M-PAM objective
/// F_M(tau) = (tau/2)(delta - (M-1)/M) + sigma^2/(2 tau)
///          + (1/M) sum_{k = 2, 4, ..., 2(M-1)} S(tau; k).
/// For M = 2 this is exactly f_bpsk(tau)/2.
double f_mpam(double tau, const AsymptoticRegime& regime, double sigma_sq);

/// G(u) = sqrt(2/pi) u exp(-2 u^2) + (1 - 4 u^2) Q(2u); satisfies
/// G(u) = S'(1/u) at ell = 2 and is strictly decreasing on (0, inf) with
/// 0 < G < 1/2. The first-order condition for the BPSK minimizer reads
/// delta - 1/2 - u^2/snr + G(u) = 0 with u = 1/tau.
double g_function(double u);

/// Unique positive minimizer of the scalar objective plus the derived
/// predictions. For M = 2 this bisects the first-order condition in
/// u = 1/tau over the guaranteed bracket
/// (sqrt((delta - 1/2) snr), sqrt(delta snr)); for M > 2 it bisects the
/// derivative of F_M with a geometrically expanded initial bracket.
/// The bracket is shrunk until its width is below 1e-12 (1 + tau).
TheoryResult solve_tau_star(const AsymptoticRegime& regime, double sigma_sq);

/// Closed-form BPSK sandwich: Q(sqrt(delta snr)) < Q(1/tau*)
/// <= Q(sqrt((delta - 1/2) snr)). Returns (lower, upper).
std::pair<Probability, Probability> ser_bounds_bpsk(
    const AsymptoticRegime& regime);

/// High-SNR SER: Q(sqrt((delta - 1/2) snr)) for M = 2, and in general
/// 2 (1 - 1/M) Q(sqrt((delta - 1 + 1/M) (3/(M^2 - 1)) snr)).
Probability high_snr_ser(const AsymptoticRegime& regime);

/// Matched filter bound Q(sqrt(delta snr)); defined for M = 2.
Probability mfb_ser(const AsymptoticRegime& regime);

/// Zero-forcing limit Q(sqrt((delta - 1) snr)); requires delta > 1, M = 2.
Probability zf_ser(const AsymptoticRegime& regime);

/// Limiting law of the BPSK error vector coordinates; requires M = 2.
LimitingDistribution limiting_distribution(const AsymptoticRegime& regime,
                                           double sigma_sq);

/// SNR penalty of the box relaxation against the matched filter bound,
/// 10 log10(delta / (delta - 1/2)) dB; 3.0103 dB for square systems.
double mfb_gap_db(double delta);

/// SNR advantage of the box relaxation over zero forcing,
/// 10 log10((delta - 1/2) / (delta - 1)) dB; requires delta > 1.
double zf_gap_db(double delta);

}  // namespace boxrelax::theory

#endif  // BOXRELAX_THEORY_HPP_
