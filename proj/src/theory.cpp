#include "boxrelax/theory.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace boxrelax::theory {

namespace {

constexpr double kFeasibilityMargin = 1e-9;
constexpr double kBracketTol = 1e-12;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

bool is_power_of_two(int m) { return m >= 2 && (m & (m - 1)) == 0; }

void check_alpha(double alpha, const char* who) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::domain_error(std::string(who) + ": alpha must be positive");
  }
}

std::string infeasible_message(double delta, int m_order) {
  std::ostringstream os;
  if (m_order == 2) {
    os << "infeasible regime: requires delta > 1/2 (got delta = " << delta
       << ")";
  } else {
    os << "infeasible regime: requires delta > 1 - 1/M = "
       << 1.0 - 1.0 / m_order << " for M = " << m_order
       << " (got delta = " << delta << ")";
  }
  return os.str();
}

void check_sigma_consistent(const AsymptoticRegime& regime, double sigma_sq) {
  if (!(sigma_sq > 0.0) || !std::isfinite(sigma_sq)) {
    throw std::domain_error("sigma_sq must be positive");
  }
  const double implied = snr_from_sigma(sigma_sq, regime.constellation_order);
  if (std::abs(implied - regime.snr) > 1e-6 * regime.snr) {
    throw std::domain_error(
        "sigma_sq inconsistent with the regime's snr: implied snr differs");
  }
}

/// Derivative of F_M with respect to tau; strictly increasing.
double f_mpam_prime(double tau, const AsymptoticRegime& regime,
                    double sigma_sq) {
  const int m = regime.constellation_order;
  double sum = 0.0;
  for (int k = 2; k <= 2 * (m - 1); k += 2) {
    sum += s_term_derivatives(tau, static_cast<double>(k)).first;
  }
  return 0.5 * (regime.delta - static_cast<double>(m - 1) / m) -
         sigma_sq / (2.0 * tau * tau) + sum / m;
}

}  // namespace

AsymptoticRegime::AsymptoticRegime(double delta_in, double snr_in,
                                   int m_order)
    : delta(delta_in), snr(snr_in), constellation_order(m_order) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw std::domain_error("AsymptoticRegime: delta must be positive");
  }
  if (!(snr > 0.0) || !std::isfinite(snr)) {
    throw std::domain_error("AsymptoticRegime: snr must be positive");
  }
  if (!is_power_of_two(m_order)) {
    throw std::domain_error(
        "AsymptoticRegime: constellation order must be a power of two >= 2");
  }
}

bool AsymptoticRegime::feasible() const noexcept {
  return delta > 1.0 - 1.0 / constellation_order + kFeasibilityMargin;
}

void AsymptoticRegime::require_feasible() const {
  if (!feasible()) {
    throw InfeasibleRegimeError(
        infeasible_message(delta, constellation_order));
  }
}

double snr_from_sigma(double sigma_sq, int constellation_order) {
  if (!(sigma_sq > 0.0) || !std::isfinite(sigma_sq)) {
    throw std::domain_error("snr_from_sigma: sigma_sq must be positive");
  }
  if (!is_power_of_two(constellation_order)) {
    throw std::domain_error("snr_from_sigma: invalid constellation order");
  }
  const double m = constellation_order;
  return (m * m - 1.0) / (3.0 * sigma_sq);
}

double sigma_from_snr(double snr, int constellation_order) {
  if (!(snr > 0.0) || !std::isfinite(snr)) {
    throw std::domain_error("sigma_from_snr: snr must be positive");
  }
  if (!is_power_of_two(constellation_order)) {
    throw std::domain_error("sigma_from_snr: invalid constellation order");
  }
  const double m = constellation_order;
  return (m * m - 1.0) / (3.0 * snr);
}

double s_term(double alpha, double ell) {
  check_alpha(alpha, "s_term");
  if (!(ell > 0.0) || !std::isfinite(ell)) {
    throw std::domain_error("s_term: ell must be positive");
  }
  const double r = ell / alpha;
  return (alpha + ell * r) * specfns::q_function(r) -
         ell * kInvSqrt2Pi * std::exp(-0.5 * r * r);
}

STermDerivatives s_term_derivatives(double alpha, double ell) {
  check_alpha(alpha, "s_term_derivatives");
  if (!(ell > 0.0) || !std::isfinite(ell)) {
    throw std::domain_error("s_term_derivatives: ell must be positive");
  }
  const double r = ell / alpha;
  const double q = specfns::q_function(r);
  STermDerivatives d;
  d.first = r * kInvSqrt2Pi * std::exp(-0.5 * r * r) + (1.0 - r * r) * q;
  d.second = 2.0 * r * r * q;
  return d;
}

double f_bpsk(double tau, const AsymptoticRegime& regime) {
  check_alpha(tau, "f_bpsk");
  if (regime.constellation_order != 2) {
    throw std::domain_error("f_bpsk: regime must have M = 2");
  }
  return tau * (regime.delta - 0.5) + (1.0 / regime.snr) / tau +
         s_term(tau, 2.0);
}

double f_mpam(double tau, const AsymptoticRegime& regime, double sigma_sq) {
  check_alpha(tau, "f_mpam");
  check_sigma_consistent(regime, sigma_sq);
  const int m = regime.constellation_order;
  double sum = 0.0;
  for (int k = 2; k <= 2 * (m - 1); k += 2) {
    sum += s_term(tau, static_cast<double>(k));
  }
  return 0.5 * tau * (regime.delta - static_cast<double>(m - 1) / m) +
         sigma_sq / (2.0 * tau) + sum / m;
}

double g_function(double u) {
  if (!(u > 0.0) || !std::isfinite(u)) {
    throw std::domain_error("g_function: u must be positive");
  }
  return std::numbers::sqrt2 * std::numbers::inv_sqrtpi * u *
             std::exp(-2.0 * u * u) +
         (1.0 - 4.0 * u * u) * specfns::q_function(2.0 * u);
}

TheoryResult solve_tau_star(const AsymptoticRegime& regime, double sigma_sq) {
  regime.require_feasible();
  check_sigma_consistent(regime, sigma_sq);

  const int m = regime.constellation_order;
  double tau = 0.0;

  if (m == 2) {
    // First-order condition in u = 1/tau:
    //   H(u) = delta - 1/2 - u^2/snr + G(u),
    // strictly decreasing with a guaranteed sign change on
    // (sqrt((delta - 1/2) snr), sqrt(delta snr)).
    const auto h = [&](double u) {
      return regime.delta - 0.5 - u * u / regime.snr + g_function(u);
    };
    double u_lo = std::sqrt((regime.delta - 0.5) * regime.snr);
    double u_hi = std::sqrt(regime.delta * regime.snr);
    if (h(u_lo) <= 0.0) {
      tau = 1.0 / u_lo;  // G underflowed; the root is the bracket edge
    } else if (h(u_hi) >= 0.0) {
      tau = 1.0 / u_hi;
    } else {
      for (int it = 0; it < 200; ++it) {
        const double u_mid = 0.5 * (u_lo + u_hi);
        if (h(u_mid) > 0.0) {
          u_lo = u_mid;
        } else {
          u_hi = u_mid;
        }
        const double tau_width = (u_hi - u_lo) / (u_lo * u_hi);
        if (tau_width < kBracketTol * (1.0 + 1.0 / u_mid)) break;
      }
      tau = 2.0 / (u_lo + u_hi);
    }
  } else {
    // No analytic bracket for M > 2: expand geometrically around the
    // high-SNR style guess until F_M' changes sign, then bisect in tau.
    const double guess =
        1.0 / std::sqrt((regime.delta - 1.0 + 1.0 / m) * regime.snr);
    double lo = guess;
    double hi = guess;
    int expand = 0;
    while (f_mpam_prime(lo, regime, sigma_sq) > 0.0 && ++expand < 200) {
      lo *= 0.5;
    }
    expand = 0;
    while (f_mpam_prime(hi, regime, sigma_sq) < 0.0 && ++expand < 200) {
      hi *= 2.0;
    }
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (f_mpam_prime(mid, regime, sigma_sq) < 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
      if (hi - lo < kBracketTol * (1.0 + mid)) break;
    }
    tau = 0.5 * (lo + hi);
  }

  TheoryResult result;
  result.tau_star = tau;
  result.predicted_ser = Probability(
      2.0 * (1.0 - 1.0 / m) * specfns::q_function(1.0 / tau));
  result.high_snr_ser = high_snr_ser(regime);
  if (m == 2) {
    auto [lower, upper] = ser_bounds_bpsk(regime);
    result.lower_bound = lower;
    result.upper_bound = upper;
    result.objective_at_min = f_bpsk(tau, regime);
  } else {
    // The theory gives no closed-form lower bound beyond BPSK.
    result.lower_bound = Probability(0.0);
    result.upper_bound = result.high_snr_ser;
    result.objective_at_min = f_mpam(tau, regime, sigma_sq);
  }
  return result;
}

std::pair<Probability, Probability> ser_bounds_bpsk(
    const AsymptoticRegime& regime) {
  if (regime.constellation_order != 2) {
    throw std::domain_error("ser_bounds_bpsk: regime must have M = 2");
  }
  regime.require_feasible();
  return {specfns::q_function(std::sqrt(regime.delta * regime.snr)),
          specfns::q_function(std::sqrt((regime.delta - 0.5) * regime.snr))};
}

Probability high_snr_ser(const AsymptoticRegime& regime) {
  regime.require_feasible();
  const double m = regime.constellation_order;
  const double arg = std::sqrt((regime.delta - 1.0 + 1.0 / m) *
                               (3.0 / (m * m - 1.0)) * regime.snr);
  return Probability(2.0 * (1.0 - 1.0 / m) * specfns::q_function(arg));
}

Probability mfb_ser(const AsymptoticRegime& regime) {
  if (regime.constellation_order != 2) {
    throw std::domain_error("mfb_ser: supported for M = 2 only");
  }
  regime.require_feasible();
  return specfns::q_function(std::sqrt(regime.delta * regime.snr));
}

Probability zf_ser(const AsymptoticRegime& regime) {
  if (regime.constellation_order != 2) {
    throw std::domain_error("zf_ser: supported for M = 2 only");
  }
  if (!(regime.delta > 1.0 + kFeasibilityMargin)) {
    throw InfeasibleRegimeError(
        "zero forcing requires delta > 1 (more receive than transmit "
        "antennas)");
  }
  return specfns::q_function(std::sqrt((regime.delta - 1.0) * regime.snr));
}

LimitingDistribution limiting_distribution(const AsymptoticRegime& regime,
                                           double sigma_sq) {
  if (regime.constellation_order != 2) {
    throw std::domain_error("limiting_distribution: supported for M = 2 only");
  }
  const TheoryResult solved = solve_tau_star(regime, sigma_sq);
  const double tau = solved.tau_star;

  LimitingDistribution dist;
  dist.tau_star = tau;
  dist.atom_at_zero = Probability(0.5);
  dist.atom_at_minus_two = specfns::q_function(2.0 / tau);
  dist.interior_density = [tau](double w) {
    if (w <= -2.0 || w >= 0.0) return 0.0;
    return specfns::normal_pdf(w / tau) / tau;
  };
  dist.cdf = [tau](double w) {
    if (w < -2.0) return 0.0;
    if (w >= 0.0) return 1.0;
    return static_cast<double>(specfns::q_function(-w / tau));
  };
  return dist;
}

double mfb_gap_db(double delta) {
  if (!(delta > 0.5)) {
    throw std::domain_error("mfb_gap_db: requires delta > 1/2");
  }
  return 10.0 * std::log10(delta / (delta - 0.5));
}

double zf_gap_db(double delta) {
  if (!(delta > 1.0)) {
    throw std::domain_error("zf_gap_db: requires delta > 1");
  }
  return 10.0 * std::log10((delta - 0.5) / (delta - 1.0));
}

}  // namespace boxrelax::theory
