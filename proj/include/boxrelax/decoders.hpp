#ifndef BOXRELAX_DECODERS_HPP_
#define BOXRELAX_DECODERS_HPP_

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

// Symbol detectors on concrete (A, y) instances. All decoders are pure
// functions of their inputs; each call owns its workspace, so any number of
// decodes may run concurrently.

namespace boxrelax::decoders {

struct ChannelInstance {
  Eigen::MatrixXd matrix_a;      // m x n channel matrix
  Eigen::VectorXd observation_y; // length-m observation
  int constellation_order = 2;   // M; symbols in {+-1, ..., +-(M-1)}
};

struct DecodeOutput {
  Eigen::VectorXd relaxed_x;  // solver output before thresholding
  Eigen::VectorXi symbols_x;  // nearest constellation point per coordinate
  int iterations = 0;
  // Max over coordinates of the KKT violation at relaxed_x: |gradient| at
  // interior points, wrong-signed gradient magnitude at active bounds.
  double kkt_residual = 0.0;
  // Objective value 0.5 ||y - A x||^2 after every accepted iterate;
  // non-increasing by construction of the monotone restart.
  std::vector<double> objective_trace;
};

/// Thrown when the projected-gradient loop exhausts max_iter before the
/// gradient-map tolerance is met; carries the best (last) iterate.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, DecodeOutput best_iterate)
      : std::runtime_error(what), best(std::move(best_iterate)) {}
  DecodeOutput best;
};

/// Box-relaxation first stage: minimize ||y - A x||_2 over the hypercube
/// [-(M-1), M-1]^n, followed by per-coordinate rounding to the nearest
/// constellation point.
///
/// Solver: accelerated projected gradient (monotone restart) on the smooth
/// objective 0.5 ||y - A x||^2 with fixed step 1/L, where L is the top
/// eigenvalue of A^T A from power iteration (1e-10 relative tolerance).
/// Projection is the per-coordinate clamp. Terminates when the composite
/// gradient-map norm drops below tol * (1 + ||A^T y||), else throws
/// ConvergenceError at max_iter.
DecodeOutput bro_solve(const ChannelInstance& instance, double tol = 1e-9,
                       int max_iter = 20000);

/// Nearest constellation point per coordinate (ties break toward the
/// smaller magnitude; the tie at 0 resolves to +1). Inputs are clamped to
/// the box first, so the map is total. M = 2 reduces to sign with
/// sign(0) = +1.
Eigen::VectorXi threshold_symbols(const Eigen::Ref<const Eigen::VectorXd>& relaxed_x,
                                  int constellation_order);

/// Zero-forcing decoder: unconstrained least squares via Householder QR,
/// then threshold_symbols. relaxed_x is not clamped and may lie outside the
/// box. Requires m >= n and full column rank (|R_ii| > 1e-10 ||A||_F).
DecodeOutput zf_solve(const ChannelInstance& instance);

/// Exhaustive maximum-likelihood search over the M^n constellation vectors,
/// enumerated in lexicographic order (ascending per coordinate) so that
/// objective ties resolve to the lexicographically smallest vector.
/// Guarded to M^n <= 2^20.
Eigen::VectorXi ml_solve(const ChannelInstance& instance);

/// Matched-filter decision for one isolated BPSK symbol: the sign of the
/// projection of the isolated observation onto the symbol's channel column
/// (sign(0) = +1). Returns +1 or -1.
int mfb_detect(const Eigen::Ref<const Eigen::VectorXd>& column_a,
               const Eigen::Ref<const Eigen::VectorXd>& isolated_obs);

}  // namespace boxrelax::decoders

#endif  // BOXRELAX_DECODERS_HPP_
