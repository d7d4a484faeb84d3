#include "boxrelax/decoders.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace boxrelax::decoders {

namespace {

void validate_instance(const ChannelInstance& inst, const char* who) {
  const auto& a = inst.matrix_a;
  if (a.rows() < 1 || a.cols() < 1) {
    throw std::domain_error(std::string(who) + ": empty channel matrix");
  }
  if (inst.observation_y.size() != a.rows()) {
    throw std::domain_error(std::string(who) +
                            ": observation length does not match matrix rows");
  }
  if (!a.allFinite() || !inst.observation_y.allFinite()) {
    throw std::domain_error(std::string(who) + ": non-finite entries");
  }
  const int m_order = inst.constellation_order;
  if (m_order < 2 || (m_order & (m_order - 1)) != 0) {
    throw std::domain_error(std::string(who) + ": invalid constellation order");
  }
}

/// Top eigenvalue of A^T A by power iteration, 1e-10 relative tolerance.
double gram_top_eigenvalue(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.cols();
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n) / std::sqrt(double(n));
  double lambda = 0.0;
  double prev = -1.0;
  for (int it = 0; it < 100000; ++it) {
    Eigen::VectorXd w = a.transpose() * (a * v);
    const double norm_w = w.norm();
    if (norm_w == 0.0) return 0.0;
    lambda = v.dot(w);
    v = w / norm_w;
    if (it > 0 && std::abs(lambda - prev) <= 1e-10 * std::abs(lambda)) break;
    prev = lambda;
  }
  return lambda;
}

double box_objective(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& x) {
  return 0.5 * (y - a * x).squaredNorm();
}

int nearest_symbol(double v, int m_order) {
  const double bound = m_order - 1;
  v = std::clamp(v, -bound, bound);
  // Constellation points are c_j = 2 j - (M - 1), j = 0..M-1.
  const double pos = (v + bound) / 2.0;
  long j_lo = static_cast<long>(std::floor(pos));
  j_lo = std::clamp(j_lo, 0L, static_cast<long>(m_order - 1));
  long j_hi = std::min(j_lo + 1, static_cast<long>(m_order - 1));
  const double c_lo = 2.0 * j_lo - bound;
  const double c_hi = 2.0 * j_hi - bound;
  const double d_lo = std::abs(v - c_lo);
  const double d_hi = std::abs(v - c_hi);
  if (d_lo < d_hi) return static_cast<int>(c_lo);
  if (d_hi < d_lo) return static_cast<int>(c_hi);
  // Tie: prefer the smaller magnitude; the symmetric tie at 0 goes to +1.
  if (std::abs(c_lo) < std::abs(c_hi)) return static_cast<int>(c_lo);
  if (std::abs(c_hi) < std::abs(c_lo)) return static_cast<int>(c_hi);
  return static_cast<int>(std::max(c_lo, c_hi));
}

double kkt_infnorm(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                   const Eigen::VectorXd& x, double bound) {
  const Eigen::VectorXd grad = a.transpose() * (a * x - y);
  const double edge_eps = 1e-12 * (1.0 + bound);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double violation;
    if (x[i] <= -bound + edge_eps) {
      violation = std::max(0.0, -grad[i]);
    } else if (x[i] >= bound - edge_eps) {
      violation = std::max(0.0, grad[i]);
    } else {
      violation = std::abs(grad[i]);
    }
    worst = std::max(worst, violation);
  }
  return worst;
}

}  // namespace

DecodeOutput bro_solve(const ChannelInstance& inst, double tol, int max_iter) {
  validate_instance(inst, "bro_solve");
  if (!(tol > 0.0)) {
    throw std::domain_error("bro_solve: tol must be positive");
  }
  if (max_iter < 1) {
    throw std::domain_error("bro_solve: max_iter must be >= 1");
  }
  const Eigen::MatrixXd& a = inst.matrix_a;
  const Eigen::VectorXd& y = inst.observation_y;
  const Eigen::Index n = a.cols();
  const double bound = inst.constellation_order - 1;

  const double lambda_max = gram_top_eigenvalue(a);
  if (lambda_max <= 0.0) {
    throw std::domain_error("bro_solve: channel matrix is zero");
  }
  // Power iteration approaches the eigenvalue from below; inflate so that
  // 1/L stays a valid descent step.
  const double lip = lambda_max * (1.0 + 1e-6);
  const double step = 1.0 / lip;
  const double scale = tol * (1.0 + (a.transpose() * y).norm());

  const auto clamp_box = [bound](Eigen::VectorXd v) {
    return v.cwiseMax(-bound).cwiseMin(bound);
  };

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd momentum = x;
  double fx = box_objective(a, y, x);
  double t = 1.0;

  DecodeOutput out;
  out.objective_trace.reserve(std::min(max_iter, 4096) + 1);
  out.objective_trace.push_back(fx);

  int iter = 0;
  bool converged = false;
  while (iter < max_iter) {
    ++iter;
    Eigen::VectorXd grad = a.transpose() * (a * momentum - y);
    Eigen::VectorXd z = clamp_box(momentum - step * grad);
    double fz = box_objective(a, y, z);
    if (fz > fx) {
      // Momentum overshoot: restart from the last accepted iterate. The
      // plain projected step from x descends for step <= 1/L.
      momentum = x;
      t = 1.0;
      grad = a.transpose() * (a * x - y);
      z = clamp_box(x - step * grad);
      fz = box_objective(a, y, z);
    }

    // Composite gradient map at the pre-step point; cheap since grad is
    // already available. Confirm at z before accepting convergence.
    const double map_norm = lip * (momentum - z).norm();
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    momentum = z + ((t - 1.0) / t_next) * (z - x);
    t = t_next;
    x = z;
    fx = fz;
    out.objective_trace.push_back(fx);

    if (map_norm <= scale) {
      const Eigen::VectorXd grad_x = a.transpose() * (a * x - y);
      const double exact =
          lip * (x - clamp_box(x - step * grad_x)).norm();
      if (exact <= scale) {
        converged = true;
        break;
      }
    }
  }

  out.relaxed_x = x;
  out.symbols_x = threshold_symbols(x, inst.constellation_order);
  out.iterations = iter;
  out.kkt_residual = kkt_infnorm(a, y, x, bound);

  if (!converged) {
    std::ostringstream os;
    os << "bro_solve: no convergence after " << iter
       << " iterations (kkt residual " << out.kkt_residual << ", tolerance "
       << scale << ")";
    throw ConvergenceError(os.str(), std::move(out));
  }
  return out;
}

Eigen::VectorXi threshold_symbols(
    const Eigen::Ref<const Eigen::VectorXd>& relaxed_x, int m_order) {
  if (m_order < 2 || (m_order & (m_order - 1)) != 0) {
    throw std::domain_error("threshold_symbols: invalid constellation order");
  }
  Eigen::VectorXi symbols(relaxed_x.size());
  for (Eigen::Index i = 0; i < relaxed_x.size(); ++i) {
    symbols[i] = nearest_symbol(relaxed_x[i], m_order);
  }
  return symbols;
}

DecodeOutput zf_solve(const ChannelInstance& inst) {
  validate_instance(inst, "zf_solve");
  const Eigen::MatrixXd& a = inst.matrix_a;
  if (a.rows() < a.cols()) {
    throw std::domain_error(
        "zf_solve: requires at least as many receive as transmit antennas "
        "(m >= n)");
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  const double rank_tol = 1e-10 * a.norm();
  const auto r_diag =
      qr.matrixQR().topRows(a.cols()).diagonal().cwiseAbs().eval();
  if ((r_diag.array() <= rank_tol).any()) {
    throw std::domain_error("zf_solve: channel matrix is rank deficient");
  }
  DecodeOutput out;
  out.relaxed_x = qr.solve(inst.observation_y);
  out.symbols_x = threshold_symbols(out.relaxed_x, inst.constellation_order);
  out.iterations = 0;
  out.kkt_residual =
      (a.transpose() * (a * out.relaxed_x - inst.observation_y))
          .cwiseAbs()
          .maxCoeff();
  out.objective_trace.push_back(
      box_objective(a, inst.observation_y, out.relaxed_x));
  return out;
}

Eigen::VectorXi ml_solve(const ChannelInstance& inst) {
  validate_instance(inst, "ml_solve");
  const Eigen::MatrixXd& a = inst.matrix_a;
  const int n = static_cast<int>(a.cols());
  const int m_order = inst.constellation_order;
  const double log2_size = n * std::log2(double(m_order));
  if (log2_size > 20.0) {
    throw std::length_error(
        "ml_solve: search space exceeds the 2^20 exhaustive-search guard");
  }

  // Depth-first enumeration in lexicographic order; level d holds the
  // residual with coordinates 0..d-1 fixed. First strict improvement wins,
  // so ties resolve to the lexicographically smallest vector.
  Eigen::MatrixXd residuals(a.rows(), n + 1);
  residuals.col(0) = inst.observation_y;
  Eigen::VectorXi current(n);
  Eigen::VectorXi best(n);
  double best_sq = std::numeric_limits<double>::infinity();

  std::vector<int> value_index(n, 0);
  int depth = 0;
  while (depth >= 0) {
    if (value_index[depth] == m_order) {
      value_index[depth] = 0;
      --depth;
      if (depth >= 0) ++value_index[depth];
      continue;
    }
    const int symbol = 2 * value_index[depth] - (m_order - 1);
    current[depth] = symbol;
    residuals.col(depth + 1) =
        residuals.col(depth) - double(symbol) * a.col(depth);
    if (depth == n - 1) {
      const double sq = residuals.col(n).squaredNorm();
      if (sq < best_sq) {
        best_sq = sq;
        best = current;
      }
      ++value_index[depth];
    } else {
      ++depth;
    }
  }
  return best;
}

int mfb_detect(const Eigen::Ref<const Eigen::VectorXd>& column_a,
               const Eigen::Ref<const Eigen::VectorXd>& isolated_obs) {
  if (column_a.size() == 0 || column_a.size() != isolated_obs.size()) {
    throw std::domain_error("mfb_detect: size mismatch");
  }
  if (!column_a.allFinite() || !isolated_obs.allFinite()) {
    throw std::domain_error("mfb_detect: non-finite entries");
  }
  if (column_a.norm() == 0.0) {
    throw std::domain_error("mfb_detect: zero channel column");
  }
  return column_a.dot(isolated_obs) >= 0.0 ? 1 : -1;
}

}  // namespace boxrelax::decoders
