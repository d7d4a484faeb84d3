#ifndef BOXRELAX_SIM_HPP_
#define BOXRELAX_SIM_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "boxrelax/decoders.hpp"
#include "boxrelax/rng.hpp"

// Monte Carlo campaigns over the iid Gaussian channel model
// y = A x0 + z, A_ij ~ N(0, 1/n), z_i ~ N(0, sigma^2).
//
// Every trial draws from its own substream seeded by
// substream_seed(master_seed, trial_index) in the fixed order (A, x0, z),
// so a campaign is a pure function of its configuration: trials may run on
// any number of threads and aggregate bit-identically to a sequential run.

namespace boxrelax::sim {

enum class SignalMode { all_ones, uniform_random };
enum class DecoderKind { bro, zf, mfb, ml };

struct SimulationConfig {
  int n = 256;                  // transmit antennas
  double delta = 1.0;           // m = round(delta * n)
  int constellation_order = 2;  // M
  double sigma_sq = 0.25;       // noise variance
  int trials = 20;
  std::uint64_t master_seed = 1;
  SignalMode signal_mode = SignalMode::uniform_random;
  double solver_tol = 1e-9;
  int solver_max_iter = 20000;
};

struct TrialResult {
  double ser = 0.0;              // (1/n) sum 1{x*_i != x0_i}
  Eigen::VectorXd error_vector;  // w = relaxed_x - x0
  int iterations = 0;
  double kkt_residual = 0.0;
};

struct MonteCarloResult {
  double mean_ser = 0.0;
  double std_error = 0.0;          // standard error of the mean
  std::vector<double> per_trial;   // NaN where a trial failed
  int failed_trials = 0;
  std::string first_failure;
};

struct EmpiricalDistribution {
  double atom_zero_freq = 0.0;
  double atom_minus_two_freq = 0.0;
  std::vector<double> bin_edges;  // bins + 1 edges spanning [-2, 0]
  std::vector<double> bin_freqs;  // mass per bin; atoms + bins sum to 1
  std::vector<double> interior_sorted;
  // Conditional empirical CDF of the interior samples (atoms excluded).
  std::function<double(double)> interior_samples_cdf;
};

struct IndependenceStatistic {
  double joint_freq = 0.0;            // trial mean of ser^k
  double product_of_marginals = 0.0;  // (trial mean of ser)^k
  double joint_std_error = 0.0;
  double marginal_freq = 0.0;
};

/// Thrown by trial runners when the decoder fails; carries the trial index.
class TrialFailure : public std::runtime_error {
 public:
  TrialFailure(long trial_index, const std::string& what)
      : std::runtime_error("trial " + std::to_string(trial_index) + ": " +
                           what),
        trial_index(trial_index) {}
  long trial_index;
};

/// Number of receive antennas, m = round(delta * n).
int receive_dim(int n, double delta);

/// m x n channel matrix with iid N(0, 1/n) entries, filled column by
/// column (fixed draw order).
Eigen::MatrixXd sample_channel(int n, double delta, rng::Xoshiro256pp& stream);

/// Length-m noise with iid N(0, sigma_sq) entries; sigma_sq = 0 yields the
/// zero vector without consuming the stream.
Eigen::VectorXd sample_noise(int m, double sigma_sq,
                             rng::Xoshiro256pp& stream);

/// Transmitted symbols: +1 vector (all_ones, M = 2 only) or iid uniform
/// over {+-1, +-3, ..., +-(M-1)} (one 64-bit draw per symbol).
Eigen::VectorXi sample_symbols(int n, int constellation_order, SignalMode mode,
                               rng::Xoshiro256pp& stream);

/// One box-relaxation trial: draw (A, x0, z) from the trial substream, form
/// y = A x0 + z, decode, and report the SER and the error vector.
TrialResult run_trial(const SimulationConfig& config, long trial_index);

/// Mean and standard error of per-trial SERs for the chosen decoder.
/// threads = 0 picks the hardware concurrency; results are identical to a
/// sequential run for any thread count. Throws if more than 1% of trials
/// fail to converge.
MonteCarloResult monte_carlo(const SimulationConfig& config,
                             DecoderKind kind = DecoderKind::bro,
                             int threads = 0);

/// Pools error-vector entries over all trials (M = 2, all_ones only) and
/// splits them into the two atoms and an interior histogram. Entries within
/// 1e-6 (M - 1) of 0 or -2 count toward the atoms.
EmpiricalDistribution empirical_error_distribution(
    const SimulationConfig& config, int bins = 40, int threads = 0);

/// Joint error frequency for k-tuples of symbols versus the product of
/// marginals. Within one trial the joint indicator factorizes over the
/// error set, so the k-tuple average over all n^k index tuples equals
/// ser^k exactly; trials are then averaged. k in {2, 3}.
IndependenceStatistic independence_statistic(const SimulationConfig& config,
                                             int order_k, int threads = 0);

}  // namespace boxrelax::sim

#endif  // BOXRELAX_SIM_HPP_
