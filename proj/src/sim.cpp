#include "boxrelax/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace boxrelax::sim {

namespace {

void validate_config(const SimulationConfig& cfg) {
  if (cfg.n < 1) throw std::domain_error("SimulationConfig: n must be >= 1");
  if (cfg.trials < 1) {
    throw std::domain_error("SimulationConfig: trials must be >= 1");
  }
  if (!(cfg.sigma_sq > 0.0)) {
    throw std::domain_error("SimulationConfig: sigma_sq must be positive");
  }
  if (!(cfg.delta > 0.0)) {
    throw std::domain_error("SimulationConfig: delta must be positive");
  }
  const int m = cfg.constellation_order;
  if (m < 2 || (m & (m - 1)) != 0) {
    throw std::domain_error(
        "SimulationConfig: constellation order must be a power of two >= 2");
  }
  if (cfg.signal_mode == SignalMode::all_ones && m != 2) {
    throw std::domain_error(
        "SimulationConfig: all_ones signal mode is defined for M = 2 only");
  }
  if (receive_dim(cfg.n, cfg.delta) < 1) {
    throw std::domain_error("SimulationConfig: delta * n rounds to zero rows");
  }
}

double symbol_error_rate(const Eigen::VectorXi& decoded,
                         const Eigen::VectorXi& sent) {
  int errors = 0;
  for (Eigen::Index i = 0; i < sent.size(); ++i) {
    if (decoded[i] != sent[i]) ++errors;
  }
  return static_cast<double>(errors) / static_cast<double>(sent.size());
}

TrialResult run_trial_kind(const SimulationConfig& cfg, DecoderKind kind,
                           long trial_index) {
  rng::Xoshiro256pp stream(
      rng::substream_seed(cfg.master_seed, static_cast<std::uint64_t>(trial_index)));
  const int m = receive_dim(cfg.n, cfg.delta);

  if (kind == DecoderKind::mfb) {
    // Isolated single-symbol transmission: column, symbol, noise.
    if (cfg.constellation_order != 2) {
      throw TrialFailure(trial_index, "mfb decoder is defined for M = 2 only");
    }
    Eigen::VectorXd column(m);
    const double entry_scale = 1.0 / std::sqrt(static_cast<double>(cfg.n));
    for (int i = 0; i < m; ++i) column[i] = stream.gaussian() * entry_scale;
    int symbol = 1;
    if (cfg.signal_mode == SignalMode::uniform_random) {
      symbol = stream.top_bits(1) ? 1 : -1;
    }
    Eigen::VectorXd obs =
        double(symbol) * column + sample_noise(m, cfg.sigma_sq, stream);
    const int decision = decoders::mfb_detect(column, obs);
    TrialResult result;
    result.ser = decision == symbol ? 0.0 : 1.0;
    result.error_vector = Eigen::VectorXd::Constant(1, double(decision - symbol));
    return result;
  }

  Eigen::MatrixXd a = sample_channel(cfg.n, cfg.delta, stream);
  Eigen::VectorXi x0 =
      sample_symbols(cfg.n, cfg.constellation_order, cfg.signal_mode, stream);
  Eigen::VectorXd z = sample_noise(m, cfg.sigma_sq, stream);
  Eigen::VectorXd y = a * x0.cast<double>() + z;
  decoders::ChannelInstance instance{std::move(a), std::move(y),
                                     cfg.constellation_order};

  TrialResult result;
  switch (kind) {
    case DecoderKind::bro: {
      decoders::DecodeOutput out;
      try {
        out = decoders::bro_solve(instance, cfg.solver_tol,
                                  cfg.solver_max_iter);
      } catch (const decoders::ConvergenceError& err) {
        throw TrialFailure(trial_index, err.what());
      }
      result.ser = symbol_error_rate(out.symbols_x, x0);
      result.error_vector = out.relaxed_x - x0.cast<double>();
      result.iterations = out.iterations;
      result.kkt_residual = out.kkt_residual;
      break;
    }
    case DecoderKind::zf: {
      decoders::DecodeOutput out;
      try {
        out = decoders::zf_solve(instance);
      } catch (const std::exception& err) {
        throw TrialFailure(trial_index, err.what());
      }
      result.ser = symbol_error_rate(out.symbols_x, x0);
      result.error_vector = out.relaxed_x - x0.cast<double>();
      result.kkt_residual = out.kkt_residual;
      break;
    }
    case DecoderKind::ml: {
      Eigen::VectorXi decoded;
      try {
        decoded = decoders::ml_solve(instance);
      } catch (const std::exception& err) {
        throw TrialFailure(trial_index, err.what());
      }
      result.ser = symbol_error_rate(decoded, x0);
      result.error_vector = (decoded - x0).cast<double>();
      break;
    }
    default:
      throw TrialFailure(trial_index, "unknown decoder kind");
  }
  return result;
}

/// Runs trials 0..trials-1 on `threads` workers; results land in a vector
/// indexed by trial, so aggregation order never depends on scheduling.
template <typename PerTrial>
void for_each_trial(const SimulationConfig& cfg, int threads,
                    PerTrial&& body) {
  int worker_count = threads;
  if (worker_count <= 0) {
    worker_count = static_cast<int>(std::thread::hardware_concurrency());
    if (worker_count <= 0) worker_count = 1;
  }
  worker_count = std::min(worker_count, cfg.trials);
  if (worker_count <= 1) {
    for (long i = 0; i < cfg.trials; ++i) body(i);
    return;
  }
  std::atomic<long> next{0};
  auto worker = [&] {
    for (;;) {
      const long i = next.fetch_add(1);
      if (i >= cfg.trials) return;
      body(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(worker_count);
  for (int w = 0; w < worker_count; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

struct TrialSlot {
  TrialResult result;
  bool ok = false;
  std::string error;
};

std::vector<TrialSlot> collect_trials(const SimulationConfig& cfg,
                                      DecoderKind kind, int threads) {
  std::vector<TrialSlot> slots(cfg.trials);
  for_each_trial(cfg, threads, [&](long i) {
    try {
      slots[i].result = run_trial_kind(cfg, kind, i);
      slots[i].ok = true;
    } catch (const std::exception& err) {
      slots[i].error = err.what();
    }
  });
  return slots;
}

}  // namespace

int receive_dim(int n, double delta) {
  return static_cast<int>(std::llround(delta * n));
}

Eigen::MatrixXd sample_channel(int n, double delta,
                               rng::Xoshiro256pp& stream) {
  if (n < 1) throw std::domain_error("sample_channel: n must be >= 1");
  if (!(delta > 0.0)) {
    throw std::domain_error("sample_channel: delta must be positive");
  }
  const int m = receive_dim(n, delta);
  if (m < 1) throw std::domain_error("sample_channel: delta * n rounds to 0");
  Eigen::MatrixXd a(m, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < m; ++i) {
      a(i, j) = stream.gaussian() * scale;
    }
  }
  return a;
}

Eigen::VectorXd sample_noise(int m, double sigma_sq,
                             rng::Xoshiro256pp& stream) {
  if (m < 1) throw std::domain_error("sample_noise: m must be >= 1");
  if (!(sigma_sq >= 0.0)) {
    throw std::domain_error("sample_noise: sigma_sq must be >= 0");
  }
  if (sigma_sq == 0.0) return Eigen::VectorXd::Zero(m);
  Eigen::VectorXd z(m);
  const double sigma = std::sqrt(sigma_sq);
  for (int i = 0; i < m; ++i) z[i] = stream.gaussian() * sigma;
  return z;
}

Eigen::VectorXi sample_symbols(int n, int constellation_order, SignalMode mode,
                               rng::Xoshiro256pp& stream) {
  if (n < 1) throw std::domain_error("sample_symbols: n must be >= 1");
  const int m_order = constellation_order;
  if (m_order < 2 || (m_order & (m_order - 1)) != 0) {
    throw std::domain_error("sample_symbols: invalid constellation order");
  }
  if (mode == SignalMode::all_ones) {
    if (m_order != 2) {
      throw std::domain_error("sample_symbols: all_ones requires M = 2");
    }
    return Eigen::VectorXi::Ones(n);
  }
  int bits = 0;
  while ((1 << (bits + 1)) <= m_order) ++bits;
  Eigen::VectorXi symbols(n);
  for (int i = 0; i < n; ++i) {
    const int index = static_cast<int>(stream.top_bits(bits));
    symbols[i] = 2 * index - (m_order - 1);
  }
  return symbols;
}

TrialResult run_trial(const SimulationConfig& cfg, long trial_index) {
  validate_config(cfg);
  return run_trial_kind(cfg, DecoderKind::bro, trial_index);
}

MonteCarloResult monte_carlo(const SimulationConfig& cfg, DecoderKind kind,
                             int threads) {
  validate_config(cfg);
  if (kind == DecoderKind::ml) {
    const double log2_size = cfg.n * std::log2(double(cfg.constellation_order));
    if (log2_size > 20.0) {
      throw std::domain_error(
          "monte_carlo: ml decoder exceeds the 2^20 search guard");
    }
  }

  const auto slots = collect_trials(cfg, kind, threads);

  MonteCarloResult result;
  result.per_trial.resize(cfg.trials,
                          std::numeric_limits<double>::quiet_NaN());
  long ok_count = 0;
  double sum = 0.0;
  for (int i = 0; i < cfg.trials; ++i) {
    if (slots[i].ok) {
      result.per_trial[i] = slots[i].result.ser;
      sum += slots[i].result.ser;
      ++ok_count;
    } else {
      ++result.failed_trials;
      if (result.first_failure.empty()) result.first_failure = slots[i].error;
    }
  }
  if (result.failed_trials > 0.01 * cfg.trials) {
    throw std::runtime_error(
        "monte_carlo: " + std::to_string(result.failed_trials) + " of " +
        std::to_string(cfg.trials) +
        " trials failed to converge; first: " + result.first_failure);
  }
  result.mean_ser = sum / static_cast<double>(ok_count);
  if (ok_count > 1) {
    double sq = 0.0;
    for (double s : result.per_trial) {
      if (std::isnan(s)) continue;
      sq += (s - result.mean_ser) * (s - result.mean_ser);
    }
    result.std_error = std::sqrt(sq / static_cast<double>(ok_count - 1)) /
                       std::sqrt(static_cast<double>(ok_count));
  }
  return result;
}

EmpiricalDistribution empirical_error_distribution(const SimulationConfig& cfg,
                                                   int bins, int threads) {
  validate_config(cfg);
  if (cfg.constellation_order != 2 ||
      cfg.signal_mode != SignalMode::all_ones) {
    throw std::domain_error(
        "empirical_error_distribution: requires M = 2 with all_ones signals");
  }
  if (bins < 1) {
    throw std::domain_error("empirical_error_distribution: bins must be >= 1");
  }

  const auto slots = collect_trials(cfg, DecoderKind::bro, threads);
  long failed = 0;
  for (const auto& slot : slots) {
    if (!slot.ok) ++failed;
  }
  if (failed > 0.01 * cfg.trials) {
    throw std::runtime_error(
        "empirical_error_distribution: more than 1% of trials failed");
  }

  const double atom_eps = 1e-6 * (cfg.constellation_order - 1);
  long atom_zero = 0;
  long atom_minus_two = 0;
  std::vector<double> interior;
  long total = 0;
  for (const auto& slot : slots) {
    if (!slot.ok) continue;
    const auto& w = slot.result.error_vector;
    total += w.size();
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      if (std::abs(w[i]) <= atom_eps) {
        ++atom_zero;
      } else if (std::abs(w[i] + 2.0) <= atom_eps) {
        ++atom_minus_two;
      } else {
        interior.push_back(w[i]);
      }
    }
  }
  std::sort(interior.begin(), interior.end());

  EmpiricalDistribution dist;
  dist.atom_zero_freq = static_cast<double>(atom_zero) / total;
  dist.atom_minus_two_freq = static_cast<double>(atom_minus_two) / total;
  dist.bin_edges.resize(bins + 1);
  dist.bin_freqs.assign(bins, 0.0);
  for (int b = 0; b <= bins; ++b) {
    dist.bin_edges[b] = -2.0 + 2.0 * b / bins;
  }
  for (double w : interior) {
    int b = static_cast<int>((w + 2.0) / 2.0 * bins);
    b = std::clamp(b, 0, bins - 1);
    dist.bin_freqs[b] += 1.0 / total;
  }
  dist.interior_sorted = std::move(interior);
  const auto samples = dist.interior_sorted;
  dist.interior_samples_cdf = [samples](double w) {
    if (samples.empty()) return 0.0;
    const auto it = std::upper_bound(samples.begin(), samples.end(), w);
    return static_cast<double>(it - samples.begin()) /
           static_cast<double>(samples.size());
  };
  return dist;
}

IndependenceStatistic independence_statistic(const SimulationConfig& cfg,
                                             int order_k, int threads) {
  validate_config(cfg);
  if (cfg.constellation_order != 2 ||
      cfg.signal_mode != SignalMode::all_ones) {
    throw std::domain_error(
        "independence_statistic: requires M = 2 with all_ones signals");
  }
  if (order_k != 2 && order_k != 3) {
    throw std::domain_error("independence_statistic: order_k must be 2 or 3");
  }

  const auto slots = collect_trials(cfg, DecoderKind::bro, threads);
  std::vector<double> joint;
  joint.reserve(cfg.trials);
  double marginal_sum = 0.0;
  for (const auto& slot : slots) {
    if (!slot.ok) continue;
    joint.push_back(std::pow(slot.result.ser, order_k));
    marginal_sum += slot.result.ser;
  }
  if (joint.size() < 0.99 * cfg.trials) {
    throw std::runtime_error(
        "independence_statistic: more than 1% of trials failed");
  }

  IndependenceStatistic stat;
  const double count = static_cast<double>(joint.size());
  for (double j : joint) stat.joint_freq += j;
  stat.joint_freq /= count;
  stat.marginal_freq = marginal_sum / count;
  stat.product_of_marginals = std::pow(stat.marginal_freq, order_k);
  if (joint.size() > 1) {
    double sq = 0.0;
    for (double j : joint) sq += (j - stat.joint_freq) * (j - stat.joint_freq);
    stat.joint_std_error = std::sqrt(sq / (count - 1.0)) / std::sqrt(count);
  }
  return stat;
}

}  // namespace boxrelax::sim
