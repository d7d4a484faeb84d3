// Acceptance suite: end-to-end checks of the asymptotic theory against
// Monte Carlo simulation and of the solvers against independent oracles.
// Prints one PASS/FAIL line per criterion and exits non-zero on failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "boxrelax/decoders.hpp"
#include "boxrelax/rng.hpp"
#include "boxrelax/sim.hpp"
#include "boxrelax/specfns.hpp"
#include "boxrelax/theory.hpp"
#include "test_oracles.hpp"

namespace sim = boxrelax::sim;
namespace theory = boxrelax::theory;
namespace decoders = boxrelax::decoders;
using boxrelax::specfns::q_function;

namespace {

constexpr std::uint64_t kSeed = 7;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void fail(const std::string& why) {
    pass = false;
    if (detail.tellp() > 0) detail << "; ";
    detail << why;
  }
  void note(const std::string& text) {
    if (detail.tellp() > 0) detail << "; ";
    detail << text;
  }
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double delta_effective(int n, double delta) {
  return double(sim::receive_dim(n, delta)) / double(n);
}

theory::TheoryResult solve_at(double delta, double snr, int m_order) {
  const theory::AsymptoticRegime regime(delta, snr, m_order);
  return theory::solve_tau_star(regime, theory::sigma_from_snr(snr, m_order));
}

// --- 1. BPSK: Monte Carlo SER tracks Q(1/tau*) ---------------------------
Outcome bpsk_theory_vs_monte_carlo() {
  Outcome out;
  struct Cell {
    double delta;
    double snr_db;
  };
  const std::vector<Cell> cells = {{0.7, 4},  {0.7, 8}, {0.7, 12},
                                   {1.0, 4},  {1.0, 8}, {1.0, 12},
                                   {2.0, 4}};
  double worst_z = 0.0;
  double worst_rel = 0.0;
  for (const auto& cell : cells) {
    const double snr = std::pow(10.0, cell.snr_db / 10.0);
    sim::SimulationConfig cfg;
    cfg.n = 256;
    cfg.delta = cell.delta;
    cfg.constellation_order = 2;
    cfg.sigma_sq = 1.0 / snr;
    cfg.trials = 50;
    cfg.master_seed = kSeed;
    cfg.signal_mode = sim::SignalMode::uniform_random;
    const auto mc = sim::monte_carlo(cfg);
    const double predicted =
        solve_at(delta_effective(cfg.n, cfg.delta), snr, 2).predicted_ser;
    const double z = mc.std_error > 0.0
                         ? std::abs(mc.mean_ser - predicted) / mc.std_error
                         : (mc.mean_ser == predicted ? 0.0 : 1e9);
    worst_z = std::max(worst_z, z);
    if (z > 3.0) {
      out.fail("delta=" + fmt(cell.delta) + " " + fmt(cell.snr_db) +
               "dB: mean " + fmt(mc.mean_ser) + " vs " + fmt(predicted) +
               " is " + fmt(z) + " se away");
    }
    if (predicted > 1e-3) {
      const double rel = std::abs(mc.mean_ser - predicted) / predicted;
      worst_rel = std::max(worst_rel, rel);
      if (rel >= 0.15) {
        out.fail("delta=" + fmt(cell.delta) + " " + fmt(cell.snr_db) +
                 "dB: relative error " + fmt(rel));
      }
    }
  }
  out.note("max |z| = " + fmt(worst_z) + ", max rel err = " + fmt(worst_rel) +
           " over " + std::to_string(cells.size()) + " cells");
  return out;
}

// --- 2. tau* equals a brute-force grid minimization -----------------------
Outcome tau_star_grid_oracle() {
  Outcome out;
  double worst = 0.0;
  for (double delta : {0.6, 0.8, 1.0, 2.0}) {
    for (double snr : {1.0, 4.0, 10.0}) {
      const auto solved = solve_at(delta, snr, 2);
      const theory::AsymptoticRegime regime(delta, snr, 2);
      const double lo = 1.0 / std::sqrt(delta * snr);
      const double hi = 1.0 / std::sqrt((delta - 0.5) * snr);
      const double grid_argmin = testoracle::grid_min(
          [&](double tau) { return theory::f_bpsk(tau, regime); }, lo, hi,
          1e-6);
      const double err = std::abs(solved.tau_star - grid_argmin);
      worst = std::max(worst, err);
      if (err > 1e-5) {
        out.fail("delta=" + fmt(delta) + " snr=" + fmt(snr) + ": |diff| = " +
                 fmt(err));
      }
    }
  }
  out.note("max |tau* - grid argmin| = " + fmt(worst) + " on 12 points");
  return out;
}

// --- 3. closed-form sandwich and high-SNR tightness -----------------------
Outcome bounds_sandwich_and_tightness() {
  Outcome out;
  for (double delta : {0.6, 0.7, 1.0, 2.0}) {
    for (double snr : {1.0, 4.0, 10.0, 100.0}) {
      const auto solved = solve_at(delta, snr, 2);
      const auto [lower, upper] =
          theory::ser_bounds_bpsk(theory::AsymptoticRegime(delta, snr, 2));
      if (!(double(lower) < double(solved.predicted_ser))) {
        out.fail("lower bound not strict at delta=" + fmt(delta) +
                 " snr=" + fmt(snr));
      }
      if (!(double(solved.predicted_ser) <= double(upper) * (1.0 + 1e-12))) {
        out.fail("upper bound violated at delta=" + fmt(delta) +
                 " snr=" + fmt(snr));
      }
    }
  }
  // Monotonicity is judged above the solver's own resolution: the tau*
  // bracket width 1e-12 (1 + tau) moves the ratio by up to ~1e-9.
  double prev = 0.0;
  double final_ratio = 0.0;
  for (double db : {10.0, 15.0, 20.0, 25.0}) {
    const auto solved = solve_at(1.0, std::pow(10.0, db / 10.0), 2);
    const double ratio =
        double(solved.predicted_ser) / double(solved.high_snr_ser);
    if (ratio < prev - 1e-8) {
      out.fail("tightness ratio not monotone at " + fmt(db) + " dB");
    }
    prev = ratio;
    final_ratio = ratio;
  }
  if (!(final_ratio > 0.95)) {
    out.fail("tightness ratio at 25 dB is " + fmt(final_ratio));
  }
  out.note("sandwich on 16 regimes; ratio(25dB) = " + fmt(final_ratio));
  return out;
}

// --- 4. matched-filter and zero-forcing baselines -------------------------
Outcome baseline_mfb_and_zf() {
  Outcome out;
  {
    sim::SimulationConfig cfg;
    cfg.n = 400;
    cfg.delta = 1.0;
    cfg.constellation_order = 2;
    cfg.sigma_sq = 0.25;
    cfg.trials = 100000;
    cfg.master_seed = kSeed;
    cfg.signal_mode = sim::SignalMode::uniform_random;
    const auto mc = sim::monte_carlo(cfg, sim::DecoderKind::mfb);
    const double expected = q_function(2.0);
    const double se = std::sqrt(expected * (1.0 - expected) / cfg.trials);
    const double z = std::abs(mc.mean_ser - expected) / se;
    if (z > 3.0) {
      out.fail("mfb: rate " + fmt(mc.mean_ser) + " vs Q(2) = " +
               fmt(expected) + " is " + fmt(z) + " se away");
    }
    out.note("mfb z = " + fmt(z));
  }
  for (double db : {6.0, 10.0}) {
    const double snr = std::pow(10.0, db / 10.0);
    sim::SimulationConfig cfg;
    cfg.n = 256;
    cfg.delta = 1.5;
    cfg.constellation_order = 2;
    cfg.sigma_sq = 1.0 / snr;
    cfg.trials = 50;
    cfg.master_seed = kSeed;
    cfg.signal_mode = sim::SignalMode::uniform_random;
    const auto mc = sim::monte_carlo(cfg, sim::DecoderKind::zf);
    const double d_eff = delta_effective(cfg.n, cfg.delta);
    const double expected =
        theory::zf_ser(theory::AsymptoticRegime(d_eff, snr, 2));
    const double z = mc.std_error > 0.0
                         ? std::abs(mc.mean_ser - expected) / mc.std_error
                         : 1e9;
    if (z > 3.0) {
      out.fail("zf " + fmt(db) + "dB: mean " + fmt(mc.mean_ser) + " vs " +
               fmt(expected) + " is " + fmt(z) + " se away");
    }
    out.note("zf z(" + fmt(db) + "dB) = " + fmt(z));
  }
  return out;
}

// --- 5. decibel gap identities --------------------------------------------
Outcome db_gap_identities() {
  Outcome out;
  const double mfb_gap = theory::mfb_gap_db(1.0);
  const double zf_gap = theory::zf_gap_db(1.5);
  if (std::abs(mfb_gap - 3.0103) > 5e-5) {
    out.fail("mfb gap at delta=1 is " + fmt(mfb_gap));
  }
  if (std::abs(zf_gap - 3.0103) > 5e-5) {
    out.fail("zf gap at delta=1.5 is " + fmt(zf_gap));
  }
  out.note("mfb gap = " + fmt(mfb_gap) + " dB, zf gap = " + fmt(zf_gap) +
           " dB");
  return out;
}

// --- 6. 4-PAM: Monte Carlo SER tracks 1.5 Q(1/tau*) -----------------------
Outcome mpam_theory_vs_monte_carlo() {
  Outcome out;
  for (double db : {12.0, 16.0}) {
    const double snr = std::pow(10.0, db / 10.0);
    sim::SimulationConfig cfg;
    cfg.n = 256;
    cfg.delta = 1.2;
    cfg.constellation_order = 4;
    cfg.sigma_sq = theory::sigma_from_snr(snr, 4);
    cfg.trials = 50;
    cfg.master_seed = kSeed;
    cfg.signal_mode = sim::SignalMode::uniform_random;
    const auto mc = sim::monte_carlo(cfg);
    const double predicted =
        solve_at(delta_effective(cfg.n, cfg.delta), snr, 4).predicted_ser;
    const double z = mc.std_error > 0.0
                         ? std::abs(mc.mean_ser - predicted) / mc.std_error
                         : 1e9;
    if (z > 3.0) {
      out.fail(fmt(db) + "dB: mean " + fmt(mc.mean_ser) + " vs " +
               fmt(predicted) + " is " + fmt(z) + " se away");
    }
    out.note("z(" + fmt(db) + "dB) = " + fmt(z));
  }
  // Pointwise consistency of the two objectives at M = 2.
  const theory::AsymptoticRegime regime(1.0, 4.0, 2);
  double worst = 0.0;
  for (int i = 0; i <= 50; ++i) {
    const double tau = std::pow(10.0, -1.0 + 2.0 * i / 50.0);
    const double diff = std::abs(2.0 * theory::f_mpam(tau, regime, 0.25) -
                                 theory::f_bpsk(tau, regime));
    worst = std::max(
        worst, diff / std::max(1.0, std::abs(theory::f_bpsk(tau, regime))));
  }
  if (worst > 1e-12) {
    out.fail("2 F_M vs F mismatch " + fmt(worst));
  }
  out.note("max |2 F_M - F| (rel) = " + fmt(worst));
  return out;
}

// --- 7. limiting error-vector distribution --------------------------------
Outcome error_vector_distribution() {
  Outcome out;
  for (double delta : {0.7, 1.0}) {
    sim::SimulationConfig cfg;
    cfg.n = 256;
    cfg.delta = delta;
    cfg.constellation_order = 2;
    cfg.sigma_sq = 0.25;  // snr = 4
    cfg.trials = 200;
    cfg.master_seed = kSeed;
    cfg.signal_mode = sim::SignalMode::all_ones;
    const auto dist = sim::empirical_error_distribution(cfg, 40);

    const double d_eff = delta_effective(cfg.n, cfg.delta);
    const auto law = theory::limiting_distribution(
        theory::AsymptoticRegime(d_eff, 4.0, 2), 0.25);
    const double tau = law.tau_star;

    if (std::abs(dist.atom_zero_freq - 0.5) >= 0.02) {
      out.fail("delta=" + fmt(delta) + ": atom at 0 off by " +
               fmt(std::abs(dist.atom_zero_freq - 0.5)));
    }
    const double atom_minus_two = law.atom_at_minus_two;
    if (std::abs(dist.atom_minus_two_freq - atom_minus_two) >= 0.02) {
      out.fail("delta=" + fmt(delta) + ": atom at -2 off by " +
               fmt(std::abs(dist.atom_minus_two_freq - atom_minus_two)));
    }

    // Kolmogorov-Smirnov distance between the conditional interior CDFs.
    const double interior_mass = 0.5 - double(q_function(2.0 / tau));
    const auto theory_cdf = [&](double w) {
      return (double(q_function(-w / tau)) - double(q_function(2.0 / tau))) /
             interior_mass;
    };
    const auto& samples = dist.interior_sorted;
    double ks = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const double f = theory_cdf(samples[i]);
      ks = std::max(ks, std::abs(f - double(i + 1) / samples.size()));
      ks = std::max(ks, std::abs(f - double(i) / samples.size()));
    }
    if (ks >= 0.03) {
      out.fail("delta=" + fmt(delta) + ": interior CDF sup distance " +
               fmt(ks));
    }
    out.note("delta=" + fmt(delta) + ": atoms (" + fmt(dist.atom_zero_freq) +
             ", " + fmt(dist.atom_minus_two_freq) + "), KS = " + fmt(ks));
  }
  return out;
}

// --- 8. asymptotic independence of error events ----------------------------
Outcome error_event_independence() {
  Outcome out;
  sim::SimulationConfig cfg;
  cfg.n = 256;
  cfg.delta = 1.0;
  cfg.constellation_order = 2;
  cfg.sigma_sq = 0.25;
  cfg.trials = 200;
  cfg.master_seed = kSeed;
  cfg.signal_mode = sim::SignalMode::all_ones;
  const auto stat = sim::independence_statistic(cfg, 2);

  const double d_eff = delta_effective(cfg.n, cfg.delta);
  const double marginal = solve_at(d_eff, 4.0, 2).predicted_ser;
  const double expected = marginal * marginal;
  const double z = stat.joint_std_error > 0.0
                       ? std::abs(stat.joint_freq - expected) /
                             stat.joint_std_error
                       : 1e9;
  if (z > 3.0) {
    out.fail("pairwise joint " + fmt(stat.joint_freq) + " vs " +
             fmt(expected) + " is " + fmt(z) + " se away");
  }
  out.note("joint = " + fmt(stat.joint_freq) + ", theory = " + fmt(expected) +
           ", z = " + fmt(z));
  return out;
}

// --- 9. solver against the exhaustive active-set oracle --------------------
Outcome solver_vs_active_set_oracle() {
  Outcome out;
  const double tol = 1e-9;
  double worst_obj = 0.0;
  int checked = 0;
  const auto run_family = [&](int m, int n, std::uint64_t seed_base,
                              int count) {
    for (int k = 0; k < count; ++k) {
      boxrelax::rng::Xoshiro256pp stream(
          boxrelax::rng::substream_seed(seed_base, k));
      Eigen::MatrixXd a(m, n);
      const double scale = 1.0 / std::sqrt(double(n));
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < m; ++i) a(i, j) = stream.gaussian() * scale;
      }
      Eigen::VectorXd x0(n);
      for (int i = 0; i < n; ++i) x0[i] = stream.top_bits(1) ? 1.0 : -1.0;
      Eigen::VectorXd y = a * x0;
      for (int i = 0; i < m; ++i) y[i] += 0.5 * stream.gaussian();
      const decoders::ChannelInstance inst{a, y, 2};

      const auto solved = decoders::bro_solve(inst, tol);
      const double scale_kkt =
          tol * (1.0 + (a.transpose() * y).norm());
      if (solved.kkt_residual > scale_kkt) {
        out.fail("kkt residual " + fmt(solved.kkt_residual) + " above " +
                 fmt(scale_kkt));
      }
      const auto oracle = testoracle::active_set_box_ls(a, y, 1.0);
      if (oracle.certified_patterns == 0) {
        out.fail("oracle found no KKT pattern on a " + std::to_string(m) +
                 "x" + std::to_string(n) + " instance");
        continue;
      }
      const double solver_obj = (y - a * solved.relaxed_x).norm();
      const double diff = std::abs(solver_obj - oracle.objective_norm);
      worst_obj = std::max(worst_obj, diff);
      if (diff > 1e-8) {
        out.fail("objective differs by " + fmt(diff) + " on a " +
                 std::to_string(m) + "x" + std::to_string(n) + " instance");
      }
      ++checked;
    }
  };
  run_family(10, 10, kSeed + 1000, 25);
  run_family(8, 12, kSeed + 2000, 25);
  out.note(std::to_string(checked) + " instances, max objective diff = " +
           fmt(worst_obj));
  return out;
}

// --- 10. closed-form S against its integral definition ---------------------
Outcome s_term_quadrature_oracle() {
  Outcome out;
  const double ells[] = {1.0, 2.0, 3.0, 4.0, 6.0};
  double worst = 0.0;
  double worst_fd = 0.0;
  int points = 0;
  for (double ell : ells) {
    for (int i = 0; i < 10; ++i) {
      const double alpha = 0.05 * std::pow(20.0 / 0.05, i / 9.0);
      const double closed = theory::s_term(alpha, ell);
      const double integral = testoracle::s_term_integral(alpha, ell);
      const double err =
          std::abs(closed - integral) / std::max(1.0, std::abs(closed));
      worst = std::max(worst, err);
      if (err > 1e-10) {
        out.fail("S(" + fmt(alpha) + "; " + fmt(ell) + ") differs by " +
                 fmt(err));
      }
      const double h = 1e-6;
      if (alpha > 2 * h) {
        const double fd =
            (theory::s_term(alpha + h, ell) - theory::s_term(alpha - h, ell)) /
            (2.0 * h);
        const double d1 = theory::s_term_derivatives(alpha, ell).first;
        const double fd_err = std::abs(fd - d1);
        worst_fd = std::max(worst_fd, fd_err);
        if (fd_err > 1e-6) {
          out.fail("S'(" + fmt(alpha) + "; " + fmt(ell) +
                   ") vs finite difference differs by " + fmt(fd_err));
        }
      }
      ++points;
    }
  }
  out.note(std::to_string(points) + " grid points, max rel err = " +
           fmt(worst) + ", max FD err = " + fmt(worst_fd));
  return out;
}

// --- 11. exhaustive ML never loses to the relaxation ------------------------
Outcome ml_never_worse_than_bro() {
  Outcome out;
  sim::SimulationConfig cfg;
  cfg.n = 8;
  cfg.delta = 1.0;
  cfg.constellation_order = 2;
  cfg.sigma_sq = 0.25;
  cfg.trials = 500;
  cfg.master_seed = kSeed;
  cfg.signal_mode = sim::SignalMode::uniform_random;
  const auto ml = sim::monte_carlo(cfg, sim::DecoderKind::ml);
  const auto bro = sim::monte_carlo(cfg, sim::DecoderKind::bro);
  if (!(ml.mean_ser <= bro.mean_ser)) {
    out.fail("ml mean " + fmt(ml.mean_ser) + " above bro mean " +
             fmt(bro.mean_ser));
  }
  out.note("ml = " + fmt(ml.mean_ser) + ", bro = " + fmt(bro.mean_ser));
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"bpsk theory vs monte carlo", bpsk_theory_vs_monte_carlo},
      {"tau* grid-minimization oracle", tau_star_grid_oracle},
      {"bounds sandwich + high-snr tightness", bounds_sandwich_and_tightness},
      {"mfb and zf baselines", baseline_mfb_and_zf},
      {"decibel gap identities", db_gap_identities},
      {"4-pam theory vs monte carlo", mpam_theory_vs_monte_carlo},
      {"error-vector distribution", error_vector_distribution},
      {"error-event independence", error_event_independence},
      {"solver vs active-set oracle", solver_vs_active_set_oracle},
      {"s-term quadrature oracle", s_term_quadrature_oracle},
      {"ml never worse than bro", ml_never_worse_than_bro},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[i].run();
    } catch (const std::exception& err) {
      outcome.pass = false;
      outcome.detail << "exception: " << err.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (!outcome.pass) ++failures;
    std::printf("[%2zu/%zu] %s  %-38s (%.1fs)  %s\n", i + 1, criteria.size(),
                outcome.pass ? "PASS" : "FAIL", criteria[i].name, secs,
                outcome.detail.str().c_str());
    std::fflush(stdout);
  }
  if (failures == 0) {
    std::printf("ACCEPTANCE: all %zu criteria passed\n", criteria.size());
    return 0;
  }
  std::printf("ACCEPTANCE: %d of %zu criteria FAILED\n", failures,
              criteria.size());
  return 1;
}
