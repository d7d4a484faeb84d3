#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "boxrelax/cli.hpp"

namespace {

struct RawFlags {
  double delta = 0.0;
  int n = 0;
  int m_order = 0;
  double snr_db = 0.0;
  std::string snr_db_range;
  int trials = 0;
  std::string decoders;
  std::uint64_t seed = 0;
  std::string out;
  std::string config;
  std::string signal_mode;
  int order_k = 0;
  int bins = 0;
  int threads = 0;
};

void add_flags(CLI::App* sub, RawFlags& raw) {
  sub->add_option("--delta", raw.delta,
                  "Receive/transmit antenna ratio m/n");
  sub->add_option("--n", raw.n, "Number of transmit antennas");
  sub->add_option("--m-order", raw.m_order,
                  "Constellation order M (power of two)");
  auto* snr = sub->add_option("--snr-db", raw.snr_db, "SNR point in dB");
  auto* range = sub->add_option("--snr-db-range", raw.snr_db_range,
                                "SNR sweep start:stop:step in dB");
  snr->excludes(range);
  range->excludes(snr);
  sub->add_option("--trials", raw.trials, "Monte Carlo trials");
  sub->add_option("--decoders", raw.decoders,
                  "Comma list: bro,zf,mfb,ml,theory-bro,theory-zf,"
                  "theory-mfb,theory-high-snr");
  sub->add_option("--seed", raw.seed, "Master seed (overrides BOXRELAX_SEED)");
  sub->add_option("--out", raw.out, "Output CSV path (manifest written beside)");
  sub->add_option("--config", raw.config, "key = value config file");
  sub->add_option("--signal-mode", raw.signal_mode,
                  "all_ones | uniform_random");
  sub->add_option("--order-k", raw.order_k, "Joint error order k (2 or 3)");
  sub->add_option("--bins", raw.bins, "Histogram bins for dist");
  sub->add_option("--threads", raw.threads,
                  "Worker threads (0 = hardware concurrency)");
}

boxrelax::cli::RunOptions resolve_options(const CLI::App* sub,
                                          const RawFlags& raw) {
  namespace cli = boxrelax::cli;
  cli::RunOptions options;
  options.command = sub->get_name();

  if (const char* env = std::getenv(cli::kSeedEnvVar)) {
    options.master_seed = std::stoull(env);
  }

  const auto passed = [&](const std::string& flag) {
    return sub->count(flag) > 0;
  };

  std::set<std::string> overridden;
  if (passed("--delta")) overridden.insert("delta");
  if (passed("--n")) overridden.insert("n");
  if (passed("--m-order")) overridden.insert("m_order");
  if (passed("--snr-db") || passed("--snr-db-range")) {
    overridden.insert("snr_db");
  }
  if (passed("--trials")) overridden.insert("trials");
  if (passed("--decoders")) overridden.insert("decoders");
  if (passed("--seed")) overridden.insert("seed");
  if (passed("--signal-mode")) overridden.insert("signal_mode");
  if (passed("--order-k")) overridden.insert("order_k");
  if (passed("--bins")) overridden.insert("bins");
  if (passed("--threads")) overridden.insert("threads");

  if (!raw.config.empty()) {
    cli::apply_config(options, cli::parse_config_file(raw.config), overridden);
  }

  if (passed("--delta")) options.delta = raw.delta;
  if (passed("--n")) options.n = raw.n;
  if (passed("--m-order")) options.m_order = raw.m_order;
  if (passed("--snr-db")) options.snr_spec = cli::format_real(raw.snr_db);
  if (passed("--snr-db-range")) options.snr_spec = raw.snr_db_range;
  if (passed("--trials")) options.trials = raw.trials;
  if (passed("--decoders")) {
    options.decoders.clear();
    std::string item;
    std::istringstream in(raw.decoders);
    while (std::getline(in, item, ',')) options.decoders.push_back(item);
  }
  if (passed("--seed")) options.master_seed = raw.seed;
  if (passed("--signal-mode")) options.signal_mode = raw.signal_mode;
  if (passed("--order-k")) options.order_k = raw.order_k;
  if (passed("--bins")) options.bins = raw.bins;
  if (passed("--threads")) options.threads = raw.threads;
  if (passed("--out")) options.out_path = raw.out;

  return options;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "boxrelax: box-relaxation MIMO decoding, asymptotic SER theory, and "
      "Monte Carlo validation"};
  app.set_version_flag("--version", boxrelax::cli::kArtifactVersion);
  app.require_subcommand(1);

  RawFlags raw;
  CLI::App* predict = app.add_subcommand(
      "predict", "Asymptotic predictions for one (delta, SNR, M) point");
  CLI::App* sweep = app.add_subcommand(
      "sweep", "CSV of decoder SER versus SNR, simulation and theory");
  CLI::App* dist = app.add_subcommand(
      "dist", "Empirical error-vector distribution with theory overlay");
  CLI::App* independence = app.add_subcommand(
      "independence", "Joint error frequency versus product of marginals");
  for (CLI::App* sub : {predict, sweep, dist, independence}) {
    add_flags(sub, raw);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    return boxrelax::cli::run_command(resolve_options(sub, raw));
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
}
