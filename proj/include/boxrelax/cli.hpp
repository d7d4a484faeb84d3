#ifndef BOXRELAX_CLI_HPP_
#define BOXRELAX_CLI_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

// Command-line front end: theory predictions, Monte Carlo sweeps, and
// distribution exports as reproducible CSV artifacts.
//
// CSV dialect is RFC 4180 (CRLF rows, '.' decimal separator) with reals
// printed to 17 significant digits, so every double round-trips exactly.
// Each CSV written to a file is accompanied by a <file>.manifest of
// `key = value` lines recording the fully resolved configuration; the
// manifest is itself a valid config file, so any output can be re-derived
// with `--config <file>.manifest`. The timestamp lives only in the
// manifest: CSV bytes depend only on flags and seed.

namespace boxrelax::cli {

inline constexpr const char* kArtifactVersion = "1.0.0";
inline constexpr std::uint64_t kDefaultSeed = 1;
inline constexpr const char* kSeedEnvVar = "BOXRELAX_SEED";

/// Fully resolved options for one command invocation. Precedence:
/// flags > config file > BOXRELAX_SEED (seed only) > defaults.
struct RunOptions {
  std::string command;
  double delta = 1.0;
  int n = 256;
  int m_order = 2;                 // constellation order M
  std::string snr_spec = "10";    // number or "start:stop:step" in dB
  int trials = 20;
  std::vector<std::string> decoders{"bro", "theory-bro"};
  std::uint64_t master_seed = kDefaultSeed;
  std::string out_path;            // empty: CSV to stdout, no manifest
  std::string signal_mode = "uniform_random";
  int order_k = 2;
  int bins = 40;
  int threads = 0;  // 0: hardware concurrency
};

/// `key = value` lines; '#' starts a comment; blank lines ignored.
/// Throws std::domain_error on malformed lines.
std::map<std::string, std::string> parse_config_text(std::istream& in);
std::map<std::string, std::string> parse_config_file(const std::string& path);

/// Applies known config keys onto options, skipping keys in `overridden`
/// (those came from explicit flags). Unknown keys other than the
/// manifest-only ones (command, artifact_version, timestamp, out) are
/// rejected.
void apply_config(RunOptions& options,
                  const std::map<std::string, std::string>& config,
                  const std::set<std::string>& overridden);

/// Expands "start:stop:step" (stop inclusive up to 1e-9 slack) or a single
/// number into a list of SNR points in dB.
std::vector<double> parse_snr_points(const std::string& spec);

/// Shortest decimal form that round-trips the double (up to 17 significant
/// digits).
std::string format_real(double v);

/// RFC 4180 field quoting.
std::string csv_field(const std::string& raw);

int cmd_predict(const RunOptions& options);
int cmd_sweep(const RunOptions& options);
int cmd_dist(const RunOptions& options);
int cmd_independence(const RunOptions& options);

/// Maps an exception to the documented exit codes: 2 for invalid or
/// infeasible configuration, 1 for runtime/convergence failures.
int run_command(const RunOptions& options);

}  // namespace boxrelax::cli

#endif  // BOXRELAX_CLI_HPP_
