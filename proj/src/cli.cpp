#include "boxrelax/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "boxrelax/sim.hpp"
#include "boxrelax/theory.hpp"

namespace boxrelax::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) parts.push_back(trim(item));
  return parts;
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &pos);
  } catch (const std::exception&) {
    throw std::domain_error("config: bad numeric value for '" + key + "'");
  }
  if (pos != value.size()) {
    throw std::domain_error("config: bad numeric value for '" + key + "'");
  }
  return v;
}

long parse_long(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(value, &pos);
  } catch (const std::exception&) {
    throw std::domain_error("config: bad integer value for '" + key + "'");
  }
  if (pos != value.size()) {
    throw std::domain_error("config: bad integer value for '" + key + "'");
  }
  return v;
}

std::string iso8601_utc_now() {
  std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

sim::SignalMode parse_signal_mode(const std::string& name) {
  if (name == "all_ones") return sim::SignalMode::all_ones;
  if (name == "uniform_random") return sim::SignalMode::uniform_random;
  throw std::domain_error("unknown signal_mode '" + name +
                          "' (expected all_ones or uniform_random)");
}

struct SnrPoint {
  double db;
  double linear;
  double sigma_sq;
};

SnrPoint make_snr_point(double db, int m_order) {
  SnrPoint p;
  p.db = db;
  p.linear = std::pow(10.0, db / 10.0);
  p.sigma_sq = theory::sigma_from_snr(p.linear, m_order);
  return p;
}

double require_single_snr(const RunOptions& options) {
  const auto points = parse_snr_points(options.snr_spec);
  if (points.size() != 1) {
    throw std::domain_error(options.command +
                            ": requires a single --snr-db point");
  }
  return points[0];
}

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}
  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) os_ << ',';
      os_ << csv_field(fields[i]);
    }
    os_ << "\r\n";
  }

 private:
  std::ostream& os_;
};

void write_manifest(const RunOptions& options, const std::string& csv_path) {
  std::ofstream out(csv_path + ".manifest");
  if (!out) {
    throw std::runtime_error("cannot write manifest next to " + csv_path);
  }
  out << "# boxrelax run manifest; usable as --config input\n";
  out << "command = " << options.command << "\n";
  out << "artifact_version = " << kArtifactVersion << "\n";
  out << "timestamp = " << iso8601_utc_now() << "\n";
  out << "seed = " << options.master_seed << "\n";
  out << "delta = " << format_real(options.delta) << "\n";
  out << "n = " << options.n << "\n";
  out << "m_order = " << options.m_order << "\n";
  out << "snr_db = " << options.snr_spec << "\n";
  out << "trials = " << options.trials << "\n";
  out << "decoders = " << join(options.decoders, ",") << "\n";
  out << "signal_mode = " << options.signal_mode << "\n";
  out << "order_k = " << options.order_k << "\n";
  out << "bins = " << options.bins << "\n";
  out << "threads = " << options.threads << "\n";
}

/// Runs `body(csv)` against the output file (plus manifest) or stdout.
template <typename Body>
void with_csv_sink(const RunOptions& options, Body&& body) {
  if (options.out_path.empty()) {
    CsvWriter csv(std::cout);
    body(csv);
    return;
  }
  std::ofstream file(options.out_path, std::ios::binary);
  if (!file) {
    throw std::runtime_error("cannot open output file " + options.out_path);
  }
  CsvWriter csv(file);
  body(csv);
  write_manifest(options, options.out_path);
}

sim::SimulationConfig make_sim_config(const RunOptions& options,
                                      double sigma_sq) {
  sim::SimulationConfig cfg;
  cfg.n = options.n;
  cfg.delta = options.delta;
  cfg.constellation_order = options.m_order;
  cfg.sigma_sq = sigma_sq;
  cfg.trials = options.trials;
  cfg.master_seed = options.master_seed;
  cfg.signal_mode = parse_signal_mode(options.signal_mode);
  return cfg;
}

const std::vector<std::string> kSweepDecoders = {
    "bro",        "zf",        "mfb",        "ml",
    "theory-bro", "theory-zf", "theory-mfb", "theory-high-snr"};

}  // namespace

std::map<std::string, std::string> parse_config_text(std::istream& in) {
  std::map<std::string, std::string> config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::domain_error("config line " + std::to_string(line_no) +
                              ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::domain_error("config line " + std::to_string(line_no) +
                              ": empty key");
    }
    config[key] = value;
  }
  return config;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::domain_error("cannot open config file " + path);
  }
  return parse_config_text(in);
}

void apply_config(RunOptions& options,
                  const std::map<std::string, std::string>& config,
                  const std::set<std::string>& overridden) {
  static const std::set<std::string> manifest_only = {
      "command", "artifact_version", "timestamp", "out"};
  for (const auto& [key, value] : config) {
    if (overridden.count(key) || manifest_only.count(key)) continue;
    if (key == "delta") {
      options.delta = parse_double(key, value);
    } else if (key == "n") {
      options.n = static_cast<int>(parse_long(key, value));
    } else if (key == "m_order") {
      options.m_order = static_cast<int>(parse_long(key, value));
    } else if (key == "snr_db") {
      options.snr_spec = value;
    } else if (key == "trials") {
      options.trials = static_cast<int>(parse_long(key, value));
    } else if (key == "decoders") {
      options.decoders = split(value, ',');
    } else if (key == "seed") {
      try {
        options.master_seed = std::stoull(value);
      } catch (const std::exception&) {
        throw std::domain_error("config: bad seed value");
      }
    } else if (key == "signal_mode") {
      options.signal_mode = value;
    } else if (key == "order_k") {
      options.order_k = static_cast<int>(parse_long(key, value));
    } else if (key == "bins") {
      options.bins = static_cast<int>(parse_long(key, value));
    } else if (key == "threads") {
      options.threads = static_cast<int>(parse_long(key, value));
    } else {
      throw std::domain_error("config: unknown key '" + key + "'");
    }
  }
}

std::vector<double> parse_snr_points(const std::string& spec) {
  const auto parts = split(spec, ':');
  if (parts.size() == 1) {
    return {parse_double("snr_db", parts[0])};
  }
  if (parts.size() != 3) {
    throw std::domain_error(
        "snr_db: expected a number or start:stop:step, got '" + spec + "'");
  }
  const double start = parse_double("snr_db", parts[0]);
  const double stop = parse_double("snr_db", parts[1]);
  const double step = parse_double("snr_db", parts[2]);
  if (!(step > 0.0)) {
    throw std::domain_error("snr_db range: step must be positive");
  }
  if (stop < start) {
    throw std::domain_error("snr_db range: stop must be >= start");
  }
  std::vector<double> points;
  for (int i = 0;; ++i) {
    const double v = start + i * step;
    if (v > stop + 1e-9) break;
    points.push_back(v);
  }
  return points;
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& raw) {
  if (raw.find_first_of(",\"\r\n") == std::string::npos) return raw;
  std::string quoted = "\"";
  for (char c : raw) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

int cmd_predict(const RunOptions& options) {
  const double db = require_single_snr(options);
  const SnrPoint snr = make_snr_point(db, options.m_order);
  const theory::AsymptoticRegime regime(options.delta, snr.linear,
                                        options.m_order);
  const theory::TheoryResult result =
      theory::solve_tau_star(regime, snr.sigma_sq);

  std::string mfb_str, zf_str, lower_str, upper_str;
  if (options.m_order == 2) {
    mfb_str = format_real(theory::mfb_ser(regime));
    lower_str = format_real(result.lower_bound);
    upper_str = format_real(result.upper_bound);
  } else {
    upper_str = format_real(result.upper_bound);
  }
  if (options.m_order == 2 && options.delta > 1.0) {
    zf_str = format_real(theory::zf_ser(regime));
  }

  std::cout << "delta            = " << format_real(options.delta) << "\n"
            << "M                = " << options.m_order << "\n"
            << "snr_db           = " << format_real(snr.db) << "\n"
            << "snr_linear       = " << format_real(snr.linear) << "\n"
            << "sigma_sq         = " << format_real(snr.sigma_sq) << "\n"
            << "tau_star         = " << format_real(result.tau_star) << "\n"
            << "predicted_ser    = " << format_real(result.predicted_ser)
            << "\n"
            << "objective_at_min = " << format_real(result.objective_at_min)
            << "\n"
            << "high_snr_ser     = " << format_real(result.high_snr_ser)
            << "\n";
  if (!lower_str.empty()) {
    std::cout << "lower_bound      = " << lower_str << "\n"
              << "upper_bound      = " << upper_str << "\n";
  } else {
    std::cout << "upper_bound      = " << upper_str << "\n";
  }
  if (!mfb_str.empty()) std::cout << "mfb_ser          = " << mfb_str << "\n";
  if (!zf_str.empty()) std::cout << "zf_ser           = " << zf_str << "\n";

  if (!options.out_path.empty()) {
    with_csv_sink(options, [&](CsvWriter& csv) {
      csv.row({"delta", "M", "snr_db", "snr_linear", "sigma_sq", "tau_star",
               "predicted_ser", "lower_bound", "upper_bound", "high_snr_ser",
               "mfb_ser", "zf_ser", "objective_at_min"});
      csv.row({format_real(options.delta), std::to_string(options.m_order),
               format_real(snr.db), format_real(snr.linear),
               format_real(snr.sigma_sq), format_real(result.tau_star),
               format_real(result.predicted_ser), lower_str, upper_str,
               format_real(result.high_snr_ser), mfb_str, zf_str,
               format_real(result.objective_at_min)});
    });
  }
  return 0;
}

int cmd_sweep(const RunOptions& options) {
  for (const auto& name : options.decoders) {
    if (std::find(kSweepDecoders.begin(), kSweepDecoders.end(), name) ==
        kSweepDecoders.end()) {
      throw std::domain_error("unknown decoder '" + name + "' (expected " +
                              join(kSweepDecoders, "|") + ")");
    }
  }
  const auto points_db = parse_snr_points(options.snr_spec);
  const int m = sim::receive_dim(options.n, options.delta);
  const double delta_eff =
      static_cast<double>(m) / static_cast<double>(options.n);

  with_csv_sink(options, [&](CsvWriter& csv) {
    csv.row({"decoder", "n", "m", "delta_effective", "M", "snr_db",
             "snr_linear", "sigma_sq", "trials", "mean_ser", "std_err",
             "theory_ser", "tau_star", "status"});
    for (const auto& decoder : options.decoders) {
      for (double db : points_db) {
        const SnrPoint snr = make_snr_point(db, options.m_order);
        std::vector<std::string> f(14);
        f[0] = decoder;
        f[1] = std::to_string(options.n);
        f[2] = std::to_string(m);
        f[3] = format_real(delta_eff);
        f[4] = std::to_string(options.m_order);
        f[5] = format_real(snr.db);
        f[6] = format_real(snr.linear);
        f[7] = format_real(snr.sigma_sq);
        std::string status = "ok";

        const bool simulated = decoder == "bro" || decoder == "zf" ||
                               decoder == "mfb" || decoder == "ml";
        if (simulated) {
          try {
            sim::DecoderKind kind = sim::DecoderKind::bro;
            if (decoder == "zf") kind = sim::DecoderKind::zf;
            if (decoder == "mfb") kind = sim::DecoderKind::mfb;
            if (decoder == "ml") kind = sim::DecoderKind::ml;
            const auto mc = sim::monte_carlo(make_sim_config(options, snr.sigma_sq),
                                             kind, options.threads);
            f[8] = std::to_string(options.trials);
            f[9] = format_real(mc.mean_ser);
            f[10] = format_real(mc.std_error);
          } catch (const std::exception& err) {
            status = err.what();
          }
        }
        // Matching theory prediction at the effective ratio m/n.
        try {
          const theory::AsymptoticRegime regime(delta_eff, snr.linear,
                                                options.m_order);
          const double sigma_eff =
              theory::sigma_from_snr(snr.linear, options.m_order);
          if (decoder == "bro" || decoder == "theory-bro") {
            const auto th = theory::solve_tau_star(regime, sigma_eff);
            f[11] = format_real(th.predicted_ser);
            f[12] = format_real(th.tau_star);
          } else if (decoder == "zf" || decoder == "theory-zf") {
            f[11] = format_real(theory::zf_ser(regime));
          } else if (decoder == "mfb" || decoder == "theory-mfb") {
            f[11] = format_real(theory::mfb_ser(regime));
          } else if (decoder == "theory-high-snr") {
            f[11] = format_real(theory::high_snr_ser(regime));
          }
        } catch (const std::exception& err) {
          if (status == "ok") {
            status = simulated ? std::string("theory: ") + err.what()
                               : err.what();
          }
        }
        f[13] = status;
        csv.row(f);
      }
    }
  });
  return 0;
}

int cmd_dist(const RunOptions& options) {
  if (options.m_order != 2) {
    throw std::domain_error("dist: defined for M = 2 only");
  }
  const double db = require_single_snr(options);
  const SnrPoint snr = make_snr_point(db, 2);

  RunOptions resolved = options;
  resolved.signal_mode = "all_ones";
  const auto cfg = make_sim_config(resolved, snr.sigma_sq);
  const auto empirical =
      sim::empirical_error_distribution(cfg, options.bins, options.threads);

  const int m = sim::receive_dim(options.n, options.delta);
  const double delta_eff =
      static_cast<double>(m) / static_cast<double>(options.n);
  const theory::AsymptoticRegime regime(delta_eff, snr.linear, 2);
  const auto law = theory::limiting_distribution(regime, snr.sigma_sq);
  const double tau = law.tau_star;

  with_csv_sink(resolved, [&](CsvWriter& csv) {
    csv.row({"kind", "left_edge", "right_edge", "center", "empirical_mass",
             "theory_mass", "empirical_density", "theory_density"});
    csv.row({"atom_zero", "0", "0", "0", format_real(empirical.atom_zero_freq),
             format_real(law.atom_at_zero), "", ""});
    csv.row({"atom_minus_two", "-2", "-2", "-2",
             format_real(empirical.atom_minus_two_freq),
             format_real(law.atom_at_minus_two), "", ""});
    for (std::size_t b = 0; b + 1 < empirical.bin_edges.size(); ++b) {
      const double left = empirical.bin_edges[b];
      const double right = empirical.bin_edges[b + 1];
      const double center = 0.5 * (left + right);
      const double width = right - left;
      // Interior mass between the edges: Q(l/tau) - Q(r/tau).
      const double theory_mass = specfns::q_function(left / tau) -
                                 specfns::q_function(right / tau);
      csv.row({"bin", format_real(left), format_real(right),
               format_real(center), format_real(empirical.bin_freqs[b]),
               format_real(theory_mass),
               format_real(empirical.bin_freqs[b] / width),
               format_real(law.interior_density(center))});
    }
  });
  return 0;
}

int cmd_independence(const RunOptions& options) {
  if (options.m_order != 2) {
    throw std::domain_error("independence: defined for M = 2 only");
  }
  const double db = require_single_snr(options);
  const SnrPoint snr = make_snr_point(db, 2);

  RunOptions resolved = options;
  resolved.signal_mode = "all_ones";
  const auto cfg = make_sim_config(resolved, snr.sigma_sq);
  const auto stat =
      sim::independence_statistic(cfg, options.order_k, options.threads);

  const int m = sim::receive_dim(options.n, options.delta);
  const double delta_eff =
      static_cast<double>(m) / static_cast<double>(options.n);
  const theory::AsymptoticRegime regime(delta_eff, snr.linear, 2);
  const auto th = theory::solve_tau_star(regime, snr.sigma_sq);
  const double theory_marginal = th.predicted_ser;
  const double theory_joint = std::pow(theory_marginal, options.order_k);
  const double z = stat.joint_std_error > 0.0
                       ? (stat.joint_freq - theory_joint) / stat.joint_std_error
                       : 0.0;

  std::cout << "joint_freq           = " << format_real(stat.joint_freq)
            << "\n"
            << "product_of_marginals = "
            << format_real(stat.product_of_marginals) << "\n"
            << "theory_joint         = " << format_real(theory_joint) << "\n"
            << "z_score              = " << format_real(z) << "\n";

  with_csv_sink(resolved, [&](CsvWriter& csv) {
    csv.row({"k", "n", "m", "delta_effective", "M", "snr_db", "snr_linear",
             "sigma_sq", "trials", "joint_freq", "product_of_marginals",
             "theory_joint", "theory_marginal", "z_score", "status"});
    csv.row({std::to_string(options.order_k), std::to_string(options.n),
             std::to_string(m), format_real(delta_eff), "2",
             format_real(snr.db), format_real(snr.linear),
             format_real(snr.sigma_sq), std::to_string(options.trials),
             format_real(stat.joint_freq),
             format_real(stat.product_of_marginals),
             format_real(theory_joint), format_real(theory_marginal),
             format_real(z), "ok"});
  });
  return 0;
}

int run_command(const RunOptions& options) {
  try {
    if (options.command == "predict") return cmd_predict(options);
    if (options.command == "sweep") return cmd_sweep(options);
    if (options.command == "dist") return cmd_dist(options);
    if (options.command == "independence") return cmd_independence(options);
    throw std::domain_error("unknown command '" + options.command + "'");
  } catch (const theory::InfeasibleRegimeError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::domain_error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::length_error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
}

}  // namespace boxrelax::cli
