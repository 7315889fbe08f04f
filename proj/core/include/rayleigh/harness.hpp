#pragma once

#include <filesystem>
#include <memory>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "rayleigh/collision_operator.hpp"
#include "rayleigh/config.hpp"
#include "rayleigh/expansion.hpp"
#include "rayleigh/rayleigh_profile.hpp"

namespace rayleigh {

/// Operator, expansion terms and profile for a configuration.
struct Model {
  GridPtr grid;
  OperatorPtr op;
  std::shared_ptr<const ExpansionTerms> terms;
  RayleighProfile profile;
};

/// Builds the operator and, when requested, the expansion terms. The profile viscosity is the
/// operator's kappa; kappa_mode = fixed is accepted only when it agrees to 1e-6 relative.
/// with_gamma = false skips the Gamma pair fields of the sources.
Model build_model(const RunConfig& cfg, bool with_terms = true, bool with_gamma = true);

struct RateFit {
  bool degenerate = false;
  std::string reason;
  double p = 0.0;                ///< least-squares slope of log E against log eps
  std::vector<double> pairwise;  ///< local rates between consecutive eps values
};

/// Throws ConfigError for fewer than 3 pairs; degenerate (not fitted) when some E <= 0.
RateFit fit_rate(const std::vector<std::pair<double, double>>& eps_E);

struct SweepRow {
  double epsilon = 0.0;
  double E = 0.0;
  double M_norm = 0.0;
  double N_norm = 0.0;
  double runtime_s = 0.0;
  bool ok = false;
  std::string error;
};

struct SweepResult {
  std::vector<SweepRow> rows;  ///< eps descending
  RateFit fit;
};

/// Runs the slab solver for every eps of the sweep list, writes sweep.csv, sweep.json and one
/// norms file per eps under out_dir. A failing eps is recorded and the sweep continues.
SweepResult cmd_sweep(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);

struct CheckItem {
  std::string suite;
  std::string name;
  bool passed = false;
  double value = 0.0;
  double limit = 0.0;
  std::string message;
};

struct CheckOptions {
  double beta = 0.125;    ///< weight exponent exercised by the weight suite
  std::uint64_t seed = 20240611;
};

struct CheckReport {
  std::vector<CheckItem> items;
  bool passed() const;
};

/// Invariant suites for grid, weight, operators, profile, expansion, stationary and the cache.
CheckReport cmd_check(const RunConfig& cfg, const CheckOptions& opt, std::ostream& log);
std::string check_report_json(const CheckReport& r);

/// Subcommands writing their outputs under out_dir. Each returns the JSON summary it wrote.
std::string cmd_kappa(const RunConfig& cfg, const std::filesystem::path& out_dir);
std::string cmd_profile(const RunConfig& cfg, const std::filesystem::path& out_dir);
std::string cmd_expansion(const RunConfig& cfg, const std::filesystem::path& out_dir);
std::string cmd_run(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);
std::string cmd_stationary(const RunConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace rayleigh
