#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rayleigh/collision_operator.hpp"
#include "rayleigh/slab.hpp"

namespace rayleigh {

struct RunConfig {
  struct {
    int n_v = 16;
    double v_max = 6.0;
  } grid;
  struct {
    std::string backend = "bgk";
    double nu0 = 1.0;
    int angular_order = 8;
    int gamma_angular_order = 0;
    std::size_t matrix_byte_budget = std::size_t{2} << 30;
    std::string cache_dir;
  } collision;
  struct {
    double u_b = 0.05;
    double delta = 0.5;
    std::string kappa_mode = "computed";  ///< computed | fixed
    double kappa = 1.0;                   ///< used when kappa_mode = fixed
  } profile;
  struct {
    int n_x = 200;
    double x_max = 0.0;
    double t_final = 0.5;
    double cfl = 0.5;
    std::string mode = "direct_bgk";
    bool include_Ltilde = true;
    bool include_GammaRR = false;
    int transport_order = 2;
    double output_cadence = 0.05;
    double epsilon = 0.2;
    double beta = 0.125;
  } slab;
  struct {
    std::vector<double> epsilons = {0.4, 0.2, 0.1};
  } sweep;
  struct {
    std::string directory = "out";
  } output;

  std::vector<std::string> warnings;  ///< non-fatal findings of validate()
};

/// Reads an INI file ([section] headers, key = value, '#' or ';' comments) or, for a .json
/// extension, a JSON object of sections. Missing keys keep their defaults; unknown keys and
/// malformed values throw ConfigError carrying the line number when one is known.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_string(const std::string& text, bool json = false);

/// Throws ConfigError naming the offending key; replaces cfg.warnings (small-data regime).
void validate(RunConfig& cfg);

/// Flat "section.key" -> value listing of every setting, in a fixed order.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg);

CollisionSettings collision_settings(const RunConfig& cfg);
SlabConfig slab_config(const RunConfig& cfg, double eps);

}  // namespace rayleigh
