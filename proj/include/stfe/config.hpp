#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "stfe/solver.hpp"
#include "stfe/toml.hpp"

namespace stfe {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MaxregConfig {
  double lambda = 2.0;
  int trials = 100;
  int pieces = 16;
  double T = 1.0;
  int k_modes = 32;
  double p = 4.0;
  double q = 2.0;
  double kappa = 0.0;
  int n_t = 512;
  double cacc_lambda = 2.0;
  int cacc_trials = 50;
  std::vector<double> cacc_scales = {1e-4, 4e-4, 1.6e-3};
};

// Parsed and schema-checked experiment description. Unknown tables or keys
// are hard errors.
struct ExperimentConfig {
  SimConfig sim;
  MaxregConfig maxreg;
  std::string raw_text;  // byte-exact config echo for the manifest
};

ExperimentConfig config_from_toml(const toml::Document& doc,
                                  std::string raw_text);
ExperimentConfig load_config(const std::string& path);

// Canonical TOML emission; round-trips through config_from_toml.
std::string to_toml(const ExperimentConfig& cfg);

}  // namespace stfe
