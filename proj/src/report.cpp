#include "stfe/report.hpp"

#include <fstream>

#include "json.hpp"

namespace stfe {

const char* kRngSchemeId = "counter-splitmix64-boxmuller/dyadic-bridge-v1";
const char* kVersion = "0.1.0";

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << text;
}

void write_diagnostics_csv(const std::string& path,
                           const std::vector<DiagnosticsRow>& rows) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << kDiagnosticsHeader << "\n";
  for (const auto& r : rows) os << format_diagnostics_row(r) << "\n";
}

namespace {

using nlohmann::json;

json status_json(const RunResult& r) {
  json j;
  j["status"] = r.status == RunResult::Status::Completed ? "completed" : "blow_up";
  j["steps_accepted"] = r.steps_accepted;
  j["steps_rejected"] = r.steps_rejected;
  if (r.blow_up) {
    j["blow_up"] = {{"t", r.blow_up->t},
                    {"min_u", r.blow_up->min_u},
                    {"h1_norm", r.blow_up->h1_norm},
                    {"reason", r.blow_up->reason}};
  }
  return j;
}

}  // namespace

std::string manifest_json(const ExperimentConfig& cfg,
                          const std::vector<RunResult>& results) {
  json j;
  j["version"] = kVersion;
  j["rng_scheme"] = kRngSchemeId;
  j["config_echo"] = cfg.raw_text;
  j["config_hash_fnv1a64"] = fnv1a64_hex(cfg.raw_text);
  j["seed"] = cfg.sim.seed;
  j["paths"] = cfg.sim.paths;
  json per_path = json::array();
  for (const auto& r : results) per_path.push_back(status_json(r));
  j["path_status"] = per_path;
  return j.dump(2) + "\n";
}

std::string convergence_json(const ConvergenceReport& temporal,
                             const SpatialConvergenceReport* spatial) {
  json j;
  j["temporal"] = {{"level_dt", temporal.level_dt},
                   {"mean_l2_gap", temporal.mean_l2_gap},
                   {"fitted_order", temporal.fitted_order},
                   {"paths_used", temporal.paths_used},
                   {"paths_excluded", temporal.paths_excluded}};
  if (spatial) {
    j["spatial"] = {{"level_n", spatial->level_n},
                    {"l2_gap", spatial->l2_gap},
                    {"fitted_order", spatial->fitted_order}};
  }
  return j.dump(2) + "\n";
}

std::string comparison_json(const SchemeComparison& rep) {
  json j;
  j["bit_equal"] = rep.bit_equal;
  j["level_dt"] = rep.level_dt;
  j["heun_gap"] = rep.heun_gap;
  j["fitted_order"] = rep.fitted_order;
  j["paths_used"] = rep.paths_used;
  j["paths_excluded"] = rep.paths_excluded;
  return j.dump(2) + "\n";
}

std::string maxreg_json(const MrRatioReport& mr, const std::string& config_echo) {
  json j;
  j["config_echo"] = config_echo;
  j["mr_ratio"] = {{"lambda", mr.lambda},
                   {"trials", mr.trials},
                   {"pieces", mr.pieces},
                   {"modes", mr.k_modes},
                   {"n_t", mr.n_t},
                   {"T", mr.T},
                   {"p", mr.p},
                   {"q", mr.q},
                   {"kappa", mr.kappa},
                   {"ratios", mr.ratios},
                   {"max", mr.max_r},
                   {"min", mr.min_r},
                   {"mean", mr.mean_r},
                   {"spread", mr.spread},
                   {"max_rel_change_nt_doubling", mr.max_rel_change_nt_doubling}};
  return j.dump(2) + "\n";
}

std::string caccioppoli_json(const CaccioppoliReport& cacc,
                             const std::string& config_echo) {
  json j;
  j["config_echo"] = config_echo;
  j["caccioppoli"] = {{"lambda", cacc.lambda},
                      {"trials", cacc.trials},
                      {"cubes_per_trial", cacc.cubes_per_trial},
                      {"modes", cacc.k_modes},
                      {"T", cacc.T},
                      {"scales", cacc.scales},
                      {"max_ratio", cacc.max_ratio},
                      {"cross_scale_spread", cacc.cross_scale_spread}};
  return j.dump(2) + "\n";
}

}  // namespace stfe
