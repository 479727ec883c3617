#pragma once

#include <string>
#include <vector>

#include "stfe/config.hpp"
#include "stfe/maxreg.hpp"
#include "stfe/solver.hpp"

namespace stfe {

// identifies how random streams are keyed; recorded in every manifest
extern const char* kRngSchemeId;
extern const char* kVersion;

std::string fnv1a64_hex(const std::string& bytes);

void write_diagnostics_csv(const std::string& path,
                           const std::vector<DiagnosticsRow>& rows);

// Run manifest: config echo + content hash, per-path status, RNG scheme.
// Wall-clock data is deliberately absent so outputs are pure functions of
// (config, seed).
std::string manifest_json(const ExperimentConfig& cfg,
                          const std::vector<RunResult>& results);

std::string convergence_json(const ConvergenceReport& temporal,
                             const SpatialConvergenceReport* spatial);
std::string comparison_json(const SchemeComparison& rep);
std::string maxreg_json(const MrRatioReport& mr, const std::string& config_echo);
std::string caccioppoli_json(const CaccioppoliReport& cacc,
                             const std::string& config_echo);

void write_text(const std::string& path, const std::string& text);

}  // namespace stfe
