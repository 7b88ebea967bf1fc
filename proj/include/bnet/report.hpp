#pragma once

#include <string>

#include "bnet/simulate.hpp"
#include "bnet/stress.hpp"

#include "json.hpp"

namespace bnet {

// Scenario file: {"overrides": {id: dist}, "swaps": {id: model path},
// "ablate": [id...], "reps", "samples", "bins", "seed"}. Swap paths resolve
// relative to `base_dir`.
Scenario scenario_from_json(const nlohmann::json& j, const std::string& base_dir);

nlohmann::json histogram_to_json(const Histogram& h);
Histogram histogram_from_json(const nlohmann::json& j);

nlohmann::json simulation_to_json(const SimulationResult& sim);
SimulationResult simulation_from_json(const nlohmann::json& j);

// Infinite KL serializes as the string "inf".
nlohmann::json stress_report_to_json(const StressReport& report);
StressReport stress_report_from_json(const nlohmann::json& j);

// bin_lo,bin_hi,count,frequency rows for plotting.
void write_histogram_csv(const Histogram& h, const std::string& path);

// Human-readable digest of either report kind ("simulation" / "stress").
std::string summarize_report(const nlohmann::json& j);

}  // namespace bnet
