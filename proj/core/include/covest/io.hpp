#pragma once

// JSON rendering of results and the calibration-table file format. All
// output is deterministic for identical inputs (keys sorted, no
// timestamps), so repeated runs with the same seed are byte-identical.

#include <string>
#include <vector>

#include "covest/hy.hpp"
#include "covest/inference.hpp"
#include "covest/kernel.hpp"
#include "covest/matrix.hpp"
#include "covest/mc.hpp"
#include "covest/sim.hpp"
#include "covest/variance.hpp"

namespace covest {

std::string kernel_constants_json(const Kernel& kernel);

// Point estimate plus optional variance tensor and marginal intervals.
std::string estimate_report_json(const std::vector<std::string>& assets, const CovEstimate& est,
                                 std::size_t n_total, const VarianceTensor* variance,
                                 const ConfidenceRegion* region,
                                 const std::vector<std::string>& warnings);

std::string mc_report_json(const McReport& report);

std::string calibration_json(const CalibrationTable& table);
CalibrationTable parse_calibration(const std::string& json_text);
CalibrationTable load_calibration_file(const std::string& path);

// Manifest for simulate runs: scheme, seed, per-replication output files
// and realized integrated covariations (for later scoring).
std::string simulate_manifest_json(const std::string& scheme_label, std::uint64_t seed,
                                   double gamma, double ma_theta,
                                   const std::vector<std::string>& files,
                                   const std::vector<Matrix>& truths);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

} // namespace covest
