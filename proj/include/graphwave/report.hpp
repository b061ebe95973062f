#pragma once

#include <filesystem>

#include <json.hpp>

#include "graphwave/scenario.hpp"

namespace graphwave {

/// report.json content: resolved config, per-robot ATE, constraint census,
/// broadcast sizes, and solver statistics.
nlohmann::ordered_json report_json(const RunReport& report);

/// Writes report.json, robot<id>_{onboard,corrected,ground_truth}.tum,
/// constraints.csv, broadcast_sizes.csv and events.jsonl into `out_dir`,
/// overwriting earlier files. Throws Error on I/O failure.
void emit_report(const RunReport& report, const std::filesystem::path& out_dir);

/// ATE of an estimate against ground truth, both TUM files.
AteReport eval_trajectories(const std::filesystem::path& estimate,
                            const std::filesystem::path& ground_truth, bool align);

}  // namespace graphwave
