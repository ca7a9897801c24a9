#pragma once

#include <string>
#include <vector>

#include "tcd/config.hpp"

namespace tcd {

// Named ablation presets: tcd, rtg-ts, hc-rtg-ts, far-rtg-ts.
AblationFlags flags_from_preset(const std::string& name);
std::vector<std::string> split_presets(const std::string& s);  // '|'-separated list

// Generates the configured env dataset, writes the binary file (and
// per-trajectory CSVs when csv_dir is non-empty), prints a stats summary.
void cmd_gen_data(const RunConfig& cfg, const std::string& out_path, const std::string& csv_dir = "");

// Trains the denoiser and the inverse-dynamics model on a dataset, writes a
// checkpoint plus newline-delimited JSON run logs ({step, loss, wall_ms}).
void cmd_train(const RunConfig& cfg, const std::string& dataset_path, const std::string& ckpt_path,
               const std::string& log_path);

// Runs closed-loop episodes for every requested flag preset; writes a JSON
// report and per-episode trajectory CSVs under out_dir.
void cmd_eval(const RunConfig& cfg, const std::string& ckpt_path, const std::string& dataset_path,
              const std::string& out_dir);

// Dataset file -> per-trajectory CSVs plus an index with oracle labels and
// template distances; eval report -> flat returns CSV.
void cmd_export(const RunConfig& cfg, const std::string& input_path, const std::string& format,
                const std::string& out_dir);

}  // namespace tcd
