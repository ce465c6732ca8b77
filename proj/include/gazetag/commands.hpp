#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gazetag/config.hpp"

namespace gazetag {

// Subcommand entry points used by the CLI binary and the acceptance suite.
// All of them throw on failure; outputs land in the config's out.dir.
// Re-running with an identical config and seed rewrites identical bytes.
//
// Config keys (CLI flags override file entries):
//   data.fixations / data.gaze / data.metadata / data.genders
//   data.scenario_s95 / data.scenario_s296 / data.scenario_s382
//   out.dir, seed, jobs
//   events.dispersion_px, events.min_duration_ms, events.max_gap_ms
//   features.kernel_sigma_frac, features.hist_duration_max_ms,
//   features.hist_length_max_px, features.hist_range_mode (global|dataset),
//   features.hist_normalize
//   protocol.repetitions, protocol.balance, protocol.c_grid (';' separated)
//   eval.l1_normalize
//   sweep.n_values (';' separated), sweep.subsets_per_n
//   synth.* (see cmd_synth)

/// Builds the requested gaze feature channels and writes one CSV per kind.
/// Fixations come from data.fixations, or are detected from data.gaze when
/// only raw samples are available. Returns the written files.
std::vector<std::filesystem::path> cmd_features(const KeyValueConfig& config,
                                                const std::vector<std::string>& kinds);

struct EvalOptions {
    std::vector<std::filesystem::path> channels;
    std::string scenario;       // "", "s95", "s296" or "s382"
    bool fuse = false;          // late-fuse all given channels
    bool sweep_observers = false;
    bool classemes = false;     // 1000-dim co-occurrence analysis
};

std::vector<std::filesystem::path> cmd_eval(const KeyValueConfig& config,
                                            const EvalOptions& options);

/// Descriptive statistics tables: per-class fixation counts, one-way ANOVA
/// and Tukey-Kramer post-hoc per measure, grouped summaries with box-plot
/// quartiles (by emotion class, and by gender when the sidecar is given).
std::vector<std::filesystem::path> cmd_stats(const KeyValueConfig& config);

/// Generates a synthetic dataset directory (fixation log, metadata, ledger,
/// optionally a raw gaze timeline) from synth.* scenario keys.
std::vector<std::filesystem::path> cmd_synth(const KeyValueConfig& config);

/// Parses every input named in the config and reports row counts; any
/// malformed file aborts with its parse error.
std::vector<std::filesystem::path> cmd_ingest_validate(const KeyValueConfig& config);

}  // namespace gazetag
