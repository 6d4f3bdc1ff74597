#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "flowvi/config.hpp"
#include "flowvi/optim.hpp"
#include "flowvi/targets.hpp"

namespace flowvi::bench {

struct CheckpointRow {
  long iteration = 0;
  Eigen::Index parallel_evals = 0;  // gradient batch size
  long sequential_evals = 0;        // optimization iterations so far
  double metric = 0.0;
  double baseline = 0.0;
};

struct RunRecord {
  ExperimentConfig config;
  std::uint64_t config_hash = 0;
  std::vector<CheckpointRow> checkpoints;
  std::optional<long> diverged_at;
  double wall_time_s = 0.0;
};

/// The evaluation-counting convention: parallel = batch size, sequential =
/// iterations, regardless of estimator (the STL two-pass cost shows up in
/// wall_time_s instead).
std::pair<Eigen::Index, long> count_evaluations(const ExperimentConfig& config, long iteration);

/// Line-oriented `section.key = value` text; '#' starts a comment.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path,
                                  const std::vector<std::string>& overrides = {});
/// Sorted key = value lines; hashing and run identity use this form.
std::string canonical_config_text(const ExperimentConfig& config);
std::uint64_t config_hash(const ExperimentConfig& config);

/// Output locations. The root comes from FLOWVI_OUTPUT_DIR when set,
/// "./flowvi-out" otherwise; reference samples are cached under it.
struct BenchPaths {
  std::string output_root;
  static BenchPaths detect();
  std::string reference_dir() const;
  std::string results_dir() const;
};

/// Loads the cached exact-sample set for (target, reference seed, size) or
/// creates and persists it; the cache file is hash-checked on load.
SampleMatrix load_or_create_reference(const Target& target, const std::string& target_name,
                                      std::uint64_t reference_seed, Eigen::Index S,
                                      const BenchPaths& paths);

RunRecord run_experiment(const ExperimentConfig& config, const BenchPaths& paths);

enum class SweepAxis { Capacity, Objective, EstimatorBatch, StepSize };
SweepAxis parse_axis(const std::string& name);

/// One run per grid point (times `replicates`), shared reference samples,
/// per-point derived seeds. Grid entries per axis: Capacity "10" (layers),
/// Objective "reverse_kl:stl" / "reverse_kl:total" / "forward_kl",
/// EstimatorBatch "stl:4096" / "total:512", StepSize "3e-4".
/// Individual run failures are reported on stderr and skipped.
std::vector<RunRecord> run_sweep(SweepAxis axis, const ExperimentConfig& base,
                                 const std::vector<std::string>& grid, const BenchPaths& paths,
                                 int replicates = 1);

/// Plot-ready delimited table, one row per checkpoint. All numeric columns
/// use 17 significant digits so a parse reconstructs them exactly.
std::string results_table(const std::vector<RunRecord>& records);
void emit_results(const std::vector<RunRecord>& records, const std::string& out_path);

/// Applies "section.key=value" overrides on top of a parsed config.
ExperimentConfig apply_overrides(const ExperimentConfig& base, const std::vector<std::string>& overrides);

}  // namespace flowvi::bench
