#include "flowvi/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "flowvi/io.hpp"
#include "flowvi/metrics.hpp"

namespace flowvi::bench {

namespace {

// rng stream labels for evaluation plumbing
constexpr std::uint64_t kReferenceStream = 0xF0;
constexpr std::uint64_t kEvalSubsampleStream = 0xE5;
constexpr std::uint64_t kBaselineStream = 0xBA;

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::map<std::string, std::string> parse_kv(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) + " is not key = value: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("config line " + std::to_string(line_no) + " has an empty key");
    kv[key] = value;
  }
  return kv;
}

std::vector<long> parse_long_csv(const std::string& s) {
  std::vector<long> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(std::stol(item));
  }
  return out;
}

std::map<std::string, std::string> config_to_kv(const ExperimentConfig& c) {
  std::map<std::string, std::string> kv;
  kv["target.name"] = c.target_name;
  kv["target.construction_seed"] = std::to_string(c.target_construction_seed);
  kv["flow.layers"] = std::to_string(c.flow.num_coupling_layers);
  kv["flow.hidden"] = std::to_string(c.flow.hidden_units);
  kv["objective"] = to_string(c.objective);
  kv["estimator"] = to_string(c.estimator);
  kv["batch"] = std::to_string(c.batch_size);
  kv["lr.base"] = format_g17(c.schedule.base_lr);
  kv["lr.schedule"] = to_string(c.schedule.kind);
  kv["iterations"] = std::to_string(c.iterations);
  kv["seed"] = std::to_string(c.seed);
  kv["eval.samples"] = std::to_string(c.eval_sample_size);
  kv["reference.samples"] = std::to_string(c.reference_sample_size);
  kv["reference.seed"] = std::to_string(c.reference_seed);
  std::string cp;
  for (std::size_t i = 0; i < c.checkpoint_iters.size(); ++i) {
    if (i) cp += ",";
    cp += std::to_string(c.checkpoint_iters[i]);
  }
  kv["checkpoints"] = cp;
  return kv;
}

ExperimentConfig kv_to_config(const std::map<std::string, std::string>& kv) {
  ExperimentConfig c;
  auto get = [&](const char* key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  for (const auto& [key, value] : kv) {
    static const std::vector<std::string> known = {
        "target.name", "target.construction_seed", "flow.layers", "flow.hidden",
        "objective",   "estimator",                "batch",       "lr.base",
        "lr.schedule", "iterations",               "seed",        "eval.samples",
        "reference.samples", "reference.seed",     "checkpoints"};
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw std::invalid_argument("unknown config key: " + key + " = " + value);
  }
  if (const auto* v = get("target.name")) c.target_name = *v;
  if (const auto* v = get("target.construction_seed")) c.target_construction_seed = std::stoull(*v);
  if (const auto* v = get("flow.layers")) c.flow.num_coupling_layers = std::stol(*v);
  if (const auto* v = get("flow.hidden")) c.flow.hidden_units = std::stol(*v);
  if (const auto* v = get("objective")) c.objective = parse_objective(*v);
  if (const auto* v = get("estimator")) c.estimator = parse_estimator(*v);
  if (const auto* v = get("batch")) c.batch_size = std::stol(*v);
  if (const auto* v = get("lr.base")) c.schedule.base_lr = std::stod(*v);
  if (const auto* v = get("lr.schedule")) c.schedule.kind = parse_schedule_kind(*v);
  if (const auto* v = get("iterations")) c.iterations = std::stol(*v);
  if (const auto* v = get("seed")) c.seed = std::stoull(*v);
  if (const auto* v = get("eval.samples")) c.eval_sample_size = std::stol(*v);
  if (const auto* v = get("reference.samples")) c.reference_sample_size = std::stol(*v);
  if (const auto* v = get("reference.seed")) c.reference_seed = std::stoull(*v);

  c.flow.dim = parse_target_name(c.target_name).dim;
  c.schedule.total_iters = c.iterations;

  if (const auto* v = get("checkpoints"); v && !trim(*v).empty()) {
    c.checkpoint_iters = parse_long_csv(*v);
  } else {
    c.checkpoint_iters = {0, c.iterations};
  }
  std::sort(c.checkpoint_iters.begin(), c.checkpoint_iters.end());
  c.checkpoint_iters.erase(std::unique(c.checkpoint_iters.begin(), c.checkpoint_iters.end()),
                           c.checkpoint_iters.end());
  c.validate();
  return c;
}

}  // namespace

std::pair<Eigen::Index, long> count_evaluations(const ExperimentConfig& config, long iteration) {
  if (iteration < 0 || iteration > config.iterations)
    throw std::invalid_argument("count_evaluations: iteration outside [0, iterations]");
  return {config.batch_size, iteration};
}

ExperimentConfig parse_config_text(const std::string& text) { return kv_to_config(parse_kv(text)); }

ExperimentConfig apply_overrides(const ExperimentConfig& base, const std::vector<std::string>& overrides) {
  auto kv = config_to_kv(base);
  for (const std::string& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("override is not key=value: " + ov);
    kv[trim(ov.substr(0, eq))] = trim(ov.substr(eq + 1));
  }
  return kv_to_config(kv);
}

ExperimentConfig load_config_file(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  ExperimentConfig c = parse_config_text(text.str());
  if (!overrides.empty()) c = apply_overrides(c, overrides);
  return c;
}

std::string canonical_config_text(const ExperimentConfig& config) {
  std::string out;
  for (const auto& [k, v] : config_to_kv(config)) out += k + " = " + v + "\n";
  return out;
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  const std::string text = canonical_config_text(config);
  return io::fnv1a64(text.data(), text.size());
}

BenchPaths BenchPaths::detect() {
  BenchPaths p;
  const char* env = std::getenv("FLOWVI_OUTPUT_DIR");
  p.output_root = (env && *env) ? env : "./flowvi-out";
  return p;
}

std::string BenchPaths::reference_dir() const { return output_root + "/reference"; }
std::string BenchPaths::results_dir() const { return output_root + "/results"; }

SampleMatrix load_or_create_reference(const Target& target, const std::string& target_name,
                                      std::uint64_t reference_seed, Eigen::Index S,
                                      const BenchPaths& paths) {
  std::filesystem::create_directories(paths.reference_dir());
  const std::string path = paths.reference_dir() + "/" + target_name + "_seed" +
                           std::to_string(reference_seed) + "_n" + std::to_string(S) + ".bin";
  if (std::filesystem::exists(path) && std::filesystem::exists(path + ".json")) {
    io::MatrixFileMeta meta;
    const SampleMatrix cached = io::read_matrix_file(path, &meta);  // hash-checked
    if (cached.rows() == S && cached.cols() == target.dim()) return cached;
  }
  RngState rng = RngState(reference_seed).split(kReferenceStream);
  const SampleMatrix fresh = target.exact_sample(rng, S);
  io::MatrixFileMeta meta;
  meta.kind = "reference-samples";
  meta.seed = reference_seed;
  meta.target = target_name;
  io::write_matrix_file(path, fresh, meta);
  return fresh;
}

RunRecord run_experiment(const ExperimentConfig& config, const BenchPaths& paths) {
  config.validate();
  const auto t_start = std::chrono::steady_clock::now();

  const Target target = build_target_by_name(config.target_name, config.target_construction_seed);
  if (config.flow.dim != target.dim())
    throw std::invalid_argument("run_experiment: flow dimension must come from the target name");

  const SampleMatrix reference = load_or_create_reference(
      target, config.target_name, config.reference_seed, config.reference_sample_size, paths);

  const Eigen::Index n_eval = std::min<Eigen::Index>(config.eval_sample_size, reference.rows());
  RngState sub_rng = RngState(config.reference_seed).split(kEvalSubsampleStream);
  const SampleMatrix eval_reference = subsample_rows(reference, n_eval, sub_rng);
  RngState baseline_rng = RngState(config.reference_seed).split(kBaselineStream);
  const double baseline = baseline_value(target, baseline_rng, n_eval);

  EvalContext eval{&eval_reference, n_eval};
  const TrainResult tr = train(config, target, RngState(config.seed), &eval);

  RunRecord record;
  record.config = config;
  record.config_hash = config_hash(config);
  record.diverged_at = tr.diverged_at;
  for (const MetricCheckpoint& mc : tr.metric_checkpoints) {
    const auto [parallel, sequential] = count_evaluations(config, mc.iteration);
    record.checkpoints.push_back({mc.iteration, parallel, sequential, mc.value, baseline});
  }
  record.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return record;
}

SweepAxis parse_axis(const std::string& name) {
  if (name == "capacity") return SweepAxis::Capacity;
  if (name == "objective") return SweepAxis::Objective;
  if (name == "estimator-batch") return SweepAxis::EstimatorBatch;
  if (name == "step-size") return SweepAxis::StepSize;
  throw std::invalid_argument("unknown sweep axis: " + name +
                              " (expected capacity | objective | estimator-batch | step-size)");
}

namespace {

ExperimentConfig apply_grid_point(SweepAxis axis, ExperimentConfig c, const std::string& entry) {
  switch (axis) {
    case SweepAxis::Capacity:
      c.flow.num_coupling_layers = std::stol(entry);
      break;
    case SweepAxis::Objective: {
      const auto colon = entry.find(':');
      const std::string obj = entry.substr(0, colon);
      c.objective = parse_objective(obj);
      if (c.objective == Objective::ForwardKL) {
        c.estimator = Estimator::ForwardKL;
      } else if (colon != std::string::npos) {
        c.estimator = parse_estimator(entry.substr(colon + 1));
      } else if (c.estimator == Estimator::ForwardKL) {
        c.estimator = Estimator::STL;
      }
      break;
    }
    case SweepAxis::EstimatorBatch: {
      const auto colon = entry.find(':');
      if (colon == std::string::npos)
        throw std::invalid_argument("estimator-batch grid entries look like stl:4096, got: " + entry);
      c.estimator = parse_estimator(entry.substr(0, colon));
      c.objective = (c.estimator == Estimator::ForwardKL) ? Objective::ForwardKL : Objective::ReverseKL;
      c.batch_size = std::stol(entry.substr(colon + 1));
      break;
    }
    case SweepAxis::StepSize:
      c.schedule.base_lr = std::stod(entry);
      break;
  }
  return c;
}

}  // namespace

std::vector<RunRecord> run_sweep(SweepAxis axis, const ExperimentConfig& base,
                                 const std::vector<std::string>& grid, const BenchPaths& paths,
                                 int replicates) {
  if (replicates < 1) throw std::invalid_argument("run_sweep: replicates must be >= 1");
  std::vector<RunRecord> records;
  RngState seed_root(base.seed);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (int r = 0; r < replicates; ++r) {
      try {
        ExperimentConfig point = apply_grid_point(axis, base, grid[i]);
        point.seed = seed_root.split(i).split(static_cast<std::uint64_t>(r)).key();
        point.validate();
        records.push_back(run_experiment(point, paths));
      } catch (const std::exception& err) {
        std::cerr << "sweep point '" << grid[i] << "' replicate " << r << " failed: " << err.what()
                  << "\n";
      }
    }
  }
  return records;
}

std::string results_table(const std::vector<RunRecord>& records) {
  std::string out =
      "target,dim,layers,hidden,objective,estimator,batch,lr,schedule,iteration,"
      "parallel_evals,sequential_evals,metric,baseline,diverged,wall_time_s\n";
  for (const RunRecord& rec : records) {
    const ExperimentConfig& c = rec.config;
    for (const CheckpointRow& row : rec.checkpoints) {
      out += c.target_name + "," + std::to_string(c.flow.dim) + "," +
             std::to_string(c.flow.num_coupling_layers) + "," + std::to_string(c.flow.hidden_units) +
             "," + to_string(c.objective) + "," + to_string(c.estimator) + "," +
             std::to_string(c.batch_size) + "," + format_g17(c.schedule.base_lr) + "," +
             to_string(c.schedule.kind) + "," + std::to_string(row.iteration) + "," +
             std::to_string(row.parallel_evals) + "," + std::to_string(row.sequential_evals) + "," +
             format_g17(row.metric) + "," + format_g17(row.baseline) + "," +
             (rec.diverged_at ? "1" : "0") + "," + format_g17(rec.wall_time_s) + "\n";
    }
  }
  return out;
}

void emit_results(const std::vector<RunRecord>& records, const std::string& out_path) {
  if (records.empty()) throw std::invalid_argument("emit_results: no records");
  const std::filesystem::path p(out_path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  io::write_text_atomic(out_path, results_table(records));
}

}  // namespace flowvi::bench
