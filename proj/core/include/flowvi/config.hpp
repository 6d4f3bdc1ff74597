#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flowvi/flow.hpp"
#include "flowvi/objectives.hpp"

namespace flowvi {

enum class Objective { ReverseKL, ForwardKL };

enum class ScheduleKind { Constant, Decayed };

/// Constant step size, or one reduced by 10x at the halfway point and again
/// at three quarters of the run.
struct Schedule {
  ScheduleKind kind = ScheduleKind::Constant;
  double base_lr = 3e-4;
  long total_iters = 0;
};

/// Declarative description of one run; the results table is keyed by it.
struct ExperimentConfig {
  std::string target_name = "funnel-2";
  std::uint64_t target_construction_seed = 0;
  FlowConfig flow;  // dim is always taken from the target name suffix
  Objective objective = Objective::ReverseKL;
  Estimator estimator = Estimator::STL;
  Eigen::Index batch_size = 4096;
  Schedule schedule;
  long iterations = 10000;
  std::uint64_t seed = 0;
  Eigen::Index eval_sample_size = 100000;
  Eigen::Index reference_sample_size = 100000;
  std::uint64_t reference_seed = 20177;
  std::vector<long> checkpoint_iters;  // sorted, deduplicated, within [0, iterations]

  /// Throws std::invalid_argument on violated invariants (estimator/objective
  /// pairing, checkpoint range, positive sizes).
  void validate() const;
};

std::string to_string(Objective o);
std::string to_string(Estimator e);
std::string to_string(ScheduleKind k);
Objective parse_objective(const std::string& s);
Estimator parse_estimator(const std::string& s);
ScheduleKind parse_schedule_kind(const std::string& s);

}  // namespace flowvi
