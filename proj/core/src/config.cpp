#include "flowvi/config.hpp"

#include <algorithm>
#include <stdexcept>

namespace flowvi {

void ExperimentConfig::validate() const {
  if (iterations < 0) throw std::invalid_argument("config: iterations must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("config: batch size must be >= 1");
  if (eval_sample_size < 2) throw std::invalid_argument("config: eval sample size must be >= 2");
  if (reference_sample_size < 2) throw std::invalid_argument("config: reference sample size must be >= 2");
  if (!(schedule.base_lr > 0.0)) throw std::invalid_argument("config: base learning rate must be > 0");
  if (schedule.total_iters != iterations)
    throw std::invalid_argument("config: schedule length must match the iteration count");
  if ((estimator == Estimator::ForwardKL) != (objective == Objective::ForwardKL))
    throw std::invalid_argument("config: the forward-KL objective pairs only with its own estimator");
  for (long c : checkpoint_iters) {
    if (c < 0 || c > iterations)
      throw std::invalid_argument("config: checkpoint iterations must lie in [0, iterations]");
  }
  if (!std::is_sorted(checkpoint_iters.begin(), checkpoint_iters.end()))
    throw std::invalid_argument("config: checkpoint iterations must be sorted");
}

std::string to_string(Objective o) {
  return o == Objective::ReverseKL ? "reverse_kl" : "forward_kl";
}

std::string to_string(Estimator e) {
  switch (e) {
    case Estimator::TotalGradient: return "total";
    case Estimator::STL: return "stl";
    case Estimator::ForwardKL: return "forward_kl";
  }
  return "?";
}

std::string to_string(ScheduleKind k) {
  return k == ScheduleKind::Constant ? "constant" : "decayed";
}

Objective parse_objective(const std::string& s) {
  if (s == "reverse_kl") return Objective::ReverseKL;
  if (s == "forward_kl") return Objective::ForwardKL;
  throw std::invalid_argument("unknown objective: " + s);
}

Estimator parse_estimator(const std::string& s) {
  if (s == "total") return Estimator::TotalGradient;
  if (s == "stl") return Estimator::STL;
  if (s == "forward_kl") return Estimator::ForwardKL;
  throw std::invalid_argument("unknown estimator: " + s);
}

ScheduleKind parse_schedule_kind(const std::string& s) {
  if (s == "constant") return ScheduleKind::Constant;
  if (s == "decayed") return ScheduleKind::Decayed;
  throw std::invalid_argument("unknown schedule: " + s);
}

}  // namespace flowvi
