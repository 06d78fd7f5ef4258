// SPDX-License-Identifier: Apache-2.0
#include "core/optsched.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "core/common.hpp"

namespace aet {

void validate(const OneCycleConfig& cfg) {
  if (!(cfg.lr_max > 0.0)) fail(ErrorCode::invalid_argument, "lr_max must be positive");
  if (!(cfg.div_factor > 0.0) || !(cfg.final_div_factor > 0.0)) {
    fail(ErrorCode::invalid_argument, "division factors must be positive");
  }
  if (!(cfg.warmup_fraction > 0.0 && cfg.warmup_fraction < 1.0)) {
    fail(ErrorCode::invalid_argument, "warmup_fraction must lie in (0, 1)");
  }
  if (cfg.total_iterations < 2) fail(ErrorCode::invalid_argument, "total_iterations must be >= 2");
}

double lr_at(const OneCycleConfig& cfg, std::int64_t iteration) {
  validate(cfg);
  if (iteration < 0 || iteration > cfg.total_iterations) {
    fail(ErrorCode::invalid_argument, "iteration " + std::to_string(iteration) + " outside [0, " +
                                          std::to_string(cfg.total_iterations) + "]");
  }
  const double t = static_cast<double>(iteration);
  const double total = static_cast<double>(cfg.total_iterations);
  const double warm = cfg.warmup_fraction * total;
  const double lo = cfg.initial_lr();
  if (t <= warm) {
    return lo + (cfg.lr_max - lo) * 0.5 * (1.0 - std::cos(std::numbers::pi * t / warm));
  }
  const double end = cfg.final_lr();
  return end + (cfg.lr_max - end) * 0.5 * (1.0 + std::cos(std::numbers::pi * (t - warm) / (total - warm)));
}

std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::onecycle: return "onecycle";
    case ScheduleKind::constant: return "constant";
    case ScheduleKind::piecewise: return "piecewise";
  }
  return "?";
}

ScheduleKind parse_schedule_kind(std::string_view name) {
  for (auto k : {ScheduleKind::onecycle, ScheduleKind::constant, ScheduleKind::piecewise}) {
    if (to_string(k) == name) return k;
  }
  fail(ErrorCode::invalid_argument, "unknown schedule '" + std::string(name) + "' (onecycle|constant|piecewise)");
}

double LearningRateSchedule::lr(std::int64_t iteration) const {
  switch (kind) {
    case ScheduleKind::onecycle:
      return lr_at(onecycle, iteration);
    case ScheduleKind::constant:
      return onecycle.lr_max;
    case ScheduleKind::piecewise: {
      const std::int64_t epoch = iteration / std::max<std::int64_t>(1, iterations_per_epoch);
      const auto drops = static_cast<double>(epoch / std::max(1, drop_period_epochs));
      return onecycle.lr_max * std::pow(drop_factor, drops);
    }
  }
  fail(ErrorCode::internal, "unhandled schedule kind");
}

std::string_view to_string(OptimizerKind kind) { return kind == OptimizerKind::sgdm ? "sgdm" : "adamw"; }

OptimizerKind parse_optimizer_kind(std::string_view name) {
  if (name == "sgdm") return OptimizerKind::sgdm;
  if (name == "adamw") return OptimizerKind::adamw;
  fail(ErrorCode::invalid_argument, "unknown optimizer '" + std::string(name) + "' (sgdm|adamw)");
}

namespace {

void check_step(const OptimizerState& state, std::span<double> params, std::span<const double> grads) {
  if (params.size() != grads.size() || state.first_moment.size() != params.size() ||
      state.second_moment.size() != params.size()) {
    fail(ErrorCode::invalid_argument, "optimizer shape mismatch: " + std::to_string(params.size()) +
                                          " parameters, " + std::to_string(grads.size()) + " gradients");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) {
      fail(ErrorCode::numeric, "non-finite gradient at parameter " + std::to_string(i));
    }
  }
}

}  // namespace

void sgdm_step(OptimizerState& state, std::span<double> params, std::span<const double> grads, double lr) {
  check_step(state, params, grads);
  const auto& h = state.hyper;
  const double decay = 1.0 - lr * h.weight_decay;
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i] *= decay;
    state.first_moment[i] = h.momentum * state.first_moment[i] + grads[i];
    params[i] -= lr * state.first_moment[i];
  }
  ++state.step;
}

void adamw_step(OptimizerState& state, std::span<double> params, std::span<const double> grads, double lr) {
  check_step(state, params, grads);
  const auto& h = state.hyper;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(h.momentum, t);
  const double correction2 = 1.0 - std::pow(h.beta2, t);
  const double decay = 1.0 - lr * h.weight_decay;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    m = h.momentum * m + (1.0 - h.momentum) * grads[i];
    v = h.beta2 * v + (1.0 - h.beta2) * grads[i] * grads[i];
    const double m_hat = m / correction1;
    const double v_hat = v / correction2;
    params[i] = params[i] * decay - lr * m_hat / (std::sqrt(v_hat) + h.epsilon);
  }
}

void optimizer_step(OptimizerKind kind, OptimizerState& state, std::span<double> params,
                    std::span<const double> grads, double lr) {
  if (kind == OptimizerKind::sgdm) {
    sgdm_step(state, params, grads, lr);
  } else {
    adamw_step(state, params, grads, lr);
  }
}

}  // namespace aet
