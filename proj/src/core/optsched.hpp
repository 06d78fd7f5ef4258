// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace aet {

/// 1cycle policy: cosine ramp from lr_max/div_factor to lr_max over the
/// first warmup_fraction of iterations, then cosine anneal down to
/// (lr_max/div_factor)/final_div_factor at total_iterations.
struct OneCycleConfig {
  double lr_max = 0.01;
  double div_factor = 25.0;
  double warmup_fraction = 0.30;
  double final_div_factor = 1e4;
  std::int64_t total_iterations = 100;

  double initial_lr() const { return lr_max / div_factor; }
  double final_lr() const { return initial_lr() / final_div_factor; }
};

void validate(const OneCycleConfig& cfg);
/// Valid for 0 <= iteration <= total_iterations.
double lr_at(const OneCycleConfig& cfg, std::int64_t iteration);

enum class ScheduleKind { onecycle, constant, piecewise };
std::string_view to_string(ScheduleKind kind);
ScheduleKind parse_schedule_kind(std::string_view name);

/// Learning rate per mini-batch iteration for any of the supported policies.
struct LearningRateSchedule {
  ScheduleKind kind = ScheduleKind::onecycle;
  OneCycleConfig onecycle;
  /// Piecewise: lr_max * drop_factor^floor(epoch / drop_period_epochs).
  double drop_factor = 0.1;
  int drop_period_epochs = 1;
  std::int64_t iterations_per_epoch = 1;

  double lr(std::int64_t iteration) const;
};

struct OptimizerHyper {
  double momentum = 0.9;  // SGDM mu, adaptive beta1
  double weight_decay = 5e-4;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

enum class OptimizerKind { sgdm, adamw };
std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer_kind(std::string_view name);

struct OptimizerState {
  OptimizerHyper hyper;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::int64_t step = 0;

  OptimizerState() = default;
  OptimizerState(std::size_t n_params, OptimizerHyper h)
      : hyper(h), first_moment(n_params, 0.0), second_moment(n_params, 0.0) {}
};

/// theta <- theta (1 - lr lambda); v <- mu v + g; theta <- theta - lr v.
void sgdm_step(OptimizerState& state, std::span<double> params, std::span<const double> grads, double lr);

/// Decoupled-weight-decay adaptive step with bias correction:
/// theta <- theta (1 - lr lambda) - lr m_hat / (sqrt(v_hat) + eps).
void adamw_step(OptimizerState& state, std::span<double> params, std::span<const double> grads, double lr);

void optimizer_step(OptimizerKind kind, OptimizerState& state, std::span<double> params,
                    std::span<const double> grads, double lr);

}  // namespace aet
