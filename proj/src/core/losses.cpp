// SPDX-License-Identifier: Apache-2.0
#include "core/losses.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "core/common.hpp"

namespace aet {

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::cre: return "cre";
    case LossKind::cdw1: return "cdw1";
    case LossKind::cdw2: return "cdw2";
    case LossKind::cdf: return "cdf";
    case LossKind::pom1a: return "pom1a";
    case LossKind::pom1b: return "pom1b";
  }
  return "?";
}

LossKind parse_loss_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  for (LossKind k : kAllLossKinds) {
    if (to_string(k) == lower) return k;
  }
  fail(ErrorCode::invalid_argument, "unknown loss '" + std::string(name) + "' (cre|cdw1|cdw2|cdf|pom1a|pom1b)");
}

int argmax_class(std::span<const double> p) {
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin()) + 1;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (auto& v : out) v /= sum;
  return out;
}

namespace {

void check_inputs(TargetLabel target, std::span<const double> p) {
  const auto k = static_cast<int>(p.size());
  if (k < 2) fail(ErrorCode::invalid_argument, "loss needs K >= 2 classes");
  if (target.class_index < 1 || target.class_index > k) {
    fail(ErrorCode::invalid_argument, "target class " + std::to_string(target.class_index) + " outside 1.." +
                                          std::to_string(k));
  }
  double sum = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0) fail(ErrorCode::invalid_argument, "probabilities must be finite and >= 0");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kNormalizationTolerance) {
    fail(ErrorCode::invalid_argument, "probabilities sum to " + std::to_string(sum) + ", not 1");
  }
}

double clamp_prob(double v) { return std::clamp(v, kProbabilityFloor, 1.0); }

// Zero-based bounds of the {c-1, c, c+1} neighbourhood.
std::pair<std::size_t, std::size_t> neighbourhood(int class_index, std::size_t k) {
  const auto c = static_cast<std::size_t>(class_index - 1);
  return {c == 0 ? 0 : c - 1, std::min(k - 1, c + 1)};
}

double cdw_weight(LossKind kind, TargetLabel target, std::span<const double> p) {
  const double w = std::abs(target.class_index - argmax_class(p));
  if (kind == LossKind::cdw1) return w / static_cast<double>(p.size() - 1) + 1.0;
  return std::exp(w);
}

}  // namespace

double loss_value(LossKind kind, TargetLabel target, std::span<const double> p) {
  check_inputs(target, p);
  const auto c = static_cast<std::size_t>(target.class_index - 1);
  switch (kind) {
    case LossKind::cre:
      return -std::log(clamp_prob(p[c]));
    case LossKind::cdw1:
    case LossKind::cdw2:
      return cdw_weight(kind, target, p) * -std::log(clamp_prob(p[c]));
    case LossKind::cdf: {
      double cum = 0.0, total = 0.0;
      for (std::size_t k = 0; k < p.size(); ++k) {
        cum += p[k];
        const double diff = (k >= c ? 1.0 : 0.0) - cum;
        total += diff * diff;
      }
      return total;
    }
    case LossKind::pom1a: {
      const auto [lo, hi] = neighbourhood(target.class_index, p.size());
      double mass = 0.0;
      for (std::size_t j = lo; j <= hi; ++j) mass += p[j];
      return -std::log(clamp_prob(mass));
    }
    case LossKind::pom1b: {
      const auto [lo, hi] = neighbourhood(target.class_index, p.size());
      double total = 0.0;
      for (std::size_t j = lo; j <= hi; ++j) total -= std::log(clamp_prob(p[j]));
      return total;
    }
  }
  fail(ErrorCode::internal, "unhandled loss kind");
}

LossGradient loss_grad(LossKind kind, TargetLabel target, std::span<const double> p) {
  check_inputs(target, p);
  const std::size_t k = p.size();
  const auto c = static_cast<std::size_t>(target.class_index - 1);
  LossGradient g;
  auto& gp = g.wrt_probabilities;
  gp.assign(k, 0.0);
  // d/dx (-log clamp(x)); zero below the floor. At x >= 1 the unclamped
  // slope is kept so the softmax chain stays continuous at one-hot p.
  auto neg_log_slope = [](double x) { return x > kProbabilityFloor ? -1.0 / x : 0.0; };

  switch (kind) {
    case LossKind::cre:
      gp[c] = neg_log_slope(p[c]);
      break;
    case LossKind::cdw1:
    case LossKind::cdw2:
      gp[c] = cdw_weight(kind, target, p) * neg_log_slope(p[c]);
      break;
    case LossKind::cdf: {
      // L = sum_m (T_m - P_m)^2 with P_m = sum_{j<=m} p_j, so
      // dL/dp_j = -2 sum_{m>=j} (T_m - P_m).
      std::vector<double> resid(k);
      double cum = 0.0;
      for (std::size_t m = 0; m < k; ++m) {
        cum += p[m];
        resid[m] = (m >= c ? 1.0 : 0.0) - cum;
      }
      double tail = 0.0;
      for (std::size_t j = k; j-- > 0;) {
        tail += resid[j];
        gp[j] = -2.0 * tail;
      }
      break;
    }
    case LossKind::pom1a: {
      const auto [lo, hi] = neighbourhood(target.class_index, k);
      double mass = 0.0;
      for (std::size_t j = lo; j <= hi; ++j) mass += p[j];
      const double slope = neg_log_slope(mass);
      for (std::size_t j = lo; j <= hi; ++j) gp[j] = slope;
      break;
    }
    case LossKind::pom1b: {
      const auto [lo, hi] = neighbourhood(target.class_index, k);
      for (std::size_t j = lo; j <= hi; ++j) gp[j] = neg_log_slope(p[j]);
      break;
    }
  }

  // Softmax chain: dL/dz_i = p_i (g_i - sum_j p_j g_j).
  double dot = 0.0;
  for (std::size_t j = 0; j < k; ++j) dot += p[j] * gp[j];
  g.wrt_logits.resize(k);
  for (std::size_t i = 0; i < k; ++i) g.wrt_logits[i] = p[i] * (gp[i] - dot);
  return g;
}

}  // namespace aet
