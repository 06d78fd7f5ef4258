// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace aet {

enum class LossKind { cre, cdw1, cdw2, cdf, pom1a, pom1b };

inline constexpr LossKind kAllLossKinds[] = {LossKind::cre, LossKind::cdw1, LossKind::cdw2,
                                             LossKind::cdf, LossKind::pom1a, LossKind::pom1b};

std::string_view to_string(LossKind kind);
/// Accepts cre|cdw1|cdw2|cdf|pom1a|pom1b (case-insensitive).
LossKind parse_loss_kind(std::string_view name);

/// Probabilities are clamped to [kProbabilityFloor, 1] before any log.
inline constexpr double kProbabilityFloor = 1e-12;
/// Allowed deviation of sum(p) from 1.
inline constexpr double kNormalizationTolerance = 1e-6;

/// One-hot target given by its 1-based class index.
struct TargetLabel {
  int class_index = 1;
};

/// Per-sample loss of prediction `p` (K >= 2 entries) against `target`.
///   CRE   = -log p_c
///   CDW1  = (w / (K-1) + 1) * CRE,  w = |c - argmax p|
///   CDW2  = exp(w) * CRE
///   CDF   = sum_k (cdf(t)_k - cdf(p)_k)^2, cdf = inclusive prefix sum
///   POM1a = -log sum_{j in N(c)} p_j
///   POM1b = -sum_{j in N(c)} log p_j
/// where N(c) = {c-1, c, c+1} restricted to 1..K.
double loss_value(LossKind kind, TargetLabel target, std::span<const double> p);

struct LossGradient {
  std::vector<double> wrt_probabilities;
  std::vector<double> wrt_logits;
};

/// Analytic gradient. The CDW weight w is held constant (it is piecewise
/// constant in p). The logit gradient assumes p = softmax(logits).
LossGradient loss_grad(LossKind kind, TargetLabel target, std::span<const double> p);

/// Softmax with max-subtraction.
std::vector<double> softmax(std::span<const double> logits);

/// 1-based index of the first maximum.
int argmax_class(std::span<const double> p);

}  // namespace aet
