/*
 * Copyright 2026 The ADC Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "adc/common.hpp"
#include "adc/embedstore.hpp"

namespace adc {

/// Metrics with an empty denominator are nullopt, never 0.
struct DetectionMetrics {
  std::size_t flagged = 0;
  std::size_t corrupted = 0;
  std::size_t hits = 0;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
};

DetectionMetrics detection_prf(std::span<const bool> flags, std::span<const bool> corrupted);
DetectionMetrics detection_prf(const std::vector<bool>& flags, const std::vector<bool>& corrupted);

struct ClassAccuracy {
  std::vector<std::optional<double>> per_class;
  std::vector<std::size_t> support;
  std::vector<ClassIndex> empty_classes;
  std::optional<double> mean;   // over non-empty classes
  std::optional<double> worst;

  /// Accuracies of non-empty classes, in class order.
  std::vector<double> defined() const;
};

ClassAccuracy class_accuracies(std::span<const ClassIndex> predictions, std::span<const ClassIndex> truth,
                               std::size_t num_classes);

inline constexpr double kDeltaInfinity = std::numeric_limits<double>::infinity();

struct DeltaWorstResult {
  double value = 0.0;
  std::vector<double> weights;
  double divergence = 0.0;  // KL(g || u) of the returned weights
  std::optional<double> temperature;  // dual τ when the interior branch ran
};

/// min over g in the simplex of Σ g_i Acc_i subject to KL(g‖u) ≤ δ.
DeltaWorstResult delta_worst_accuracy(std::span<const double> accuracies, double delta);

double kl_to_uniform(std::span<const double> g);

/// argmax_j (logits[n][j] − tau·ln prior[j]), ties to the lower index.
std::vector<ClassIndex> posthoc_logit_adjust(const DenseMatrix& logits, std::span<const double> prior,
                                             double tau = 1.0);
std::vector<ClassIndex> argmax_rows(const DenseMatrix& scores);

// Ground truth for detection: "sample_id,0|1" (corrupted flag) or
// "sample_id,noisy_label,true_label" per line.
std::unordered_map<std::string, bool> parse_truth(std::string_view text);
std::unordered_map<std::string, bool> load_truth(const std::filesystem::path& path);

/// One value per line; blank lines and '#' comments skipped.
std::vector<double> parse_values(std::string_view text);
std::vector<double> load_values(const std::filesystem::path& path);

/// Accepts "inf"/"infinity" as well as non-negative reals.
double parse_delta(std::string_view s);

}  // namespace adc
