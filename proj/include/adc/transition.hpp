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

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "adc/common.hpp"
#include "adc/embedstore.hpp"

namespace adc {

/// Class-level noise model: T(i, j) = P(noisy label j | true label i) and
/// prior(i) = P(true label i).
struct TransitionEstimate {
  std::size_t num_classes = 0;
  std::vector<double> matrix;  // row-major K×K
  std::vector<double> prior;
  double residual = 0.0;  // final squared consensus residual
  std::size_t iterations = 0;
  std::size_t tuples = 0;
  bool converged = false;

  double t(std::size_t i, std::size_t j) const { return matrix[i * num_classes + j]; }

  static TransitionEstimate identity(std::size_t k);
  /// Uniform prior, `1 - noise` on the diagonal, noise spread evenly off it.
  static TransitionEstimate symmetric(std::size_t k, double noise);

  /// P(true = j | noisy = j) by Bayes; nullopt when the denominator is 0.
  std::optional<double> clean_posterior(std::size_t j) const;

  /// Throws ValidationError unless rows and prior sum to 1 within 1e-6
  /// and all entries lie in [0, 1].
  void validate() const;
};

/// First/second/third-order label agreement frequencies over
/// (anchor, nn1, nn2) tuples.
struct ConsensusStats {
  std::size_t num_classes = 0;
  std::vector<double> first;   // K
  std::vector<double> second;  // K×K
  std::vector<double> third;   // K×K×K
  std::size_t tuples = 0;
};

struct ConsensusConfig {
  /// Rows drawn per round; 0 means min(N, 50·K²).
  std::size_t sample_size = 0;
  std::size_t rounds = 50;
  std::size_t max_iters = 1500;
  double step = 0.1;
  double tolerance = 1e-6;
  /// Minimum N as a multiple of K.
  std::size_t min_samples_per_class = 30;
  std::uint64_t seed = 0;
};

/// Sampled 2-NN tuples: each round draws distinct rows and pairs every drawn
/// row with its two most cosine-similar rows inside the draw.
ConsensusStats consensus_stats(const EmbeddingMatrix& features, std::span<const ClassIndex> labels,
                               std::size_t num_classes, const ConsensusConfig& config);

/// Fits (T, prior) to the consensus frequencies by projected gradient on the
/// product of simplices, starting from a diagonally dominant T.
TransitionEstimate fit_transition(const ConsensusStats& stats, const ConsensusConfig& config);

/// consensus_stats + fit_transition. Throws ValidationError when a class has
/// no samples or N < min_samples_per_class·K.
TransitionEstimate estimate_transition(const EmbeddingMatrix& features,
                                       std::span<const ClassIndex> labels,
                                       std::size_t num_classes,
                                       const ConsensusConfig& config = {});

/// Squared residual between model-implied and observed consensus.
double consensus_residual(const TransitionEstimate& est, const ConsensusStats& stats);

/// Euclidean projection onto the probability simplex, in place.
void project_to_simplex(std::span<double> v);

}  // namespace adc
