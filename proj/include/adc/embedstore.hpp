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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "adc/common.hpp"

namespace adc {

// Binary container shared by embeddings ("ADCE") and class probabilities
// ("ADCP"). Little-endian, 24-byte header:
//
//   offset  size  field
//   0       4     magic
//   4       4     version (u32, currently 1)
//   8       8     rows N (u64)
//   16      4     cols d (u32)
//   20      4     dtype (u32, 1 = float32)
//   24      N*d*4 row-major float32 payload
//
// Row ids live in a sidecar "<path>.ids", one id per line.

enum class ContainerKind { kEmbedding, kProbability };

inline constexpr std::uint32_t kContainerVersion = 1;
inline constexpr std::uint32_t kDtypeFloat32 = 1;
inline constexpr std::size_t kContainerHeaderBytes = 24;

std::string_view magic_for(ContainerKind kind);

struct ContainerHeader {
  ContainerKind kind = ContainerKind::kEmbedding;
  std::uint32_t version = kContainerVersion;
  std::uint64_t rows = 0;
  std::uint32_t cols = 0;
  std::uint32_t dtype = kDtypeFloat32;
};

/// Row-major float matrix with optional row ids.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> data;
  std::vector<std::string> row_ids;

  std::span<const float> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  float at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// Parses and validates the 24-byte header. Throws FormatError.
ContainerHeader parse_container_header(std::span<const std::uint8_t> bytes);
ContainerHeader read_container_header(const std::filesystem::path& path);

std::string encode_container(ContainerKind kind, const DenseMatrix& m);
/// Validates magic, version, dtype, exact payload size and finiteness.
DenseMatrix decode_container(std::span<const std::uint8_t> bytes, ContainerKind expected);

void write_container(const std::filesystem::path& path, ContainerKind kind, const DenseMatrix& m);
/// Reads payload and the ".ids" sidecar when present. Size is checked
/// against the header before the payload is read.
DenseMatrix read_container(const std::filesystem::path& path, ContainerKind expected);

std::filesystem::path sidecar_path(const std::filesystem::path& path);

/// Validated N×d feature rows aligned to sample ids. Immutable; keeps a
/// unit-normalised copy for cosine search.
class EmbeddingMatrix {
 public:
  /// Throws ValidationError on NaN/Inf, zero-norm rows, duplicate ids, or
  /// id count mismatch. Empty `row_ids` assigns "0".."N-1".
  EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> data,
                  std::vector<std::string> row_ids = {});
  explicit EmbeddingMatrix(DenseMatrix m)
      : EmbeddingMatrix(m.rows, m.cols, std::move(m.data), std::move(m.row_ids)) {}

  std::size_t n_rows() const { return rows_; }
  std::size_t dim() const { return dim_; }
  const std::vector<std::string>& row_ids() const { return row_ids_; }
  std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  std::span<const float> unit_row(std::size_t i) const { return {unit_.data() + i * dim_, dim_}; }
  const std::vector<float>& unit_data() const { return unit_; }
  const std::vector<float>& data() const { return data_; }

  DenseMatrix to_dense() const { return {rows_, dim_, data_, row_ids_}; }

 private:
  std::size_t rows_;
  std::size_t dim_;
  std::vector<float> data_;
  std::vector<float> unit_;
  std::vector<std::string> row_ids_;
};

void write_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path);
EmbeddingMatrix read_embeddings(const std::filesystem::path& path);

/// N×K class probabilities; rows must sum to 1 within `tolerance`.
DenseMatrix read_probs(const std::filesystem::path& path, double tolerance = 1e-4);
void write_probs(const DenseMatrix& probs, const std::filesystem::path& path,
                 double tolerance = 1e-4);
void validate_probs(const DenseMatrix& probs, double tolerance = 1e-4);

struct Neighbor {
  std::uint32_t index = 0;
  float similarity = 0.0f;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

using NeighborList = std::vector<Neighbor>;

/// Cosine similarity of two rows, clamped to [-1, 1].
float cosine(const EmbeddingMatrix& m, std::size_t a, std::size_t b);

/// Exact top-k cosine neighbours for each query row, self excluded, sorted by
/// similarity descending with ties to the lower row index. Requires
/// 1 <= k <= n_rows - 1. Queries are processed in parallel; output order
/// follows `queries`.
std::vector<NeighborList> knn_query(const EmbeddingMatrix& m, std::span<const std::size_t> queries,
                                    std::size_t k);

/// knn_query over every row.
std::vector<NeighborList> knn_all(const EmbeddingMatrix& m, std::size_t k);

}  // namespace adc
