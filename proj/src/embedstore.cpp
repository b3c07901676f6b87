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

#include "adc/embedstore.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <thread>
#include <unordered_set>

#include "adc/simd/kernels.hpp"

namespace adc {
namespace {

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

float load_f32(const std::uint8_t* p) { return std::bit_cast<float>(get_u32(p)); }

std::string kind_name(ContainerKind k) {
  return k == ContainerKind::kEmbedding ? "embedding" : "probability";
}

std::uint64_t payload_bytes(const ContainerHeader& h) {
  const std::uint64_t cells = h.rows * static_cast<std::uint64_t>(h.cols);
  if (h.cols != 0 && cells / h.cols != h.rows) throw FormatError("container: size overflow");
  return cells * 4;
}

std::vector<std::string> read_ids(const std::filesystem::path& path) {
  std::vector<std::string> ids;
  if (!std::filesystem::exists(path)) return ids;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ids.push_back(line);
  }
  return ids;
}

void write_ids(const std::filesystem::path& path, const std::vector<std::string>& ids) {
  std::string out;
  for (const auto& id : ids) {
    if (id.find('\n') != std::string::npos) throw ValidationError("row id contains a newline");
    out += id;
    out.push_back('\n');
  }
  write_file_atomic(path, out);
}

}  // namespace

std::string_view magic_for(ContainerKind kind) {
  return kind == ContainerKind::kEmbedding ? "ADCE" : "ADCP";
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  auto p = path;
  p += ".ids";
  return p;
}

ContainerHeader parse_container_header(std::span<const std::uint8_t> b) {
  if (b.size() < kContainerHeaderBytes) throw FormatError("container: truncated header");
  ContainerHeader h;
  if (std::memcmp(b.data(), "ADCE", 4) == 0) h.kind = ContainerKind::kEmbedding;
  else if (std::memcmp(b.data(), "ADCP", 4) == 0) h.kind = ContainerKind::kProbability;
  else throw FormatError("container: bad magic");
  h.version = get_u32(b.data() + 4);
  h.rows = get_u64(b.data() + 8);
  h.cols = get_u32(b.data() + 16);
  h.dtype = get_u32(b.data() + 20);
  if (h.version != kContainerVersion)
    throw FormatError("container: unsupported version " + std::to_string(h.version));
  if (h.dtype != kDtypeFloat32)
    throw FormatError("container: unsupported dtype " + std::to_string(h.dtype));
  return h;
}

ContainerHeader read_container_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::uint8_t buf[kContainerHeaderBytes];
  in.read(reinterpret_cast<char*>(buf), sizeof buf);
  return parse_container_header({buf, static_cast<std::size_t>(in.gcount())});
}

std::string encode_container(ContainerKind kind, const DenseMatrix& m) {
  if (m.data.size() != m.rows * m.cols) throw ValidationError("container: data size mismatch");
  if (m.cols > std::numeric_limits<std::uint32_t>::max())
    throw ValidationError("container: too many columns");
  std::string out;
  out.reserve(kContainerHeaderBytes + m.data.size() * 4);
  out.append(magic_for(kind));
  put_u32(out, kContainerVersion);
  put_u64(out, m.rows);
  put_u32(out, static_cast<std::uint32_t>(m.cols));
  put_u32(out, kDtypeFloat32);
  for (float f : m.data) {
    if (!std::isfinite(f)) throw ValidationError("container: non-finite value");
    put_u32(out, std::bit_cast<std::uint32_t>(f));
  }
  return out;
}

DenseMatrix decode_container(std::span<const std::uint8_t> bytes, ContainerKind expected) {
  const ContainerHeader h = parse_container_header(bytes);
  if (h.kind != expected)
    throw FormatError("container: expected " + kind_name(expected) + " file, found " +
                      kind_name(h.kind));
  const std::uint64_t want = kContainerHeaderBytes + payload_bytes(h);
  if (bytes.size() < want)
    throw FormatError("container: truncated payload (" + std::to_string(bytes.size()) + " of " +
                      std::to_string(want) + " bytes)");
  if (bytes.size() > want) throw FormatError("container: trailing bytes after payload");
  DenseMatrix m;
  m.rows = h.rows;
  m.cols = h.cols;
  m.data.resize(h.rows * h.cols);
  const std::uint8_t* p = bytes.data() + kContainerHeaderBytes;
  for (std::size_t i = 0; i < m.data.size(); ++i, p += 4) {
    m.data[i] = load_f32(p);
    if (!std::isfinite(m.data[i]))
      throw FormatError("container: non-finite value at row " + std::to_string(i / m.cols));
  }
  return m;
}

void write_container(const std::filesystem::path& path, ContainerKind kind, const DenseMatrix& m) {
  if (!m.row_ids.empty() && m.row_ids.size() != m.rows)
    throw ValidationError("container: row id count differs from row count");
  write_file_atomic(path, encode_container(kind, m));
  if (!m.row_ids.empty()) {
    write_ids(sidecar_path(path), m.row_ids);
  } else {
    std::error_code ec;  // a leftover sidecar would be read back as this file's ids
    std::filesystem::remove(sidecar_path(path), ec);
  }
}

DenseMatrix read_container(const std::filesystem::path& path, ContainerKind expected) {
  const ContainerHeader h = read_container_header(path);
  const std::uint64_t want = kContainerHeaderBytes + payload_bytes(h);
  const std::uint64_t have = std::filesystem::file_size(path);
  if (have < want)
    throw FormatError("container: truncated payload in " + path.string() + " (" +
                      std::to_string(have) + " of " + std::to_string(want) + " bytes)");
  DenseMatrix m = decode_container(read_bytes(path), expected);
  m.row_ids = read_ids(sidecar_path(path));
  if (!m.row_ids.empty() && m.row_ids.size() != m.rows)
    throw FormatError("container: sidecar has " + std::to_string(m.row_ids.size()) +
                      " ids for " + std::to_string(m.rows) + " rows");
  return m;
}

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> data,
                                 std::vector<std::string> row_ids)
    : rows_(rows), dim_(dim), data_(std::move(data)), row_ids_(std::move(row_ids)) {
  if (dim_ == 0) throw ValidationError("embeddings: dim must be positive");
  if (data_.size() != rows_ * dim_) throw ValidationError("embeddings: data size mismatch");
  if (row_ids_.empty()) {
    row_ids_.reserve(rows_);
    for (std::size_t i = 0; i < rows_; ++i) row_ids_.push_back(std::to_string(i));
  }
  if (row_ids_.size() != rows_) throw ValidationError("embeddings: row id count mismatch");
  std::unordered_set<std::string_view> seen;
  for (const auto& id : row_ids_)
    if (!seen.insert(id).second) throw ValidationError("embeddings: duplicate row id " + id);

  unit_.resize(data_.size());
  for (std::size_t r = 0; r < rows_; ++r) {
    double norm2 = 0.0;
    for (std::size_t c = 0; c < dim_; ++c) {
      const float v = data_[r * dim_ + c];
      if (!std::isfinite(v)) throw ValidationError("embeddings: non-finite value in row " + std::to_string(r));
      norm2 += static_cast<double>(v) * v;
    }
    if (norm2 == 0.0) throw ValidationError("embeddings: zero-norm row " + std::to_string(r));
    const double inv = 1.0 / std::sqrt(norm2);
    for (std::size_t c = 0; c < dim_; ++c)
      unit_[r * dim_ + c] = static_cast<float>(data_[r * dim_ + c] * inv);
  }
}

void write_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path) {
  write_container(path, ContainerKind::kEmbedding, m.to_dense());
}

EmbeddingMatrix read_embeddings(const std::filesystem::path& path) {
  return EmbeddingMatrix(read_container(path, ContainerKind::kEmbedding));
}

void validate_probs(const DenseMatrix& probs, double tolerance) {
  for (std::size_t r = 0; r < probs.rows; ++r) {
    double sum = 0.0;
    for (float v : probs.row(r)) {
      if (!(v >= 0.0f && v <= 1.0f))
        throw ValidationError("probabilities: entry outside [0,1] in row " + std::to_string(r));
      sum += v;
    }
    if (std::abs(sum - 1.0) > tolerance)
      throw ValidationError("probabilities: row " + std::to_string(r) + " sums to " +
                            std::to_string(sum));
  }
}

DenseMatrix read_probs(const std::filesystem::path& path, double tolerance) {
  DenseMatrix m = read_container(path, ContainerKind::kProbability);
  validate_probs(m, tolerance);
  return m;
}

void write_probs(const DenseMatrix& probs, const std::filesystem::path& path, double tolerance) {
  validate_probs(probs, tolerance);
  write_container(path, ContainerKind::kProbability, probs);
}

float cosine(const EmbeddingMatrix& m, std::size_t a, std::size_t b) {
  const float s = simd::active().dot(m.unit_row(a).data(), m.unit_row(b).data(), m.dim());
  return std::clamp(s, -1.0f, 1.0f);
}

std::vector<NeighborList> knn_query(const EmbeddingMatrix& m, std::span<const std::size_t> queries,
                                    std::size_t k) {
  const std::size_t n = m.n_rows();
  if (k < 1 || n < 2 || k > n - 1)
    throw RangeError("knn_query: k=" + std::to_string(k) + " outside [1, " +
                     std::to_string(n == 0 ? 0 : n - 1) + "]");
  for (std::size_t q : queries)
    if (q >= n) throw RangeError("knn_query: query row out of range");

  std::vector<NeighborList> out(queries.size());
  const auto& kern = simd::active();

  auto work = [&](std::size_t begin, std::size_t end) {
    std::vector<float> sims(n);
    std::vector<std::uint32_t> order(n);
    for (std::size_t qi = begin; qi < end; ++qi) {
      const std::size_t q = queries[qi];
      kern.dot_rows(m.unit_row(q).data(), m.unit_data().data(), n, m.dim(), sims.data());
      std::iota(order.begin(), order.end(), 0u);
      // Drop self by swapping it to the end.
      std::swap(order[q], order[n - 1]);
      auto better = [&](std::uint32_t a, std::uint32_t b) {
        return sims[a] != sims[b] ? sims[a] > sims[b] : a < b;
      };
      auto last = order.begin() + static_cast<std::ptrdiff_t>(n - 1);
      auto kth = order.begin() + static_cast<std::ptrdiff_t>(k);
      std::nth_element(order.begin(), kth, last, better);
      std::sort(order.begin(), kth, better);
      NeighborList& list = out[qi];
      list.reserve(k);
      for (std::size_t j = 0; j < k; ++j)
        list.push_back({order[j], std::clamp(sims[order[j]], -1.0f, 1.0f)});
    }
  };

  const std::size_t threads =
      std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()),
                            std::max<std::size_t>(1, queries.size() / 64));
  if (threads <= 1) {
    work(0, queries.size());
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (queries.size() + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t b = t * chunk, e = std::min(queries.size(), b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
  }
  return out;
}

std::vector<NeighborList> knn_all(const EmbeddingMatrix& m, std::size_t k) {
  std::vector<std::size_t> all(m.n_rows());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return knn_query(m, all, k);
}

}  // namespace adc
