/*
 * Copyright 2026 The hcs Authors.
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

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace hcs {

// A set of points, one per row. Row-major so that each point is contiguous.
using Points = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Binary labels are stored as int in {0, 1}.
using Labels = std::vector<int>;

// Malformed or inconsistent input data (bad files, impossible shift requests,
// insufficient samples).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite loss or parameter encountered during training.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::span<const double> row_span(const Points& p, Eigen::Index i) {
  return {p.data() + i * p.cols(), static_cast<std::size_t>(p.cols())};
}

inline void require(bool condition, const char* message) {
  if (!condition) throw std::invalid_argument(message);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

// FNV-1a over the raw bytes of a double range. Used to fingerprint parameters.
inline std::uint64_t hash_doubles(std::span<const double> values,
                                  std::uint64_t h = 1469598103934665603ULL) {
  for (double v : values) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof(double));
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

namespace detail {

inline std::atomic<unsigned>& thread_limit() {
  static std::atomic<unsigned> limit{0};
  return limit;
}

}  // namespace detail

// Caps the worker threads used by data-parallel loops; 0 restores the
// hardware concurrency default.
inline void set_max_threads(unsigned n) { detail::thread_limit().store(n); }

inline unsigned max_threads() {
  const unsigned limit = detail::thread_limit().load();
  return limit != 0 ? limit : std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {

// Runs fn(begin, end) over contiguous row ranges. Each row is owned by exactly
// one worker, so results written per row do not depend on the thread count.
template <typename Fn>
void parallel_rows(std::size_t rows, std::size_t work_per_row, Fn&& fn) {
  constexpr std::size_t kMinWork = 1 << 16;
  std::size_t workers = max_threads();
  if (workers == 1 || rows < 2 || rows * work_per_row < kMinWork) {
    fn(std::size_t{0}, rows);
    return;
  }
  workers = std::min(workers, rows);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (rows + workers - 1) / workers;
  for (std::size_t begin = 0; begin < rows; begin += chunk) {
    const std::size_t end = std::min(rows, begin + chunk);
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace detail
}  // namespace hcs
