/*
 * Copyright 2026 The pls Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>

#include <Eigen/Core>

namespace pls {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// The 128-bit counter is split into a 64-bit block index (words 0-1) and a
/// 64-bit stream id (words 2-3), so every (key, stream) pair owns an
/// independent sequence of 2^64 blocks of four 32-bit outputs.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox4x32() : Philox4x32(0, 0) {}
  Philox4x32(std::uint64_t key, std::uint64_t stream) {
    key_ = {static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)};
    counter_ = {0u, 0u, static_cast<std::uint32_t>(stream),
                static_cast<std::uint32_t>(stream >> 32)};
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (position_ == 4) {
      block_ = generate_block(counter_, key_);
      increment_block();
      position_ = 0;
    }
    return block_[position_++];
  }

  /// Single Philox4x32-10 evaluation of the bijection.
  static Counter generate_block(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
             static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
             static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

  friend bool operator==(const Philox4x32&, const Philox4x32&) = default;

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  void increment_block() {
    if (++counter_[0] == 0) ++counter_[1];
  }

  Key key_{};
  Counter counter_{};
  Counter block_{};
  int position_ = 4;
};

/// Tags separating the random streams used by different phases, so that
/// e.g. Matheron draws never reuse Langevin noise for the same index.
enum class StreamDomain : std::uint32_t {
  Langevin = 1,
  Matheron = 2,
  Potential = 3,
  Metrics = 4,
  Selection = 5,
  Synthetic = 6,
  Tuning = 7,
  Split = 8,
};

/// A per-index random stream keyed by (seed, domain, index). Streams for
/// different indices are statistically independent and do not depend on
/// the order in which they are consumed.
template <typename Scalar = double>
class RandomStream {
 public:
  RandomStream() = default;
  RandomStream(std::uint64_t seed, StreamDomain domain, std::uint64_t index)
      : engine_(seed, (std::uint64_t{static_cast<std::uint32_t>(domain)} << 40) ^ index) {}

  Scalar normal() { return normal_(engine_); }
  Scalar uniform() { return std::generate_canonical<Scalar, std::numeric_limits<Scalar>::digits>(engine_); }

  Philox4x32& engine() { return engine_; }

  template <typename Derived>
  void fill_normal(Eigen::DenseBase<Derived>& out) {
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, j) = normal();
  }

 private:
  Philox4x32 engine_;
  std::normal_distribution<Scalar> normal_;
};

}  // namespace pls
