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

#include <cmath>
#include <cstdlib>

#include <gtest/gtest.h>

#include "pls/parallel.hpp"
#include "pls/random.hpp"

namespace pls {
namespace {

// Known-answer values from an independent Philox4x32-10 implementation
// (tests/oracles/philox_kat.py).
TEST(Philox, KnownAnswerZeroKey) {
  Philox4x32 gen(0, 0);
  const std::uint32_t expected[8] = {0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8,
                                     0xf8e4cca4, 0x5cb200db, 0xb1a574eb, 0x097eff67};
  for (std::uint32_t e : expected) EXPECT_EQ(gen(), e);
}

TEST(Philox, KnownAnswerNonzeroKeyAndCounter) {
  const auto out = Philox4x32::generate_block({5, 0, 7, 0}, {0x89ABCDEFu, 0x01234567u});
  EXPECT_EQ(out[0], 0x414da380u);
  EXPECT_EQ(out[1], 0xb7702af1u);
  EXPECT_EQ(out[2], 0xcd642c43u);
  EXPECT_EQ(out[3], 0x43dc5e58u);
}

TEST(Philox, StreamsDiffer) {
  Philox4x32 a(7, 0), b(7, 1), c(8, 0);
  const auto xa = a(), xb = b(), xc = c();
  EXPECT_NE(xa, xb);
  EXPECT_NE(xa, xc);
}

TEST(RandomStream, DeterministicPerIndex) {
  RandomStream<double> a(42, StreamDomain::Langevin, 3), b(42, StreamDomain::Langevin, 3);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.normal(), b.normal());
  RandomStream<double> c(42, StreamDomain::Matheron, 3);
  RandomStream<double> d(42, StreamDomain::Langevin, 3);
  EXPECT_NE(c.normal(), d.normal());
}

TEST(RandomStream, NormalMoments) {
  RandomStream<double> rng(1, StreamDomain::Synthetic, 0);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  EXPECT_LT(std::abs(mean), 4.0 / std::sqrt(n));
  EXPECT_NEAR(var, 1.0, 0.02);
}

TEST(RandomStream, UniformInUnitInterval) {
  RandomStream<double> rng(9, StreamDomain::Selection, 0);
  double lo = 1, hi = 0;
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  EXPECT_LT(lo, 0.01);
  EXPECT_GT(hi, 0.99);
}

TEST(Parallel, BlocksCoverRangeAndRethrowLowest) {
  std::vector<int> seen(1000, 0);
  parallel_blocks(1000, 64, [&](Index b, Index e) {
    for (Index i = b; i < e; ++i) seen[static_cast<std::size_t>(i)] += 1;
  });
  for (int v : seen) EXPECT_EQ(v, 1);

  try {
    parallel_blocks(100, 10, [&](Index b, Index) {
      if (b >= 30) throw InputError("block " + std::to_string(b));
    });
    FAIL() << "expected an exception";
  } catch (const InputError& e) {
    EXPECT_STREQ(e.what(), "block 30");
  }
}

TEST(Parallel, RejectsMalformedThreadVariable) {
  ::setenv("PLS_THREADS", "two", 1);
  EXPECT_THROW(configure_workers_from_env(), InputError);
  ::setenv("PLS_THREADS", "-1", 1);
  EXPECT_THROW(configure_workers_from_env(), InputError);
  ::setenv("PLS_THREADS", "0", 1);
  EXPECT_NO_THROW(configure_workers_from_env());
  ::unsetenv("PLS_THREADS");
}

}  // namespace
}  // namespace pls
