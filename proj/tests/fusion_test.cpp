// Copyright 2026 The hrfusion Authors.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <utility>

#include "hrfusion/fusion.hpp"
#include "test_util.hpp"

namespace hrfusion {
namespace {

constexpr double kTol = 1e-9;

// Line-by-line transcription of the published adjustment procedure with
// constants inlined and no capping. Used as an oracle for uncapped inputs.
std::pair<double, double> ReferenceProcedure(double s_img_v, double s_img_nv,
                                             double d1, double d2) {
  double s_v = s_img_v;
  double s_nv = s_img_nv;
  if (d1 >= 4.5 && d1 <= 5.5) {
    s_v = s_img_v;
    s_nv = s_img_nv;
  } else if (d1 > 5.5) {
    const double diff = d1 - 5.5;
    const double adj = diff * 0.11;
    s_v = s_v - adj;
    s_nv = s_nv + adj;
  } else if (d1 < 4.5) {
    const double diff = 4.5 - d1;
    const double adj = diff * 0.11;
    s_v = s_v + adj;
    s_nv = s_nv - adj;
  }
  if (d2 >= 4.5 && d2 <= 5.5) {
    return {s_v, s_nv};
  } else if (d2 > 5.5) {
    const double diff = d2 - 5.5;
    const double adj = diff * 0.11;
    s_v = s_v - adj;
    s_nv = s_nv + adj;
  } else if (d2 < 4.5) {
    const double diff = 4.5 - d2;  // printed as "4.5 - 2_1"
    const double adj = diff * 0.11;
    s_v = s_v + adj;
    s_nv = s_nv - adj;
  }
  return {s_v, s_nv};
}

BinaryScores S(double v) { return BinaryScores(v, 1.0 - v); }

TEST_CASE("neutral trait leaves scores unchanged") {
  const FusionParams p;
  for (double d : {4.5, 5.0, 5.5}) {
    const Adjusted a = AdjustForDimension(BinaryScores(0.7, 0.3), d,
                                          Dimension::kValence, p);
    CHECK(a.scores == BinaryScores(0.7, 0.3));
    CHECK(a.trace.applied_adjustment == 0.0);
    CHECK(a.trace.delta_from_neutral == 0.0);
    CHECK_FALSE(a.trace.capped);
  }
}

TEST_CASE("positive trait moves mass to no_violation") {
  const Adjusted a = AdjustForDimension(BinaryScores(0.60, 0.40), 7.5,
                                        Dimension::kValence, FusionParams{});
  CHECK(std::abs(a.scores.violation() - 0.38) <= kTol);
  CHECK(std::abs(a.scores.no_violation() - 0.62) <= kTol);
  CHECK(std::abs(a.trace.applied_adjustment - 0.22) <= kTol);
  CHECK(a.trace.delta_from_neutral == 2.0);
  CHECK_FALSE(a.trace.capped);
}

TEST_CASE("negative trait moves mass to violation") {
  const Adjusted a = AdjustForDimension(BinaryScores(0.5, 0.5), 3.0,
                                        Dimension::kDominance, FusionParams{});
  CHECK(std::abs(a.scores.violation() - 0.665) <= kTol);
  CHECK(std::abs(a.scores.no_violation() - 0.335) <= kTol);
  CHECK(std::abs(a.trace.applied_adjustment - 0.165) <= kTol);
  CHECK(a.trace.dimension == Dimension::kDominance);
}

TEST_CASE("adjustment is capped at the shrinking score") {
  const Adjusted a = AdjustForDimension(BinaryScores(0.05, 0.95), 10.0,
                                        Dimension::kValence, FusionParams{});
  CHECK(a.scores.violation() == 0.0);
  CHECK(a.scores.no_violation() == 1.0);
  CHECK(a.trace.applied_adjustment == doctest::Approx(0.05));
  CHECK(a.trace.delta_from_neutral * 0.11 == doctest::Approx(0.495));
  CHECK(a.trace.capped);

  const Adjusted b = AdjustForDimension(BinaryScores(0.9, 0.1), 1.0,
                                        Dimension::kValence, FusionParams{});
  CHECK(b.scores == BinaryScores(1.0, 0.0));
  CHECK(b.trace.capped);
}

TEST_CASE("ApplyGetAdjustment runs valence then dominance") {
  const FusionParams p;
  const GetAdjusted neutral =
      ApplyGetAdjustment(BinaryScores(0.7, 0.3), {5.0, 4.5, 2}, p);
  CHECK(neutral.scores == BinaryScores(0.7, 0.3));

  const GetAdjusted two = ApplyGetAdjustment(S(0.5), {3.0, 6.0, 1}, p);
  CHECK(std::abs(two.scores.violation() - 0.61) <= kTol);
  CHECK(std::abs(two.scores.no_violation() - 0.39) <= kTol);
  REQUIRE(two.traces.size() == 2);
  CHECK(two.traces[0].dimension == Dimension::kValence);
  CHECK(std::abs(two.traces[0].applied_adjustment - 0.165) <= kTol);
  CHECK(two.traces[1].dimension == Dimension::kDominance);
  CHECK(std::abs(two.traces[1].applied_adjustment - 0.055) <= kTol);

  const GetAdjusted one = ApplyGetAdjustment(BinaryScores(0.6, 0.4),
                                             {7.5, 5.0, 1}, p);
  CHECK(std::abs(one.scores.violation() - 0.38) <= kTol);
  CHECK(std::abs(one.scores.no_violation() - 0.62) <= kTol);
}

TEST_CASE("matches the reference procedure whenever no cap engages") {
  std::mt19937_64 rng(2024);
  const FusionParams p;
  int compared = 0;
  for (int i = 0; i < 20000; ++i) {
    const double v = testing::Uniform(rng, 0.0, 1.0);
    const double d1 = testing::Uniform(rng, 1.0, 10.0);
    const double d2 = testing::Uniform(rng, 1.0, 10.0);
    const GetAdjusted got = ApplyGetAdjustment(S(v), {d1, d2, 1}, p);
    if (got.traces[0].capped || got.traces[1].capped) continue;
    const auto [rv, rnv] = ReferenceProcedure(v, 1.0 - v, d1, d2);
    REQUIRE(std::abs(got.scores.violation() - rv) <= 1e-12);
    REQUIRE(std::abs(got.scores.no_violation() - rnv) <= 1e-12);
    ++compared;
  }
  CHECK(compared > 5000);
}

TEST_CASE("trace invariants and the per-dimension bound") {
  std::mt19937_64 rng(99);
  const FusionParams p;
  const double bound =
      std::max(10.0 - p.neutral_high, p.neutral_low - 1.0) * p.adjust_factor;
  CHECK(bound == doctest::Approx(0.495));
  for (int i = 0; i < 20000; ++i) {
    const double v = testing::Uniform(rng, 0.0, 1.0);
    const double d = testing::Uniform(rng, 1.0, 10.0);
    const Adjusted a = AdjustForDimension(S(v), d, Dimension::kValence, p);
    const double uncapped = a.trace.delta_from_neutral * p.adjust_factor;
    REQUIRE(a.trace.applied_adjustment <= uncapped);
    REQUIRE(a.trace.capped == (a.trace.applied_adjustment < uncapped));
    REQUIRE(uncapped <= bound + 1e-12);
    REQUIRE(std::abs(a.scores.violation() + a.scores.no_violation() - 1.0) <=
            kTol);
  }
}

TEST_CASE("adjustment is continuous across the neutral bounds") {
  const FusionParams p;
  for (double edge : {4.5, 5.5}) {
    for (double eps : {1e-3, 1e-6, 1e-9}) {
      const double lo = AdjustForDimension(S(0.5), edge - eps,
                                           Dimension::kValence, p)
                            .scores.violation();
      const double hi = AdjustForDimension(S(0.5), edge + eps,
                                           Dimension::kValence, p)
                            .scores.violation();
      CHECK(std::abs(hi - lo) <= 2.0 * eps * p.adjust_factor + 1e-12);
    }
  }
}

TEST_CASE("InferImage falls back to raw scores without persons") {
  const FusionParams p;
  const BinaryScores raw(0.8, 0.2);
  const Decision none = InferImage(raw, {}, {}, p);
  CHECK(none.label == Label::kViolation);
  CHECK(none.scores == raw);
  CHECK_FALSE(none.get.has_value());
  CHECK(none.traces.empty());

  const std::vector<Detection> weak = {{{0, 0, 5, 5}, "person", 0.3},
                                       {{0, 0, 5, 5}, "person", 0.5},
                                       {{0, 0, 5, 5}, "dog", 0.99}};
  const Decision filtered = InferImage(BinaryScores(0.6, 0.4), weak, {}, p);
  CHECK(filtered.label == Label::kViolation);
  CHECK(filtered.scores == BinaryScores(0.6, 0.4));
  CHECK_FALSE(filtered.get.has_value());
}

TEST_CASE("InferImage applies GET with persons present") {
  const FusionParams p;
  const std::vector<Detection> dets = {{{0, 0, 5, 5}, "person", 0.9},
                                       {{0, 0, 5, 5}, "car", 0.9}};
  const std::vector<PersonVAD> vads = {{3.0, 7.0, 6.0}};
  const Decision d = InferImage(S(0.5), dets, vads, p);
  CHECK(d.label == Label::kViolation);
  CHECK(std::abs(d.scores.violation() - 0.61) <= kTol);
  CHECK(std::abs(d.scores.no_violation() - 0.39) <= kTol);
  REQUIRE(d.get.has_value());
  CHECK(d.get->person_count == 1);
  CHECK(d.traces.size() == 2);
  CHECK_FALSE(d.covered);
}

TEST_CASE("InferImage rejects misaligned VAD lists") {
  const std::vector<Detection> dets = {{{0, 0, 5, 5}, "person", 0.9}};
  try {
    InferImage(S(0.5), dets, {}, FusionParams{});
    FAIL("expected MisalignedAnnotations");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMisalignedAnnotations);
  }
  const std::vector<PersonVAD> two = {{5, 5, 5}, {5, 5, 5}};
  CHECK_THROWS_AS(InferImage(S(0.5), dets, two, FusionParams{}), Error);
}

TEST_CASE("zero adjust factor reproduces the vanilla decision") {
  FusionParams p;
  p.adjust_factor = 0.0;
  const std::vector<Detection> dets = {{{0, 0, 5, 5}, "person", 0.9}};
  const std::vector<PersonVAD> vads = {{9.0, 5.0, 1.0}};
  const Decision d = InferImage(S(0.3), dets, vads, p);
  CHECK(d.scores == S(0.3));
}

}  // namespace
}  // namespace hrfusion
