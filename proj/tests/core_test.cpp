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
#include <limits>
#include <random>

#include "hrfusion/core.hpp"
#include "test_util.hpp"

namespace hrfusion {
namespace {

ErrorCode CodeOf(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an hrfusion::Error");
  return ErrorCode::kIoError;
}

TEST_CASE("ValidateScores accepts a valid pair unchanged") {
  const BinaryScores s = ValidateScores(0.7, 0.3);
  CHECK(s.violation() == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(s.no_violation() == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("ValidateScores repairs rounding-scale drift") {
  const BinaryScores s = ValidateScores(0.5000000001, 0.4999999999);
  CHECK(std::abs(s.violation() - 0.5) <= 1e-9);
  CHECK(std::abs(s.no_violation() - 0.5) <= 1e-9);

  const BinaryScores t = ValidateScores(0.6000004, 0.4);
  CHECK(std::abs(t.violation() + t.no_violation() - 1.0) <= 1e-12);

  const BinaryScores u = ValidateScores(-5e-10, 1.0);
  CHECK(u.violation() == 0.0);
}

TEST_CASE("ValidateScores rejects non-probability pairs") {
  CHECK(CodeOf([] { ValidateScores(0.9, 0.9); }) ==
        ErrorCode::kNotAProbabilityPair);
  CHECK(CodeOf([] { ValidateScores(1.2, -0.2); }) ==
        ErrorCode::kNotAProbabilityPair);
  CHECK(CodeOf([] { ValidateScores(0.5, 0.49); }) ==
        ErrorCode::kNotAProbabilityPair);
  CHECK(CodeOf([] {
          ValidateScores(std::numeric_limits<double>::quiet_NaN(), 0.5);
        }) == ErrorCode::kNonFiniteScore);
  CHECK(CodeOf([] {
          ValidateScores(0.5, std::numeric_limits<double>::infinity());
        }) == ErrorCode::kNonFiniteScore);
}

TEST_CASE("every accepted pair sums to one within 1e-9") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double v = testing::Uniform(rng, 0.0, 1.0);
    const double drift = testing::Uniform(rng, -9e-7, 9e-7);
    const BinaryScores s = ValidateScores(v, 1.0 - v + drift);
    REQUIRE(std::abs(s.violation() + s.no_violation() - 1.0) <= 1e-9);
    REQUIRE(s.violation() >= 0.0);
    REQUIRE(s.no_violation() <= 1.0);
  }
}

TEST_CASE("BinaryScores constructor enforces the invariant") {
  CHECK_NOTHROW(BinaryScores(0.25, 0.75));
  CHECK_THROWS_AS(BinaryScores(0.25, 0.7), Error);
  CHECK_THROWS_AS(BinaryScores(-0.25, 1.25), Error);
}

TEST_CASE("labels: ties go to no_violation") {
  CHECK(LabelFor(BinaryScores(0.5, 0.5)) == Label::kNoViolation);
  CHECK(LabelFor(BinaryScores(0.51, 0.49)) == Label::kViolation);
  CHECK(LabelFor(BinaryScores(0.2, 0.8)) == Label::kNoViolation);
}

TEST_CASE("label survives monotone rescaling and renormalisation") {
  std::mt19937_64 rng(11);
  auto cube = [](double x) { return x * x * x; };
  auto expo = [](double x) { return std::exp(3.0 * x); };
  for (int i = 0; i < 5000; ++i) {
    const double v = testing::Uniform(rng, 0.0, 1.0);
    const BinaryScores s(v, 1.0 - v);
    for (auto f : {+cube, +expo}) {
      const double a = f(s.violation()), b = f(s.no_violation());
      if (a + b == 0.0) continue;
      const BinaryScores r = ValidateScores(a / (a + b), b / (a + b));
      REQUIRE(LabelFor(r) == LabelFor(s));
    }
  }
}

TEST_CASE("coverage boundary is inclusive") {
  FusionParams p;
  p.coverage_threshold = 0.75;
  CHECK(IsCovered(BinaryScores(0.75, 0.25), p));
  CHECK(IsCovered(BinaryScores(0.25, 0.75), p));
  CHECK_FALSE(IsCovered(BinaryScores(0.7, 0.3), p));
  p.coverage_threshold = 1.0;
  CHECK(IsCovered(BinaryScores(1.0, 0.0), p));
}

TEST_CASE("MakeDecision derives label and coverage") {
  const FusionParams p;
  const Decision d = MakeDecision(BinaryScores(0.8, 0.2), std::nullopt, {}, p);
  CHECK(d.label == Label::kViolation);
  CHECK(d.covered);
  CHECK_FALSE(d.get.has_value());
}

TEST_CASE("FusionParams validation") {
  FusionParams p;
  CHECK_NOTHROW(p.Validate());
  CHECK(p.adjust_factor == 0.11);
  CHECK(p.neutral_low == 4.5);
  CHECK(p.neutral_high == 5.5);
  CHECK(p.detection_threshold == 0.5);
  CHECK(p.coverage_threshold == 0.75);

  auto code = [](FusionParams q) { return CodeOf([&] { q.Validate(); }); };
  FusionParams q = p;
  q.neutral_low = 5.5;
  CHECK(code(q) == ErrorCode::kInvalidParams);
  q = p;
  q.neutral_low = 0.5;
  CHECK(code(q) == ErrorCode::kInvalidParams);
  q = p;
  q.neutral_high = 10.5;
  CHECK(code(q) == ErrorCode::kInvalidParams);
  q = p;
  q.adjust_factor = -0.1;
  CHECK(code(q) == ErrorCode::kInvalidParams);
  q = p;
  q.detection_threshold = 1.5;
  CHECK(code(q) == ErrorCode::kInvalidParams);
  q = p;
  q.coverage_threshold = -0.1;
  CHECK(code(q) == ErrorCode::kInvalidParams);
  q = p;
  q.adjust_factor = 0.0;
  CHECK_NOTHROW(q.Validate());
}

TEST_CASE("PersonVAD range errors name the field") {
  PersonVAD p{11.0, 5.0, 5.0};
  try {
    p.Validate();
    FAIL("expected RangeError");
  } catch (const RangeError& e) {
    CHECK(e.field() == "valence");
    CHECK(e.value() == 11.0);
  }
  p = {5.0, 5.0, 0.5};
  CHECK_THROWS_AS(p.Validate(), RangeError);
  p = {1.0, 10.0, 1.0};
  CHECK_NOTHROW(p.Validate());
}

TEST_CASE("detections and boxes are validated") {
  Detection d{{0, 0, 10, 10}, "person", 0.9};
  CHECK_NOTHROW(d.Validate());
  d.box = {10, 0, 10, 10};
  CHECK_THROWS_AS(d.Validate(), Error);
  d.box = {-1, 0, 10, 10};
  CHECK_THROWS_AS(d.Validate(), Error);
  d.box = {0, 0, 10, 10};
  d.class_label.clear();
  CHECK_THROWS_AS(d.Validate(), Error);
  d.class_label = "person";
  d.confidence = 1.01;
  CHECK_THROWS_AS(d.Validate(), RangeError);
}

TEST_CASE("VAD matrix conversion round-trips") {
  const std::vector<PersonVAD> persons = {{1, 2, 3}, {4.5, 5.5, 6.5}};
  const VadMatrix m = ToMatrix(persons);
  CHECK(m.rows() == 2);
  CHECK(m(1, 2) == 6.5);
  CHECK(FromMatrix(m) == persons);
}

}  // namespace
}  // namespace hrfusion
