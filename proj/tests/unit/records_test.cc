// Copyright 2026 The DMP Platform Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>

#include "dmp/common/error.h"
#include "dmp/common/rng.h"
#include "dmp/records/records.h"
#include "dmp/records/serialize.h"
#include "test_util.h"

namespace dmp::records {
namespace {

using dmp::testing::make_record;
using dmp::testing::token_of;
using dmp::testing::ymd;

bool has_field(const std::vector<Violation>& v, const std::string& field) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.field == field; });
}

TEST(Dates, ParseAndFormat) {
  auto d = parse_date("2024-02-29");
  ASSERT_TRUE(d);
  EXPECT_EQ(format_date(*d), "2024-02-29");
  EXPECT_FALSE(parse_date("2023-02-29"));
  EXPECT_FALSE(parse_date("2023-13-01"));
  EXPECT_FALSE(parse_date("2023-1-01"));
  EXPECT_FALSE(parse_date(""));
}

TEST(Terms, StartAndMembership) {
  EXPECT_EQ(term_start({2021, 1}), ymd(2021, 9, 1));
  EXPECT_EQ(term_start({2021, 2}), ymd(2022, 2, 1));
  EXPECT_EQ(term_of(ymd(2021, 9, 1)), (TermRef{2021, 1}));
  EXPECT_EQ(term_of(ymd(2022, 1, 31)), (TermRef{2021, 1}));
  EXPECT_EQ(term_of(ymd(2022, 2, 1)), (TermRef{2021, 2}));
  EXPECT_EQ(term_of(ymd(2022, 8, 31)), (TermRef{2021, 2}));
  EXPECT_EQ((TermRef{2021, 2}).next(), (TermRef{2022, 1}));
  EXPECT_EQ((TermRef{2022, 1}).prev(), (TermRef{2021, 2}));
  EXPECT_FALSE(is_valid_term({2021, 3}));
}

TEST(Terms, EveryDayBelongsToTheTermStartingBeforeIt) {
  auto day = std::chrono::sys_days(ymd(2020, 1, 1));
  for (int i = 0; i < 3 * 366; ++i, day += std::chrono::days(1)) {
    Date d(day);
    auto t = term_of(d);
    EXPECT_LE(std::chrono::sys_days(term_start(t)), day);
    EXPECT_GT(std::chrono::sys_days(term_start(t.next())), day);
  }
}

TEST(Token, OnlyLowercaseHexOfLength64) {
  EXPECT_TRUE(PseudonymToken::from_hex(std::string(64, 'a')));
  EXPECT_FALSE(PseudonymToken::from_hex(std::string(63, 'a')));
  EXPECT_FALSE(PseudonymToken::from_hex(std::string(64, 'A')));
  EXPECT_FALSE(PseudonymToken::from_hex(std::string(64, 'g')));
}

TEST(Validate, ValidRecordHasNoViolations) { EXPECT_TRUE(validate_record(make_record('a')).empty()); }

TEST(Validate, ScoreAbove100) {
  auto r = make_record('a');
  r.scores[0].score = 105;
  auto v = validate_record(r);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].field, "TermScore.score");
  EXPECT_EQ(v[0].rule, "out of [0,100]");
}

TEST(Validate, RatingAboveOne) {
  auto r = make_record('a');
  r.electives[0].rating = 1.5;
  auto v = validate_record(r);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].field, "ElectiveInteraction.rating");
  EXPECT_EQ(v[0].rule, "out of [0,1]");
}

TEST(Validate, EachInvariantIsReported) {
  auto r = make_record('a');
  r.token = {};
  r.scores.push_back(r.scores[0]);
  r.activities[0].hours = -1;
  r.iep[0].sen_type.clear();
  r.target_grades["math"] = 9;
  r.electives[0].enrolled = false;
  r.scores.push_back({"math", 2022, 3, 50});
  auto v = validate_record(r);
  EXPECT_TRUE(has_field(v, "StudentRecord.token"));
  EXPECT_TRUE(has_field(v, "TermScore"));
  EXPECT_TRUE(has_field(v, "TermScore.term"));
  EXPECT_TRUE(has_field(v, "Activity.hours"));
  EXPECT_TRUE(has_field(v, "IepEntry.sen_type"));
  EXPECT_TRUE(has_field(v, "StudentRecord.target_grades"));
  EXPECT_TRUE(has_field(v, "ElectiveInteraction.enrolled"));
}

TEST(Validate, NanIsOutOfRange) {
  auto r = make_record('a');
  r.scores[0].score = std::nan("");
  EXPECT_TRUE(has_field(validate_record(r), "TermScore.score"));
}

TEST(Merge, Idempotent) {
  auto r = make_record('a');
  EXPECT_EQ(merge_records(r, r), r);
}

TEST(Merge, DisjointTermsUnion) {
  auto a = make_record('a');
  auto b = a;
  a.scores = {{"math", 2021, 1, 70}};
  b.scores = {{"math", 2021, 2, 60}};
  auto m = merge_records(a, b);
  EXPECT_EQ(m.scores.size(), 2u);
}

TEST(Merge, DifferentStudentsThrow) {
  auto a = make_record('a', "A");
  auto b = make_record('a', "B");
  try {
    merge_records(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTokenMismatch);
  }
  EXPECT_THROW(merge_records(make_record('a'), make_record('b')), Error);
}

TEST(Merge, SecondArgumentWinsOnKeyCollision) {
  auto a = make_record('a');
  auto b = make_record('a');
  b.target_grades["math"] = 7;
  b.scores = {{"math", 2021, 1, 10}};
  auto m = merge_records(a, b);
  EXPECT_EQ(m.target_grades.at("math"), 7);
  auto it = std::find_if(m.scores.begin(), m.scores.end(),
                         [](const TermScore& s) { return s.subject == "math" && s.year == 2021 && s.term == 1; });
  ASSERT_NE(it, m.scores.end());
  EXPECT_EQ(it->score, 10);
  EXPECT_EQ(std::count_if(m.scores.begin(), m.scores.end(),
                          [](const TermScore& s) { return s.subject == "math" && s.year == 2021 && s.term == 1; }),
            1);
}

// Random records over a small value space so collisions of identical tuples
// are common.
StudentRecord random_record(Rng& rng) {
  StudentRecord r;
  r.token = token_of('c');
  r.school = "s";
  r.cohort_year = 2021;
  const char* subjects[] = {"math", "art", "music"};
  for (int i = 0, n = static_cast<int>(rng.below(4)); i < n; ++i) {
    // Score derived from the key so colliding keys agree.
    auto subject = subjects[rng.below(3)];
    int year = 2021 + static_cast<int>(rng.below(2));
    int term = 1 + static_cast<int>(rng.below(2));
    bool dup = std::any_of(r.scores.begin(), r.scores.end(), [&](const TermScore& s) {
      return s.subject == subject && s.year == year && s.term == term;
    });
    if (!dup) r.scores.push_back({subject, year, term, 50.0 + year - 2021 + term});
  }
  for (int i = 0, n = static_cast<int>(rng.below(4)); i < n; ++i) {
    r.behavior.push_back({static_cast<BehaviorKind>(rng.below(6)), ymd(2021, 10, 1 + static_cast<unsigned>(rng.below(3))),
                          rng.bernoulli(0.5) ? std::optional<std::string>("x") : std::nullopt});
  }
  for (int i = 0, n = static_cast<int>(rng.below(3)); i < n; ++i) {
    r.activities.push_back({rng.bernoulli(0.5) ? "Choir" : "Chess", ActivityCategory::kArts, 5.0});
  }
  for (int i = 0, n = static_cast<int>(rng.below(3)); i < n; ++i) {
    r.electives.push_back({rng.bernoulli(0.5) ? "e1" : "e2", "s", true, std::nullopt});
  }
  if (rng.bernoulli(0.5)) r.target_grades["math"] = 4;
  canonicalize(r);
  return r;
}

TEST(MergeProperties, CommutativeAssociativeAndValid) {
  Rng rng(42);
  for (int trial = 0; trial < 500; ++trial) {
    auto a = random_record(rng);
    auto b = random_record(rng);
    auto c = random_record(rng);
    ASSERT_TRUE(validate_record(a).empty());
    EXPECT_EQ(merge_records(a, b), merge_records(b, a));
    EXPECT_EQ(merge_records(merge_records(a, b), c), merge_records(a, merge_records(b, c)));
    EXPECT_EQ(merge_records(a, a), a);
    EXPECT_TRUE(validate_record(merge_records(a, b)).empty());
  }
}

TEST(MergeProperties, MergeAllEqualsLeftFold) {
  Rng rng(43);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<StudentRecord> parts;
    for (int i = 0, n = 1 + static_cast<int>(rng.below(6)); i < n; ++i) {
      auto r = random_record(rng);
      for (auto& s : r.scores) s.score = static_cast<double>(rng.below(101));
      r.cohort_year = rng.bernoulli(0.3) ? 0 : 2020 + static_cast<int>(rng.below(3));
      if (rng.bernoulli(0.5)) r.target_grades["math"] = static_cast<int>(rng.below(8));
      parts.push_back(r);
    }
    auto folded = parts.front();
    canonicalize(folded);
    for (std::size_t i = 1; i < parts.size(); ++i) folded = merge_records(folded, parts[i]);
    EXPECT_EQ(merge_all(parts), folded);
  }
  EXPECT_THROW(merge_all({}), Error);
  std::vector<StudentRecord> mixed{make_record('a'), make_record('b')};
  EXPECT_THROW(merge_all(mixed), Error);
}

TEST(Serialize, JsonRoundTrip) {
  auto r = make_record('a');
  r.behavior.push_back({BehaviorKind::kPunishment, ymd(2022, 3, 4), std::nullopt});
  canonicalize(r);
  auto back = record_from_json(to_json(r));
  EXPECT_EQ(back, r);
  auto lines = to_jsonl({r, make_record('b')});
  auto parsed = from_jsonl(lines);
  ASSERT_EQ(parsed.size(), 2u);
  EXPECT_EQ(parsed[0], r);
  EXPECT_EQ(to_jsonl(parsed), lines);
}

TEST(Serialize, MalformedFieldNamesTheField) {
  auto doc = to_json(make_record('a'));
  doc["scores"][0]["score"] = "high";
  try {
    record_from_json(doc);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
    EXPECT_NE(std::string(e.what()).find("score"), std::string::npos);
  }
}

TEST(Categories, SevenInCanonicalOrder) {
  const auto& all = all_activity_categories();
  ASSERT_EQ(all.size(), kActivityCategoryCount);
  EXPECT_EQ(to_string(all.front()), "Academic");
  EXPECT_EQ(to_string(all.back()), "Other");
  for (auto c : all) EXPECT_EQ(parse_activity_category(to_string(c)), c);
}

}  // namespace
}  // namespace dmp::records
