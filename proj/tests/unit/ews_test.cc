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

#include <cmath>

#include "dmp/common/error.h"
#include "dmp/common/rng.h"
#include "dmp/ews/alerts.h"
#include "oracles.h"
#include "test_util.h"

namespace dmp::ews {
namespace {

using dmp::testing::make_record;
using dmp::testing::token_of;

int light(AlertColor c) { return severity(c); }

AlertConfig random_config(Rng& rng) {
  AlertConfig cfg;
  cfg.inschool_yellow_cutoff = -rng.uniform(0, 8);
  cfg.inschool_red_cutoff = cfg.inschool_yellow_cutoff - rng.uniform(0.25, 10);
  if (rng.bernoulli(0.3)) {
    // Cutoffs on the grid exercise the tie rule.
    cfg.inschool_yellow_cutoff = -0.25 * static_cast<double>(rng.below(30));
    cfg.inschool_red_cutoff = cfg.inschool_yellow_cutoff - 0.25 * static_cast<double>(1 + rng.below(30));
  }
  cfg.exam_yellow_deviation = -1 - static_cast<int>(rng.below(3));
  cfg.exam_red_deviation = cfg.exam_yellow_deviation - static_cast<int>(rng.below(4));
  cfg.behavior_yellow = rng.uniform(0.05, 0.6);
  cfg.behavior_red = rng.uniform(cfg.behavior_yellow + 0.01, 1.0);
  return cfg;
}

TEST(Classify, InSchoolExamples) {
  AlertConfig d;
  EXPECT_EQ(classify_inschool(-12, d), AlertColor::kRed);
  EXPECT_EQ(classify_inschool(-5, d), AlertColor::kYellow);
  EXPECT_EQ(classify_inschool(2, d), AlertColor::kGreen);
  EXPECT_EQ(classify_inschool(-10, d), AlertColor::kRed);
  EXPECT_EQ(classify_inschool(-3, d), AlertColor::kYellow);
}

TEST(Classify, ExamExamples) {
  AlertConfig d;
  EXPECT_EQ(classify_exam(4, 4, d), AlertColor::kGreen);
  EXPECT_EQ(classify_exam(3, 4, d), AlertColor::kYellow);
  EXPECT_EQ(classify_exam(1, 4, d), AlertColor::kRed);
  EXPECT_EQ(classify_exam(7, 0, d), AlertColor::kGreen);
  EXPECT_THROW(classify_exam(8, 0, d), Error);
}

TEST(Classify, BehaviorExamples) {
  AlertConfig d;
  EXPECT_EQ(classify_behavior(0.9, d), AlertColor::kRed);
  EXPECT_EQ(classify_behavior(0.5, d), AlertColor::kYellow);
  EXPECT_EQ(classify_behavior(0.0, d), AlertColor::kGreen);
  EXPECT_EQ(classify_behavior(0.7, d), AlertColor::kRed);
  EXPECT_EQ(classify_behavior(0.4, d), AlertColor::kYellow);
  EXPECT_THROW(classify_behavior(1.5, d), Error);
}

TEST(Classify, InvalidConfigRejected) {
  AlertConfig bad;
  bad.inschool_red_cutoff = -3;
  bad.inschool_yellow_cutoff = -10;
  try {
    classify_inschool(0, bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidConfig);
    EXPECT_NE(std::string(e.what()).find("inschool_red_cutoff < inschool_yellow_cutoff"), std::string::npos);
  }
  AlertConfig b2;
  b2.behavior_yellow = 0.8;
  EXPECT_FALSE(config_violations(b2).empty());
  AlertConfig b3;
  b3.exam_yellow_deviation = 0;
  EXPECT_FALSE(config_violations(b3).empty());
  AlertConfig b4;
  b4.exam_red_deviation = 0;
  EXPECT_FALSE(config_violations(b4).empty());
  AlertConfig b5;
  b5.inschool_yellow_cutoff = 1;
  EXPECT_FALSE(config_violations(b5).empty());
  EXPECT_TRUE(config_violations(AlertConfig{}).empty());
}

TEST(ClassifyProperties, OracleEquivalenceOnGrid) {
  Rng rng(21);
  long mismatches = 0;
  for (int c = 0; c < 60; ++c) {
    auto cfg = random_config(rng);
    ASSERT_TRUE(config_violations(cfg).empty());
    for (int i = -80; i <= 80; ++i) {
      double delta = 0.25 * i;
      mismatches += light(classify_inschool(delta, cfg)) !=
                    oracle::light_for_delta(delta, cfg.inschool_red_cutoff, cfg.inschool_yellow_cutoff);
    }
    for (int p = 0; p <= 7; ++p) {
      for (int t = 0; t <= 7; ++t) {
        mismatches += light(classify_exam(p, t, cfg)) !=
                      oracle::light_for_deviation(p, t, cfg.exam_red_deviation, cfg.exam_yellow_deviation);
      }
    }
    for (int i = 0; i <= 400; ++i) {
      double risk = i / 400.0;
      mismatches += light(classify_behavior(risk, cfg)) != oracle::light_for_risk(risk, cfg.behavior_red, cfg.behavior_yellow);
    }
  }
  EXPECT_EQ(mismatches, 0);
}

TEST(ClassifyProperties, MonotoneSeverity) {
  Rng rng(22);
  for (int c = 0; c < 30; ++c) {
    auto cfg = random_config(rng);
    int prev = 3;
    for (double d = -25; d <= 25; d += 0.1) {
      int s = severity(classify_inschool(d, cfg));
      EXPECT_LE(s, prev);
      prev = s;
    }
    prev = -1;
    for (double r = 0; r <= 1.0; r += 0.01) {
      int s = severity(classify_behavior(r, cfg));
      EXPECT_GE(s, prev);
      prev = s;
    }
    prev = 3;
    for (int p = 0; p <= 7; ++p) {
      int s = severity(classify_exam(p, 7, cfg));
      EXPECT_LE(s, prev);
      prev = s;
    }
  }
}

// ---- config store ----

TEST(ConfigStore, SnapshotsAndScopePrecedence) {
  AlertConfigStore store;
  EXPECT_EQ(store.lookup("t1", std::string("Math")).snapshot_id, "cfg-0");
  AlertConfig teacher_default;
  teacher_default.scope = {"t1", std::nullopt};
  teacher_default.inschool_red_cutoff = -8;
  auto id1 = store.update_config(teacher_default);
  AlertConfig math;
  math.scope = {"t1", std::string("Math")};
  math.inschool_red_cutoff = -6;
  auto id2 = store.update_config(math);
  EXPECT_NE(id1, id2);
  EXPECT_EQ(store.lookup("t1", std::string("Math")).snapshot_id, id2);
  EXPECT_EQ(store.lookup("t1", std::string("Art")).snapshot_id, id1);
  EXPECT_EQ(store.lookup("t1", std::nullopt).snapshot_id, id1);
  EXPECT_EQ(store.lookup("t2", std::string("Math")).snapshot_id, "cfg-0");
  // A later update leaves old snapshots readable.
  teacher_default.inschool_red_cutoff = -7;
  auto id3 = store.update_config(teacher_default);
  EXPECT_EQ(store.snapshot(id1)->inschool_red_cutoff, -8);
  EXPECT_EQ(store.lookup("t1", std::nullopt).snapshot_id, id3);
}

TEST(ConfigStore, InvalidUpdateLeavesStoreUntouched) {
  AlertConfigStore store;
  AlertConfig bad;
  bad.inschool_red_cutoff = -3;
  bad.inschool_yellow_cutoff = -10;
  auto before = store.to_json();
  EXPECT_THROW(store.update_config(bad), Error);
  EXPECT_EQ(store.to_json(), before);
  EXPECT_NO_THROW(store.update_config(AlertConfig{}));
}

TEST(ConfigStore, RestoreRoundTrip) {
  AlertConfigStore store;
  AlertConfig c;
  c.scope = {"t9", std::string("math")};
  c.behavior_red = 0.8;
  store.update_config(c);
  AlertConfigStore copy;
  copy.restore(store.to_json());
  EXPECT_EQ(copy.to_json(), store.to_json());
  EXPECT_EQ(copy.lookup("t9", std::string("math")).config, c);
}

TEST(ConfigJson, AliasesAndRoundTrip) {
  auto cfg = alert_config_from_json({{"teacher", "t"}, {"red_cutoff", -6}, {"yellow_cutoff", -2}});
  EXPECT_EQ(cfg.inschool_red_cutoff, -6);
  EXPECT_EQ(cfg.inschool_yellow_cutoff, -2);
  EXPECT_EQ(alert_config_from_json(to_json(cfg)), cfg);
  EXPECT_THROW(alert_config_from_json({{"behavior_red", "high"}}), Error);
}

// ---- feed ----

predict::LinearModel constant_model(double value) {
  predict::LinearModel m;
  m.schema_id = std::string(predict::kFeatureSchemaId);
  m.weights.assign(predict::kFeatureCount, 0.0);
  m.intercept = value;
  m.stats = {std::vector<double>(predict::kFeatureCount, 0.0), std::vector<double>(predict::kFeatureCount, 1.0)};
  return m;
}

// risk = sigmoid(logit(0.9) * (activity_count - 1))
predict::LogisticModel activity_risk_model() {
  predict::LogisticModel m;
  m.schema_id = std::string(predict::kFeatureSchemaId);
  m.weights.assign(predict::kFeatureCount, 0.0);
  double logit = std::log(0.9 / 0.1);
  m.weights[predict::kActivityCount] = logit;
  m.intercept = -logit;
  m.stats = {std::vector<double>(predict::kFeatureCount, 0.0), std::vector<double>(predict::kFeatureCount, 1.0)};
  return m;
}

records::StudentRecord roster_student(char fill, int activities) {
  auto r = make_record(fill);
  r.target_grades.clear();
  r.activities.clear();
  for (int i = 0; i < activities; ++i) {
    r.activities.push_back({"Club" + std::to_string(i), records::ActivityCategory::kArts, 1.0});
  }
  return r;
}

TEST(Feed, BehaviorOrderRedYellowGreen) {
  std::vector<records::StudentRecord> roster{roster_student('a', 0), roster_student('b', 1), roster_student('c', 2)};
  for (auto& r : roster) r.scores.clear();
  predict::ModelSet models;
  models.behavior = activity_risk_model();
  AlertConfigStore configs;
  auto feed = build_alert_feed(roster, models, configs, "default", "2024-09-01T00:00:00Z");
  ASSERT_EQ(feed.alerts.size(), 3u);
  EXPECT_EQ(feed.alerts[0].color, AlertColor::kRed);
  EXPECT_EQ(feed.alerts[0].token, token_of('c'));
  EXPECT_NEAR(feed.alerts[0].metric, 0.9, 1e-12);
  EXPECT_EQ(feed.alerts[1].color, AlertColor::kYellow);
  EXPECT_EQ(feed.alerts[2].color, AlertColor::kGreen);
  EXPECT_TRUE(feed.warnings.empty());
}

TEST(Feed, WorstDeltaFirstWithinColor) {
  // make_record math scores: 70 (2021/1), 65 (2021/2) -> baseline 67.5.
  auto a = roster_student('a', 0);
  auto b = roster_student('b', 0);
  a.scores = {{"math", 2021, 1, 70}, {"math", 2021, 2, 70}};  // baseline 70
  b.scores = {{"math", 2021, 1, 74}, {"math", 2021, 2, 74}};  // baseline 74
  std::vector<records::StudentRecord> roster{a, b};
  predict::ModelSet models;
  models.inschool[{"s1", "math"}] = constant_model(59);  // deltas -11 and -15
  AlertConfigStore configs;
  auto feed = build_alert_feed(roster, models, configs, "default", "t");
  ASSERT_EQ(feed.alerts.size(), 2u);
  EXPECT_EQ(feed.alerts[0].token, token_of('b'));
  EXPECT_NEAR(feed.alerts[0].metric, -15, 1e-9);
  EXPECT_NEAR(feed.alerts[1].metric, -11, 1e-9);
  EXPECT_EQ(feed.alerts[0].color, AlertColor::kRed);
  EXPECT_EQ(feed.alerts[1].color, AlertColor::kRed);
  // Missing behavior model and english model are reported, not fatal.
  EXPECT_EQ(feed.warnings, (std::vector<std::string>{"NoTrainedModel: behavior"}));
}

TEST(Feed, MissingModelsBecomeWarnings) {
  std::vector<records::StudentRecord> roster{make_record('a')};
  predict::ModelSet models;
  models.inschool[{"s1", "math"}] = constant_model(60);
  AlertConfigStore configs;
  auto feed = build_alert_feed(roster, models, configs, "default", "t");
  ASSERT_EQ(feed.alerts.size(), 1u);
  EXPECT_EQ(feed.alerts[0].dimension.kind, DimensionKind::kInSchool);
  EXPECT_EQ(feed.warnings, (std::vector<std::string>{"NoTrainedModel: behavior", "NoTrainedModel: exam math",
                                                     "NoTrainedModel: inschool s1/english"}));
}

TEST(Feed, ExamDimensionUsesTargetsAndBins) {
  auto r = make_record('a');  // target math 5
  std::vector<records::StudentRecord> roster{r};
  predict::ModelSet models;
  models.exam["math"] = constant_model(45);  // grade 3 with default bins
  AlertConfigStore configs;
  auto feed = build_alert_feed(roster, models, configs, "default", "t");
  const Alert* exam = nullptr;
  for (const auto& a : feed.alerts) {
    if (a.dimension.kind == DimensionKind::kExam) exam = &a;
  }
  ASSERT_NE(exam, nullptr);
  EXPECT_EQ(exam->metric, -2);
  EXPECT_EQ(exam->color, AlertColor::kRed);
}

TEST(Feed, AlertsRederiveAndSerializeDeterministically) {
  Rng rng(23);
  std::vector<records::StudentRecord> roster;
  for (char c : std::string("abcdef")) {
    auto r = roster_student(c, static_cast<int>(rng.below(3)));
    r.scores = {{"math", 2021, 1, rng.uniform(40, 90)}, {"math", 2021, 2, rng.uniform(40, 90)}};
    r.target_grades = {{"math", static_cast<int>(rng.below(8))}};
    roster.push_back(r);
  }
  predict::ModelSet models;
  models.inschool[{"s1", "math"}] = constant_model(62);
  models.exam["math"] = constant_model(55);
  models.behavior = activity_risk_model();
  AlertConfigStore configs;
  AlertConfig mine;
  mine.scope = {"t1", std::string("math")};
  mine.inschool_red_cutoff = -4;
  mine.inschool_yellow_cutoff = -1;
  auto snapshot = configs.update_config(mine);
  auto feed = build_alert_feed(roster, models, configs, "t1", "2024-09-01T00:00:00Z");
  EXPECT_EQ(feed.alerts.size(), roster.size() * 3);
  for (const auto& a : feed.alerts) {
    auto cfg = configs.snapshot(a.config_snapshot_id);
    ASSERT_TRUE(cfg);
    EXPECT_EQ(rederive_color(a, *cfg), a.color);
    if (a.dimension.kind != DimensionKind::kBehavior) {
      EXPECT_EQ(a.config_snapshot_id, snapshot);
    }
    EXPECT_EQ(alert_from_json(to_json(a)), a);
  }
  for (std::size_t i = 1; i < feed.alerts.size(); ++i) {
    EXPECT_GE(severity(feed.alerts[i - 1].color), severity(feed.alerts[i].color));
  }
  auto again = build_alert_feed(roster, models, configs, "t1", "2024-09-01T00:00:00Z");
  EXPECT_EQ(to_jsonl(again.alerts), to_jsonl(feed.alerts));
  auto text = to_jsonl(feed.alerts);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), static_cast<long>(feed.alerts.size()));
  EXPECT_NE(text.find("\"color\":\"red\""), std::string::npos);
}

TEST(Feed, ThresholdChangeRecolorsExactlyTheBand) {
  Rng rng(24);
  std::vector<records::StudentRecord> roster;
  for (int i = 0; i < 60; ++i) {
    auto r = roster_student('a', 0);
    std::string hex(64, '0');
    auto id = std::to_string(100 + i);
    hex.replace(64 - id.size(), id.size(), id);
    r.token = *records::PseudonymToken::from_hex(hex);
    double base = rng.uniform(50, 80);
    r.scores = {{"math", 2021, 1, base}, {"math", 2021, 2, base}};
    r.target_grades.clear();
    roster.push_back(r);
  }
  predict::ModelSet models;
  models.inschool[{"s1", "math"}] = constant_model(60);
  AlertConfigStore configs;
  auto before = build_alert_feed(roster, models, configs, "t", "x");
  AlertConfig tighter;
  tighter.scope = {"t", std::nullopt};
  tighter.inschool_red_cutoff = -6;
  configs.update_config(tighter);
  auto after = build_alert_feed(roster, models, configs, "t", "x");
  std::map<std::string, std::pair<AlertColor, double>> old_colors;
  for (const auto& a : before.alerts) old_colors[a.token.str()] = {a.color, a.metric};
  for (const auto& a : after.alerts) {
    auto [old, metric] = old_colors.at(a.token.str());
    bool in_band = metric > -10 && metric <= -6;
    EXPECT_EQ(old != a.color, in_band) << metric;
  }
}

}  // namespace
}  // namespace dmp::ews
