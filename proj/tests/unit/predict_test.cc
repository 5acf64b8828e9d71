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
#include "dmp/predict/datasets.h"
#include "dmp/predict/features.h"
#include "dmp/predict/models.h"
#include "oracles.h"
#include "test_util.h"

namespace dmp::predict {
namespace {

using dmp::testing::ymd;
using records::BehaviorKind;

FeatureVector fv(std::vector<double> values) { return {std::move(values), "toy"}; }

std::vector<RegressionRow> toy_rows(const std::vector<std::vector<double>>& x, const std::vector<double>& y) {
  std::vector<RegressionRow> rows;
  for (std::size_t i = 0; i < x.size(); ++i) rows.push_back({fv(x[i]), y[i]});
  return rows;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIo;
}

// ---- features ----

records::StudentRecord history_record() {
  records::StudentRecord r = dmp::testing::make_record('a');
  r.scores = {{"math", 2021, 1, 70}, {"math", 2021, 2, 80}, {"english", 2021, 2, 50}};
  r.behavior.clear();
  for (unsigned d = 1; d <= 10; ++d) r.behavior.push_back({BehaviorKind::kAttendance, ymd(2021, 10, d), std::nullopt});
  r.behavior.push_back({BehaviorKind::kHomeworkSubmitted, ymd(2021, 10, 2), std::nullopt});
  r.behavior.push_back({BehaviorKind::kHomeworkSubmitted, ymd(2022, 3, 2), std::nullopt});
  r.behavior.push_back({BehaviorKind::kHomeworkMissed, ymd(2022, 3, 3), std::nullopt});
  r.behavior.push_back({BehaviorKind::kHomeworkMissed, ymd(2022, 3, 4), std::nullopt});
  r.behavior.push_back({BehaviorKind::kPunishment, ymd(2022, 3, 5), "late"});
  r.behavior.push_back({BehaviorKind::kAward, ymd(2022, 4, 5), "Science Fair"});
  // After the cutoff: must be ignored.
  r.behavior.push_back({BehaviorKind::kAbsence, ymd(2022, 9, 5), std::nullopt});
  r.scores.push_back({"math", 2022, 1, 10});
  r.activities = {{"Choir", records::ActivityCategory::kArts, 12}, {"Chess", records::ActivityCategory::kAcademic, 3}};
  records::canonicalize(r);
  return r;
}

TEST(Features, MeanOfLastTwoAndRates) {
  auto f = extract_features(history_record(), "math", {2022, 1});
  ASSERT_EQ(f.values.size(), kFeatureCount);
  EXPECT_EQ(f.schema_id, kFeatureSchemaId);
  EXPECT_DOUBLE_EQ(f.values[kMeanLast2], 75.0);
  EXPECT_DOUBLE_EQ(f.values[kLastScore], 80.0);
  EXPECT_DOUBLE_EQ(f.values[kAttendanceRate], 1.0);
  EXPECT_DOUBLE_EQ(f.values[kHomeworkRate], 0.5);
  EXPECT_DOUBLE_EQ(f.values[kPunishments], 1.0);
  EXPECT_DOUBLE_EQ(f.values[kAwards], 1.0);
  EXPECT_DOUBLE_EQ(f.values[kActivityCount], 2.0);
  EXPECT_DOUBLE_EQ(f.values[kActivityHours], 15.0);
  for (auto slot : {kMissingMeanLast2, kMissingLastScore, kMissingAttendance, kMissingHomework}) {
    EXPECT_EQ(f.values[slot], 0.0);
  }
}

TEST(Features, SingleTermScoreUsedForBothSlots) {
  auto r = history_record();
  r.scores = {{"math", 2021, 1, 60}};
  auto f = extract_features(r, "math", {2021, 2});
  EXPECT_DOUBLE_EQ(f.values[kMeanLast2], 60.0);
  EXPECT_DOUBLE_EQ(f.values[kLastScore], 60.0);
  EXPECT_EQ(f.values[kMissingLastScore], 0.0);
  EXPECT_EQ(f.values[kMissingMeanLast2], 0.0);
}

TEST(Features, MissingSlotsAreNanWithIndicator) {
  auto r = history_record();
  auto f = extract_features(r, "physics", {2022, 1});
  EXPECT_TRUE(std::isnan(f.values[kMeanLast2]));
  EXPECT_EQ(f.values[kMissingMeanLast2], 1.0);
  EXPECT_EQ(f.values[kMissingLastScore], 1.0);
  r.behavior.clear();
  auto g = extract_features(r, "math", {2022, 1});
  EXPECT_TRUE(std::isnan(g.values[kAttendanceRate]));
  EXPECT_EQ(g.values[kMissingAttendance], 1.0);
  EXPECT_EQ(g.values[kMissingHomework], 1.0);
}

TEST(Features, NoHistory) {
  records::StudentRecord r;
  r.token = dmp::testing::token_of('a');
  r.school = "s";
  EXPECT_EQ(code_of([&] { extract_features(r, "math", {2021, 1}); }), ErrorCode::kNoHistory);
  // Only future data counts as none.
  r.scores = {{"math", 2023, 1, 50}};
  EXPECT_EQ(code_of([&] { extract_features(r, "math", {2021, 1}); }), ErrorCode::kNoHistory);
}

TEST(Features, AllSubjectsAveragesPerTerm) {
  auto f = extract_features(history_record(), kAllSubjects, {2022, 1});
  // Terms: 2021/1 -> 70; 2021/2 -> (80+50)/2.
  EXPECT_DOUBLE_EQ(f.values[kLastScore], 65.0);
  EXPECT_DOUBLE_EQ(f.values[kMeanLast2], 67.5);
}

// ---- ridge ----

TEST(Ridge, ExactLinearFit) {
  auto rows = toy_rows({{1}, {2}, {3}}, {2, 4, 6});
  auto m = fit_ridge(rows, 0.0);
  EXPECT_NEAR(m.weights[0], 2.0, 1e-10);
  EXPECT_NEAR(m.intercept, 0.0, 1e-10);
  EXPECT_NEAR(predict_score(m, fv({2.5})), 5.0, 1e-10);
}

TEST(Ridge, PenalizedHandSolve) {
  auto rows = toy_rows({{1}, {2}, {3}}, {2, 4, 6});
  auto m = fit_ridge(rows, 1.0);
  EXPECT_NEAR(m.weights[0], 4.0 / 3.0, 1e-10);
  EXPECT_NEAR(m.intercept, 4.0 / 3.0, 1e-10);
  auto oracle = oracle::ridge_gradient_descent({{1}, {2}, {3}}, {2, 4, 6}, 1.0);
  EXPECT_NEAR(oracle.weights[0], m.weights[0], 1e-10);
  EXPECT_NEAR(oracle.intercept, m.intercept, 1e-10);
}

TEST(Ridge, DuplicateColumnSingular) {
  auto rows = toy_rows({{1, 1}, {2, 2}, {3, 3}}, {2, 4, 6});
  EXPECT_EQ(code_of([&] { fit_ridge(rows, 0.0); }), ErrorCode::kSingularSystem);
  EXPECT_NO_THROW(fit_ridge(rows, 0.1));
}

TEST(Ridge, Preconditions) {
  EXPECT_EQ(code_of([&] { fit_ridge(toy_rows({{1}}, {2}), 0.0); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { fit_ridge(toy_rows({{1}, {2}}, {2, 101}), 0.0); }), ErrorCode::kInvalidArgument);
  auto rows = toy_rows({{1}, {2}}, {2, 4});
  rows[1].features.schema_id = "other";
  EXPECT_EQ(code_of([&] { fit_ridge(rows, 0.0); }), ErrorCode::kSchemaMismatch);
}

TEST(Ridge, ConstantColumnGetsZeroWeight) {
  auto m = fit_ridge(toy_rows({{1, 5}, {2, 5}, {3, 5}}, {2, 4, 6}), 0.0);
  EXPECT_EQ(m.weights[1], 0.0);
  EXPECT_EQ(m.stats.stds[1], 0.0);
  EXPECT_NEAR(m.weights[0], 2.0, 1e-10);
}

TEST(Ridge, ClampAndSchemaMismatch) {
  LinearModel m{"toy", {1.0}, -10.0, 0.0, {{0.0}, {1.0}}};
  EXPECT_EQ(predict_score(m, fv({2.7})), 0.0);
  EXPECT_NEAR(predict_raw(m, fv({2.7})), -7.3, 1e-12);
  EXPECT_EQ(predict_score(m, fv({500})), 100.0);
  EXPECT_EQ(code_of([&] { predict_score(m, fv({1, 2})); }), ErrorCode::kSchemaMismatch);
  EXPECT_EQ(code_of([&] { predict_score(m, FeatureVector{{1}, "x"}); }), ErrorCode::kSchemaMismatch);
}

TEST(Ridge, NanFeatureImputedWithMean) {
  auto m = fit_ridge(toy_rows({{1}, {2}, {3}}, {2, 4, 6}), 0.0);
  EXPECT_NEAR(predict_score(m, fv({std::nan("")})), 4.0, 1e-10);
}

struct RandomProblem {
  std::vector<std::vector<double>> x;
  std::vector<double> y;
};

RandomProblem random_problem(Rng& rng, std::size_t n, std::size_t p, double noise) {
  RandomProblem out;
  std::vector<double> beta(p);
  for (auto& b : beta) b = rng.uniform(-3, 3);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(p);
    double y = 50;
    for (std::size_t j = 0; j < p; ++j) {
      row[j] = rng.uniform(-2, 2) + j;
      y += beta[j] * row[j];
    }
    out.x.push_back(row);
    out.y.push_back(std::clamp(y + rng.normal(0, noise), 0.0, 100.0));
  }
  return out;
}

TEST(RidgeProperties, ResidualsOrthogonalToCenteredDesign) {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    auto prob = random_problem(rng, 60, 4, 2.0);
    auto m = fit_ridge(toy_rows(prob.x, prob.y), 0.0);
    std::vector<double> mean(4, 0.0);
    for (const auto& row : prob.x) {
      for (std::size_t j = 0; j < 4; ++j) mean[j] += row[j] / prob.x.size();
    }
    for (std::size_t j = 0; j < 4; ++j) {
      double dot = 0.0;
      for (std::size_t i = 0; i < prob.x.size(); ++i) {
        dot += (prob.x[i][j] - mean[j]) * (prob.y[i] - predict_raw(m, fv(prob.x[i])));
      }
      EXPECT_LT(std::abs(dot), 1e-8);
    }
  }
}

TEST(RidgeProperties, MonotoneShrinkage) {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    auto prob = random_problem(rng, 40, 5, 3.0);
    auto rows = toy_rows(prob.x, prob.y);
    double prev = INFINITY;
    for (double lambda : {0.0, 0.01, 0.1, 1.0, 10.0, 100.0, 1000.0}) {
      auto w = standardized_weights(fit_ridge(rows, lambda));
      double norm = 0.0;
      for (double v : w) norm += v * v;
      norm = std::sqrt(norm);
      EXPECT_LE(norm, prev + 1e-12);
      prev = norm;
    }
  }
}

TEST(RidgeProperties, MatchesGradientDescentOracle) {
  Rng rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    auto prob = random_problem(rng, 50, 3, 1.0);
    double lambda = rng.uniform(0, 5);
    auto m = fit_ridge(toy_rows(prob.x, prob.y), lambda);
    auto o = oracle::ridge_gradient_descent(prob.x, prob.y, lambda);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(m.weights[j], o.weights[j], 1e-8);
    EXPECT_NEAR(m.intercept, o.intercept, 1e-7);
  }
}

TEST(RidgeProperties, DeterministicSerialization) {
  Rng rng(12);
  auto prob = random_problem(rng, 30, 3, 1.0);
  auto a = to_json(fit_ridge(toy_rows(prob.x, prob.y), 0.5)).dump();
  auto b = to_json(fit_ridge(toy_rows(prob.x, prob.y), 0.5)).dump();
  EXPECT_EQ(a, b);
  auto back = linear_model_from_json(nlohmann::json::parse(a));
  EXPECT_EQ(back, fit_ridge(toy_rows(prob.x, prob.y), 0.5));
  EXPECT_EQ(to_json(back).dump(), a);
}

// ---- logistic ----

std::vector<ClassificationRow> separable(Rng& rng, int n) {
  std::vector<ClassificationRow> rows;
  for (int i = 0; i < n; ++i) {
    int label = i % 2;
    double x1 = rng.uniform(0.5, 2.0) * (label ? 1 : -1);
    double x2 = rng.uniform(-1, 1);
    rows.push_back({fv({x1 + 0.3 * x2, x2}), label});
  }
  return rows;
}

TEST(Logistic, SeparableToyReachesPerfectAccuracy) {
  std::vector<ClassificationRow> rows{
      {fv({0, 0}), 0}, {fv({0, 1}), 0}, {fv({2, 2}), 1}, {fv({2, 3}), 1}};
  LogisticTrace trace;
  auto m = fit_logistic(rows, 0.0, {}, &trace);
  auto metrics = evaluate(m, rows);
  EXPECT_EQ(metrics.accuracy, 1.0);
  ASSERT_GE(trace.losses.size(), 2u);
  for (std::size_t i = 1; i < trace.losses.size(); ++i) EXPECT_LT(trace.losses[i], trace.losses[i - 1]);
}

TEST(Logistic, SingleClassAndTooFewRows) {
  std::vector<ClassificationRow> rows{{fv({0}), 1}, {fv({1}), 1}, {fv({2}), 1}, {fv({3}), 1}};
  EXPECT_EQ(code_of([&] { fit_logistic(rows, 0.1); }), ErrorCode::kSingleClass);
  rows.pop_back();
  rows[0].label = 0;
  EXPECT_EQ(code_of([&] { fit_logistic(rows, 0.1); }), ErrorCode::kInvalidArgument);
}

TEST(Logistic, HeavyPenaltyGivesBaseRateIntercept) {
  Rng rng(4);
  std::vector<ClassificationRow> rows;
  int positives = 0;
  for (int i = 0; i < 40; ++i) {
    int label = rng.bernoulli(0.3) ? 1 : 0;
    positives += label;
    rows.push_back({fv({rng.normal(label, 1), rng.normal(0, 1)}), label});
  }
  auto m = fit_logistic(rows, 1e6);
  double base = static_cast<double>(positives) / rows.size();
  double logit = std::log(base / (1 - base));
  for (double w : standardized_weights(LinearModel{m.schema_id, m.weights, m.intercept, m.lambda, m.stats})) {
    EXPECT_NEAR(w, 0.0, 1e-3);
  }
  // With zero weights the raw intercept equals the standardized one.
  EXPECT_NEAR(m.intercept + m.weights[0] * m.stats.means[0] + m.weights[1] * m.stats.means[1], logit, 1e-3);
}

TEST(Logistic, GradientMatchesCentralDifferences) {
  Rng rng(13);
  auto rows = separable(rng, 30);
  LogisticProblem prob;
  for (const auto& r : rows) {
    prob.z.push_back(r.features.values);
    prob.labels.push_back(r.label);
  }
  prob.lambda = 0.3;
  for (int i = 0; i < 100; ++i) {
    std::vector<double> params{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
    auto analytic = prob.gradient(params);
    auto numeric = oracle::central_difference([&](const std::vector<double>& x) { return prob.objective(x); }, params);
    EXPECT_LT(oracle::relative_error(analytic, numeric), 1e-5);
  }
}

TEST(Logistic, RiskInUnitIntervalAndMonotone) {
  Rng rng(14);
  auto rows = separable(rng, 40);
  auto m = fit_logistic(rows, 0.01);
  ASSERT_GT(m.weights[0], 0.0);
  double prev = -1;
  for (double x = -5; x <= 5; x += 0.1) {
    double p = predict_behavior_risk(m, fv({x, 0.2}));
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
    EXPECT_GE(p, prev);
    prev = p;
  }
  LogisticModel zero{"toy", {0, 0}, 0, 0, {{0, 0}, {1, 1}}};
  EXPECT_EQ(predict_behavior_risk(zero, fv({3, -2})), 0.5);
  EXPECT_EQ(code_of([&] { predict_behavior_risk(zero, fv({1})); }), ErrorCode::kSchemaMismatch);
}

TEST(Logistic, DeterministicAndRoundTrips) {
  Rng rng(15);
  auto rows = separable(rng, 40);
  auto a = fit_logistic(rows, 0.05);
  auto b = fit_logistic(rows, 0.05);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  EXPECT_EQ(logistic_model_from_json(to_json(a)), a);
  EXPECT_LT(a.final_gradient_norm, 1e-6);
  EXPECT_GT(a.iterations, 0);
}

// ---- grades, labels, metrics ----

TEST(Grades, BandsAndTies) {
  const auto& bins = default_exam_bins();
  EXPECT_EQ(grade_for_score(100, bins), 7);
  EXPECT_EQ(grade_for_score(0, bins), 0);
  EXPECT_EQ(grade_for_score(bins[2], bins), 3);
  EXPECT_EQ(grade_for_score(std::nextafter(bins[2], 0.0), bins), 2);
  int prev = 0;
  for (double s = 0; s <= 100; s += 0.5) {
    int g = grade_for_score(s, bins);
    EXPECT_GE(g, prev);
    prev = g;
  }
}

TEST(Grades, InvalidBins) {
  std::vector<double> bad{10, 20, 20, 40, 50, 60, 70};
  EXPECT_EQ(code_of([&] { grade_for_score(50, bad); }), ErrorCode::kInvalidBins);
  std::vector<double> short_bins{10, 20};
  EXPECT_EQ(code_of([&] { validate_bins(short_bins); }), ErrorCode::kInvalidBins);
  std::vector<double> edge{0, 20, 30, 40, 50, 60, 70};
  EXPECT_EQ(code_of([&] { validate_bins(edge); }), ErrorCode::kInvalidBins);
}

TEST(RiskLabel, Rules) {
  auto r = dmp::testing::make_record('a');
  r.behavior.clear();
  for (unsigned d = 1; d <= 6; ++d) r.behavior.push_back({BehaviorKind::kAbsence, ymd(2021, 10, d), std::nullopt});
  EXPECT_EQ(label_risk(r, {5, 2}, {2021, 1}), 1);
  EXPECT_EQ(label_risk(r, {7, 2}, {2021, 1}), 0);
  // Term 2021/2 has a math score only.
  EXPECT_EQ(label_risk(r, {5, 2}, {2021, 2}), 0);
  EXPECT_EQ(label_risk(r, {0, 2}, {2021, 2}), 1);
  EXPECT_EQ(code_of([&] { label_risk(r, {5, 2}, {2025, 1}); }), ErrorCode::kUnknownTerm);
  EXPECT_EQ(code_of([&] { label_risk(r, {-1, 2}, {2021, 1}); }), ErrorCode::kInvalidArgument);
}

TEST(Metrics, RegressionHandComputed) {
  LinearModel m{"toy", {1.0}, 0.0, 0.0, {{0.0}, {1.0}}};
  auto rows = toy_rows({{10}, {20}, {30}, {40}}, {12, 18, 30, 44});
  // errors: -2, 2, 0, -4
  auto metrics = evaluate(m, rows);
  EXPECT_NEAR(metrics.rmse, std::sqrt((4 + 4 + 0 + 16) / 4.0), 1e-12);
  EXPECT_NEAR(metrics.mae, 2.0, 1e-12);
  EXPECT_EQ(evaluate(m, toy_rows({{10}, {20}}, {10, 20})).rmse, 0.0);
  EXPECT_EQ(code_of([&] { evaluate(m, std::span<const RegressionRow>{}); }), ErrorCode::kEmptyHoldout);
}

TEST(Metrics, ConstantClassifierOnBalancedSet) {
  LogisticModel zero{"toy", {0}, 0, 0, {{0}, {1}}};
  std::vector<ClassificationRow> rows{{fv({1}), 1}, {fv({2}), 0}, {fv({3}), 1}, {fv({4}), 0}};
  auto metrics = evaluate(zero, rows);
  EXPECT_EQ(metrics.accuracy, 0.5);
  ASSERT_TRUE(metrics.auc);
  EXPECT_EQ(*metrics.auc, 0.5);
}

TEST(Metrics, AucMatchesPairwiseOracle) {
  Rng rng(16);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> scores;
    std::vector<int> labels;
    for (int i = 0; i < 30; ++i) {
      scores.push_back(std::round(rng.uniform(0, 5)));  // many ties
      labels.push_back(rng.bernoulli(0.4));
    }
    labels[0] = 1;
    labels[1] = 0;
    auto a = auc(scores, labels);
    ASSERT_TRUE(a);
    EXPECT_NEAR(*a, oracle::pairwise_auc(scores, labels), 1e-12);
  }
  std::vector<double> s{0.1, 0.2};
  std::vector<int> l{1, 1};
  EXPECT_FALSE(auc(s, l));
}

// ---- datasets ----

TEST(Datasets, InschoolRowsSkipFirstTermWithoutHistory) {
  auto r = history_record();
  std::vector<records::StudentRecord> recs{r};
  auto rows = inschool_rows(recs, "math");
  // math terms: 2021/1 (behavior before? none before Sep 2021) 2021/2, 2022/1.
  EXPECT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows.back().target, 10.0);
  EXPECT_DOUBLE_EQ(rows.back().features.values[kLastScore], 80.0);
}

TEST(Datasets, ExamRowsNeedThreeYears) {
  auto r = history_record();
  std::vector<records::StudentRecord> recs{r};
  EXPECT_TRUE(exam_rows(recs, "math").empty());
  recs[0].scores.push_back({"math", 2023, 1, 60});
  recs[0].scores.push_back({"math", 2023, 2, 70});
  auto rows = exam_rows(recs, "math");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].target, 65.0);
}

TEST(Datasets, BehaviorRowsLabelEachTerm) {
  auto r = history_record();
  std::vector<records::StudentRecord> recs{r};
  auto rows = behavior_rows(recs, {1, 1});
  // Terms with data: 2021/1, 2021/2, 2022/1; the first has no history.
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].label, 1);  // punishment in 2021/2
  EXPECT_EQ(rows[1].label, 1);  // absence in 2022/1
}

}  // namespace
}  // namespace dmp::predict
