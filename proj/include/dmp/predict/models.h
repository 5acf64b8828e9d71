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

#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dmp/predict/features.h"
#include "dmp/records/records.h"
#include "json.hpp"

namespace dmp::predict {

// Column statistics of the imputed training design. A zero std marks a
// constant column: it is passed through unscaled and gets weight zero.
struct StandardizationStats {
  std::vector<double> means;
  std::vector<double> stds;

  bool operator==(const StandardizationStats&) const = default;
};

// Weights and intercept are expressed in raw feature units, so that
// prediction is weights . x + intercept after imputation. Training
// standardizes columns (sample std) and penalizes the standardized weights.
struct LinearModel {
  std::string schema_id;
  std::vector<double> weights;
  double intercept = 0.0;
  double lambda = 0.0;
  StandardizationStats stats;

  bool operator==(const LinearModel&) const = default;
};

struct LogisticModel {
  std::string schema_id;
  std::vector<double> weights;
  double intercept = 0.0;
  double lambda = 0.0;
  StandardizationStats stats;
  int iterations = 0;
  double final_gradient_norm = 0.0;

  bool operator==(const LogisticModel&) const = default;
};

struct RegressionRow {
  FeatureVector features;
  double target = 0.0;
};

struct ClassificationRow {
  FeatureVector features;
  int label = 0;
};

// Exact ridge solve of the centered, standardized normal equations through a
// Cholesky factorization; the intercept is not penalized. Throws
// Error(kInvalidArgument) for fewer than two rows or targets outside [0,100],
// Error(kSchemaMismatch) for inconsistent rows, and Error(kSingularSystem)
// when lambda == 0 and the centered design is rank-deficient.
LinearModel fit_ridge(std::span<const RegressionRow> rows, double lambda);

// Optimizer settings for fit_logistic.
struct LogisticOptions {
  double learning_rate = 0.1;
  double gradient_tolerance = 1e-6;
  int max_iterations = 10000;
};

// Trace of accepted optimizer steps, for tests.
struct LogisticTrace {
  std::vector<double> losses;
};

// Minimizes mean negative log-likelihood + lambda/2 * |w|^2 (standardized
// weights, intercept unpenalized) by full-batch gradient descent from zero.
// The L2 term is applied as an exact proximal shrink after each gradient step
// on the likelihood; the step size is halved whenever a trial step does not
// lower the objective. Stops once the objective gradient's inf-norm drops
// below the tolerance or after max_iterations. Throws Error(kSingleClass)
// when all labels agree and Error(kInvalidArgument) for fewer than 4 rows.
LogisticModel fit_logistic(std::span<const ClassificationRow> rows, double lambda,
                           const LogisticOptions& options = {}, LogisticTrace* trace = nullptr);

// Objective and gradient over standardized rows, exposed for gradient checks.
// params = [w_1..w_p, b].
struct LogisticProblem {
  std::vector<std::vector<double>> z;  // standardized design rows
  std::vector<int> labels;
  double lambda = 0.0;

  double objective(std::span<const double> params) const;
  std::vector<double> gradient(std::span<const double> params) const;
};

// Throws Error(kSchemaMismatch) when the vector does not fit the model.
double predict_score(const LinearModel& model, const FeatureVector& features);
double predict_raw(const LinearModel& model, const FeatureVector& features);
double predict_behavior_risk(const LogisticModel& model, const FeatureVector& features);

// Grade band = number of cut scores <= score. Throws Error(kInvalidBins)
// unless `bins` holds 7 strictly increasing cuts inside (0,100).
int grade_for_score(double score, std::span<const double> bins);
int predict_exam_grade(const LinearModel& model, const FeatureVector& features,
                       std::span<const double> bins);
void validate_bins(std::span<const double> bins);

// Default exam cut scores.
const std::vector<double>& default_exam_bins();

// Standardized-space weights (weights * std), the quantity the ridge
// penalty acts on.
std::vector<double> standardized_weights(const LinearModel& model);

struct RiskLabelRule {
  int absence_threshold = 5;
  int discipline_threshold = 2;
};

// 1 iff absences >= A or punishments >= D within `term`. Throws
// Error(kUnknownTerm) when the record has no score or event in that term,
// Error(kInvalidArgument) for negative thresholds.
int label_risk(const records::StudentRecord& record, const RiskLabelRule& rule,
               const records::TermRef& term);

struct RegressionMetrics {
  double rmse = 0.0;
  double mae = 0.0;
};

struct ClassificationMetrics {
  double accuracy = 0.0;
  std::optional<double> auc;  // absent when the holdout has a single class
};

// Throws Error(kEmptyHoldout) for an empty holdout.
RegressionMetrics evaluate(const LinearModel& model, std::span<const RegressionRow> holdout);
ClassificationMetrics evaluate(const LogisticModel& model, std::span<const ClassificationRow> holdout);

// Rank-statistic AUC with tied scores counted half.
std::optional<double> auc(std::span<const double> scores, std::span<const int> labels);

// Wire form: {kind, schema_id, weights[], intercept, lambda, stats{means[],
// stds[]}} plus training metadata for logistic models.
nlohmann::json to_json(const LinearModel& model);
nlohmann::json to_json(const LogisticModel& model);
LinearModel linear_model_from_json(const nlohmann::json& doc);
LogisticModel logistic_model_from_json(const nlohmann::json& doc);

// Trained models the alert feed and prediction endpoints read from.
struct ModelSet {
  std::map<std::pair<records::SchoolId, std::string>, LinearModel> inschool;  // (school, subject)
  std::map<std::string, LinearModel> exam;                                    // subject
  std::optional<LogisticModel> behavior;
  std::vector<double> exam_bins = default_exam_bins();

  bool operator==(const ModelSet&) const = default;
};

}  // namespace dmp::predict
