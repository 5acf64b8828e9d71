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

#include "dmp/predict/models.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dmp/common/error.h"

namespace dmp::predict {

namespace {

constexpr double kPivotTolerance = 1e-10;

struct Design {
  std::vector<std::vector<double>> z;  // standardized, column-centered rows
  StandardizationStats stats;
  std::string schema_id;
};

template <typename Row>
Design standardize(std::span<const Row> rows) {
  Design d;
  d.schema_id = rows.front().features.schema_id;
  const std::size_t p = rows.front().features.values.size();
  for (const auto& row : rows) {
    if (row.features.schema_id != d.schema_id || row.features.values.size() != p) {
      throw Error(ErrorCode::kSchemaMismatch, "training rows disagree on feature schema");
    }
  }
  const std::size_t n = rows.size();
  d.stats.means.assign(p, 0.0);
  d.stats.stds.assign(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    double sum = 0.0;
    std::size_t observed = 0;
    for (const auto& row : rows) {
      double x = row.features.values[j];
      if (std::isfinite(x)) {
        sum += x;
        ++observed;
      }
    }
    // Mean imputation leaves the column mean unchanged, so one mean serves
    // both imputation and centering.
    double mean = observed ? sum / static_cast<double>(observed) : 0.0;
    double ss = 0.0;
    for (const auto& row : rows) {
      double x = row.features.values[j];
      double dx = (std::isfinite(x) ? x : mean) - mean;
      ss += dx * dx;
    }
    d.stats.means[j] = mean;
    d.stats.stds[j] = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
  }
  d.z.assign(n, std::vector<double>(p, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      double x = rows[i].features.values[j];
      double centered = (std::isfinite(x) ? x : d.stats.means[j]) - d.stats.means[j];
      double sd = d.stats.stds[j];
      d.z[i][j] = sd > 0.0 ? centered / sd : centered;
    }
  }
  return d;
}

// In-place Cholesky solve of a (row-major, p x p) SPD system.
std::vector<double> cholesky_solve(std::vector<double> a, std::vector<double> b, std::size_t p) {
  double max_diag = 0.0;
  for (std::size_t i = 0; i < p; ++i) max_diag = std::max(max_diag, std::abs(a[i * p + i]));
  for (std::size_t j = 0; j < p; ++j) {
    double diag = a[j * p + j];
    for (std::size_t k = 0; k < j; ++k) diag -= a[j * p + k] * a[j * p + k];
    if (!(diag > kPivotTolerance * std::max(max_diag, 1.0))) {
      throw Error(ErrorCode::kSingularSystem, "normal equations are not positive definite");
    }
    double l = std::sqrt(diag);
    a[j * p + j] = l;
    for (std::size_t i = j + 1; i < p; ++i) {
      double v = a[i * p + j];
      for (std::size_t k = 0; k < j; ++k) v -= a[i * p + k] * a[j * p + k];
      a[i * p + j] = v / l;
    }
  }
  for (std::size_t i = 0; i < p; ++i) {
    double v = b[i];
    for (std::size_t k = 0; k < i; ++k) v -= a[i * p + k] * b[k];
    b[i] = v / a[i * p + i];
  }
  for (std::size_t ii = p; ii-- > 0;) {
    double v = b[ii];
    for (std::size_t k = ii + 1; k < p; ++k) v -= a[k * p + ii] * b[k];
    b[ii] = v / a[ii * p + ii];
  }
  return b;
}

// Converts standardized weights back to raw units.
void unstandardize(const StandardizationStats& stats, std::span<const double> w_std,
                   double intercept_std, std::vector<double>& weights, double& intercept) {
  const std::size_t p = stats.means.size();
  weights.assign(p, 0.0);
  intercept = intercept_std;
  for (std::size_t j = 0; j < p; ++j) {
    if (stats.stds[j] > 0.0) weights[j] = w_std[j] / stats.stds[j];
    intercept -= weights[j] * stats.means[j];
  }
}

double linear_score(std::span<const double> weights, double intercept,
                    const StandardizationStats& stats, const std::string& schema_id,
                    const FeatureVector& f) {
  if (f.schema_id != schema_id || f.values.size() != weights.size()) {
    throw Error(ErrorCode::kSchemaMismatch,
                "feature vector " + f.schema_id + " does not match model " + schema_id);
  }
  double s = intercept;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    double x = std::isfinite(f.values[j]) ? f.values[j] : stats.means[j];
    s += weights[j] * x;
  }
  return s;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

nlohmann::json stats_json(const StandardizationStats& stats) {
  return {{"means", stats.means}, {"stds", stats.stds}};
}

StandardizationStats stats_from_json(const nlohmann::json& doc) {
  return {doc.at("means").get<std::vector<double>>(), doc.at("stds").get<std::vector<double>>()};
}

void check_model_shape(const std::vector<double>& weights, const StandardizationStats& stats) {
  if (stats.means.size() != weights.size() || stats.stds.size() != weights.size()) {
    throw Error(ErrorCode::kSchemaMismatch, "model stats do not match weight count");
  }
}

}  // namespace

LinearModel fit_ridge(std::span<const RegressionRow> rows, double lambda) {
  if (rows.size() < 2) throw Error(ErrorCode::kInvalidArgument, "ridge needs at least two rows");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::kInvalidArgument, "lambda must be finite and >= 0");
  }
  for (const auto& row : rows) {
    if (!(row.target >= 0.0 && row.target <= 100.0)) {
      throw Error(ErrorCode::kInvalidArgument, "ridge targets must lie in [0,100]");
    }
  }
  Design d = standardize(rows);
  const std::size_t n = rows.size();
  const std::size_t p = d.stats.means.size();

  double y_mean = 0.0;
  for (const auto& row : rows) y_mean += row.target;
  y_mean /= static_cast<double>(n);

  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < p; ++j) {
    if (d.stats.stds[j] > 0.0) active.push_back(j);
  }
  const std::size_t q = active.size();
  std::vector<double> gram(q * q, 0.0);
  std::vector<double> rhs(q, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& z = d.z[i];
    double yc = rows[i].target - y_mean;
    for (std::size_t a = 0; a < q; ++a) {
      double za = z[active[a]];
      rhs[a] += za * yc;
      for (std::size_t b = 0; b <= a; ++b) gram[a * q + b] += za * z[active[b]];
    }
  }
  for (std::size_t a = 0; a < q; ++a) {
    gram[a * q + a] += lambda;
    for (std::size_t b = 0; b < a; ++b) gram[b * q + a] = gram[a * q + b];
  }
  std::vector<double> w_std(p, 0.0);
  if (q > 0) {
    auto solved = cholesky_solve(std::move(gram), std::move(rhs), q);
    for (std::size_t a = 0; a < q; ++a) w_std[active[a]] = solved[a];
  }

  LinearModel model;
  model.schema_id = d.schema_id;
  model.lambda = lambda;
  model.stats = d.stats;
  unstandardize(model.stats, w_std, y_mean, model.weights, model.intercept);
  return model;
}

double LogisticProblem::objective(std::span<const double> params) const {
  const std::size_t p = params.size() - 1;
  const double b = params[p];
  double loss = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    double s = b;
    for (std::size_t j = 0; j < p; ++j) s += z[i][j] * params[j];
    loss += softplus(s) - labels[i] * s;
  }
  loss /= static_cast<double>(z.size());
  double penalty = 0.0;
  for (std::size_t j = 0; j < p; ++j) penalty += params[j] * params[j];
  return loss + 0.5 * lambda * penalty;
}

std::vector<double> LogisticProblem::gradient(std::span<const double> params) const {
  const std::size_t p = params.size() - 1;
  const double b = params[p];
  std::vector<double> g(p + 1, 0.0);
  for (std::size_t i = 0; i < z.size(); ++i) {
    double s = b;
    for (std::size_t j = 0; j < p; ++j) s += z[i][j] * params[j];
    double r = sigmoid(s) - labels[i];
    for (std::size_t j = 0; j < p; ++j) g[j] += r * z[i][j];
    g[p] += r;
  }
  const double inv_n = 1.0 / static_cast<double>(z.size());
  for (auto& x : g) x *= inv_n;
  for (std::size_t j = 0; j < p; ++j) g[j] += lambda * params[j];
  return g;
}

LogisticModel fit_logistic(std::span<const ClassificationRow> rows, double lambda,
                           const LogisticOptions& options, LogisticTrace* trace) {
  if (rows.size() < 4) throw Error(ErrorCode::kInvalidArgument, "logistic regression needs at least four rows");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::kInvalidArgument, "lambda must be finite and >= 0");
  }
  int positives = 0;
  for (const auto& row : rows) {
    if (row.label != 0 && row.label != 1) throw Error(ErrorCode::kInvalidArgument, "labels must be 0 or 1");
    positives += row.label;
  }
  if (positives == 0 || positives == static_cast<int>(rows.size())) {
    throw Error(ErrorCode::kSingleClass, "both classes must be present");
  }

  Design d = standardize(rows);
  const std::size_t p = d.stats.means.size();
  LogisticProblem problem;
  problem.z = std::move(d.z);
  problem.lambda = lambda;
  for (const auto& row : rows) problem.labels.push_back(row.label);

  // The smooth part excludes the penalty; the prox step handles it exactly.
  LogisticProblem smooth = problem;
  smooth.lambda = 0.0;

  std::vector<double> params(p + 1, 0.0);
  double loss = problem.objective(params);
  if (trace) trace->losses.push_back(loss);
  double lr = options.learning_rate;
  int iterations = 0;
  double grad_norm = inf_norm(problem.gradient(params));

  while (iterations < options.max_iterations && grad_norm >= options.gradient_tolerance) {
    auto g = smooth.gradient(params);
    std::vector<double> trial(p + 1);
    double trial_loss = loss;
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings) {
      double shrink = 1.0 / (1.0 + lr * lambda);
      for (std::size_t j = 0; j < p; ++j) trial[j] = (params[j] - lr * g[j]) * shrink;
      trial[p] = params[p] - lr * g[p];
      trial_loss = problem.objective(trial);
      if (trial_loss < loss) {
        accepted = true;
        break;
      }
      lr *= 0.5;
    }
    if (!accepted) break;  // no representable descent step remains
    params = std::move(trial);
    loss = trial_loss;
    ++iterations;
    if (trace) trace->losses.push_back(loss);
    grad_norm = inf_norm(problem.gradient(params));
  }

  LogisticModel model;
  model.schema_id = d.schema_id;
  model.lambda = lambda;
  model.stats = d.stats;
  model.iterations = iterations;
  model.final_gradient_norm = grad_norm;
  unstandardize(model.stats, std::span<const double>(params).first(p), params[p], model.weights,
                model.intercept);
  return model;
}

double predict_raw(const LinearModel& model, const FeatureVector& features) {
  return linear_score(model.weights, model.intercept, model.stats, model.schema_id, features);
}

double predict_score(const LinearModel& model, const FeatureVector& features) {
  return std::clamp(predict_raw(model, features), 0.0, 100.0);
}

double predict_behavior_risk(const LogisticModel& model, const FeatureVector& features) {
  return sigmoid(linear_score(model.weights, model.intercept, model.stats, model.schema_id, features));
}

void validate_bins(std::span<const double> bins) {
  if (bins.size() != 7) throw Error(ErrorCode::kInvalidBins, "exactly 7 cut scores are required");
  for (std::size_t i = 0; i < bins.size(); ++i) {
    if (!(bins[i] > 0.0 && bins[i] < 100.0)) {
      throw Error(ErrorCode::kInvalidBins, "cut scores must lie inside (0,100)");
    }
    if (i > 0 && !(bins[i] > bins[i - 1])) {
      throw Error(ErrorCode::kInvalidBins, "cut scores must be strictly increasing");
    }
  }
}

int grade_for_score(double score, std::span<const double> bins) {
  validate_bins(bins);
  return static_cast<int>(std::count_if(bins.begin(), bins.end(), [&](double cut) { return cut <= score; }));
}

int predict_exam_grade(const LinearModel& model, const FeatureVector& features,
                       std::span<const double> bins) {
  validate_bins(bins);
  return grade_for_score(predict_score(model, features), bins);
}

const std::vector<double>& default_exam_bins() {
  static const std::vector<double> kBins{20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0};
  return kBins;
}

std::vector<double> standardized_weights(const LinearModel& model) {
  std::vector<double> out(model.weights.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = model.weights[j] * model.stats.stds[j];
  return out;
}

int label_risk(const records::StudentRecord& record, const RiskLabelRule& rule,
               const records::TermRef& term) {
  if (rule.absence_threshold < 0 || rule.discipline_threshold < 0) {
    throw Error(ErrorCode::kInvalidArgument, "risk thresholds must be >= 0");
  }
  bool exists = std::any_of(record.scores.begin(), record.scores.end(),
                            [&](const auto& s) { return s.ref() == term; });
  int absences = 0;
  int punishments = 0;
  for (const auto& e : record.behavior) {
    if (records::term_of(e.date) != term) continue;
    exists = true;
    if (e.kind == records::BehaviorKind::kAbsence) ++absences;
    if (e.kind == records::BehaviorKind::kPunishment) ++punishments;
  }
  if (!exists) throw Error(ErrorCode::kUnknownTerm, "record has no data in the requested term");
  return absences >= rule.absence_threshold || punishments >= rule.discipline_threshold ? 1 : 0;
}

std::optional<double> auc(std::span<const double> scores, std::span<const int> labels) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    i = j + 1;
  }
  double pos = 0, neg = 0, rank_sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] == 1) {
      ++pos;
      rank_sum += rank[i];
    } else {
      ++neg;
    }
  }
  if (pos == 0 || neg == 0) return std::nullopt;
  return (rank_sum - pos * (pos + 1) / 2.0) / (pos * neg);
}

RegressionMetrics evaluate(const LinearModel& model, std::span<const RegressionRow> holdout) {
  if (holdout.empty()) throw Error(ErrorCode::kEmptyHoldout, "holdout is empty");
  double se = 0.0, ae = 0.0;
  for (const auto& row : holdout) {
    double e = predict_score(model, row.features) - row.target;
    se += e * e;
    ae += std::abs(e);
  }
  double n = static_cast<double>(holdout.size());
  return {std::sqrt(se / n), ae / n};
}

ClassificationMetrics evaluate(const LogisticModel& model, std::span<const ClassificationRow> holdout) {
  if (holdout.empty()) throw Error(ErrorCode::kEmptyHoldout, "holdout is empty");
  std::vector<double> scores;
  std::vector<int> labels;
  int correct = 0;
  for (const auto& row : holdout) {
    double p = predict_behavior_risk(model, row.features);
    scores.push_back(p);
    labels.push_back(row.label);
    if ((p >= 0.5 ? 1 : 0) == row.label) ++correct;
  }
  return {static_cast<double>(correct) / static_cast<double>(holdout.size()), auc(scores, labels)};
}

nlohmann::json to_json(const LinearModel& model) {
  return {{"kind", "ridge"},
          {"schema_id", model.schema_id},
          {"weights", model.weights},
          {"intercept", model.intercept},
          {"lambda", model.lambda},
          {"stats", stats_json(model.stats)}};
}

nlohmann::json to_json(const LogisticModel& model) {
  return {{"kind", "logistic"},
          {"schema_id", model.schema_id},
          {"weights", model.weights},
          {"intercept", model.intercept},
          {"lambda", model.lambda},
          {"stats", stats_json(model.stats)},
          {"training", {{"iterations", model.iterations}, {"final_gradient_norm", model.final_gradient_norm}}}};
}

LinearModel linear_model_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("kind") != "ridge") throw Error(ErrorCode::kSchemaMismatch, "not a ridge model document");
    LinearModel model;
    model.schema_id = doc.at("schema_id").get<std::string>();
    model.weights = doc.at("weights").get<std::vector<double>>();
    model.intercept = doc.at("intercept").get<double>();
    model.lambda = doc.at("lambda").get<double>();
    model.stats = stats_from_json(doc.at("stats"));
    check_model_shape(model.weights, model.stats);
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed model document: ") + e.what());
  }
}

LogisticModel logistic_model_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("kind") != "logistic") throw Error(ErrorCode::kSchemaMismatch, "not a logistic model document");
    LogisticModel model;
    model.schema_id = doc.at("schema_id").get<std::string>();
    model.weights = doc.at("weights").get<std::vector<double>>();
    model.intercept = doc.at("intercept").get<double>();
    model.lambda = doc.at("lambda").get<double>();
    model.stats = stats_from_json(doc.at("stats"));
    model.iterations = doc.at("training").at("iterations").get<int>();
    model.final_gradient_norm = doc.at("training").at("final_gradient_norm").get<double>();
    check_model_shape(model.weights, model.stats);
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed model document: ") + e.what());
  }
}

}  // namespace dmp::predict
