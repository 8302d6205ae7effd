#include "decaygraph/logit.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "decaygraph/errors.hpp"
#include "decaygraph/kernels.hpp"

namespace decaygraph {

void LogitConfig::validate() const {
  if (max_iter < 1) throw UsageError("logit: max_iter must be >= 1");
  if (!(tolerance > 0.0)) throw UsageError("logit: tolerance must be positive");
  if (ridge < 0.0) throw UsageError("logit: ridge must be non-negative");
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

// log(1 + e^z) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

using Columns = std::span<const std::span<const double>>;

void linear_predictors(Columns columns, double intercept, std::span<const double> beta,
                       std::vector<double>& eta) {
  eta.assign(columns.empty() ? 0 : columns[0].size(), intercept);
  for (std::size_t f = 0; f < columns.size(); ++f) {
    if (beta[f] != 0.0) kernels::axpy(beta[f], columns[f], eta);
  }
}

double objective_from_eta(std::span<const double> eta, std::span<const int> labels,
                          std::span<const double> beta, double ridge) {
  double nll = 0.0;
  for (std::size_t r = 0; r < eta.size(); ++r) {
    nll += softplus(eta[r]) - (labels[r] ? eta[r] : 0.0);
  }
  double penalty = 0.0;
  for (double b : beta) penalty += b * b;
  return nll + 0.5 * ridge * penalty;
}

std::size_t row_count(Columns columns, std::span<const int> labels) {
  for (const auto& c : columns) {
    if (c.size() != labels.size()) throw DataError("logit: column length mismatch");
  }
  return labels.size();
}

}  // namespace

double logit_objective(Columns columns, std::span<const int> labels, double intercept,
                       std::span<const double> beta, double ridge) {
  row_count(columns, labels);
  std::vector<double> eta;
  linear_predictors(columns, intercept, beta, eta);
  return objective_from_eta(eta, labels, beta, ridge);
}

std::vector<double> logit_gradient(Columns columns, std::span<const int> labels, double intercept,
                                   std::span<const double> beta, double ridge) {
  const std::size_t n = row_count(columns, labels);
  std::vector<double> eta;
  linear_predictors(columns, intercept, beta, eta);
  std::vector<double> residual(n);
  for (std::size_t r = 0; r < n; ++r) residual[r] = sigmoid(eta[r]) - labels[r];
  std::vector<double> g(columns.size() + 1);
  g[0] = kernels::sum(residual);
  for (std::size_t f = 0; f < columns.size(); ++f) {
    g[f + 1] = kernels::dot(columns[f], residual) + ridge * beta[f];
  }
  return g;
}

LogitModel train_logit(Columns raw_columns, std::vector<std::string> names,
                       std::span<const int> labels, const LogitConfig& cfg) {
  cfg.validate();
  if (names.size() != raw_columns.size()) throw UsageError("logit: column/name mismatch");
  const std::size_t n = row_count(raw_columns, labels);
  if (n == 0) throw DataError("logit: empty training set");
  const auto positives = std::count(labels.begin(), labels.end(), 1);
  if (positives == 0 || static_cast<std::size_t>(positives) == n) {
    throw DataError("logit: training set must contain both classes");
  }
  for (const auto& c : raw_columns) {
    if (!std::all_of(c.begin(), c.end(), [](double v) { return std::isfinite(v); })) {
      throw DataError("logit: non-finite feature value");
    }
  }

  const std::size_t k = raw_columns.size();
  LogitTraining info;
  info.ridge = cfg.ridge;
  info.standardized = cfg.standardize;

  std::vector<std::vector<double>> scaled;
  std::vector<std::span<const double>> columns(raw_columns.begin(), raw_columns.end());
  if (cfg.standardize) {
    scaled.resize(k);
    info.means.resize(k);
    info.scales.resize(k);
    for (std::size_t f = 0; f < k; ++f) {
      const auto col = raw_columns[f];
      const double mean = kernels::sum(col) / static_cast<double>(n);
      const double ss = kernels::centered_dot(col, mean, col, mean);
      const double sd = std::sqrt(ss / static_cast<double>(n));
      const double scale = sd > 0.0 ? sd : 1.0;
      info.means[f] = mean;
      info.scales[f] = scale;
      scaled[f].resize(n);
      for (std::size_t r = 0; r < n; ++r) scaled[f][r] = (col[r] - mean) / scale;
      columns[f] = scaled[f];
    }
  }

  // Start at the intercept-only optimum.
  double intercept = std::log(static_cast<double>(positives) / static_cast<double>(n - positives));
  std::vector<double> beta(k, 0.0);
  std::vector<double> eta, prob(n), weight(n), residual(n);
  linear_predictors(columns, intercept, beta, eta);
  double obj = objective_from_eta(eta, labels, beta, cfg.ridge);

  const auto dim = static_cast<Eigen::Index>(k + 1);
  Eigen::MatrixXd hessian(dim, dim);
  Eigen::VectorXd grad(dim);
  std::vector<double> trial_beta(k);

  for (info.iterations = 0; info.iterations < cfg.max_iter; ++info.iterations) {
    for (std::size_t r = 0; r < n; ++r) {
      prob[r] = sigmoid(eta[r]);
      weight[r] = prob[r] * (1.0 - prob[r]);
      residual[r] = prob[r] - labels[r];
    }
    grad(0) = kernels::sum(residual);
    hessian(0, 0) = kernels::sum(weight);
    for (std::size_t f = 0; f < k; ++f) {
      const auto a = static_cast<Eigen::Index>(f + 1);
      grad(a) = kernels::dot(columns[f], residual) + cfg.ridge * beta[f];
      hessian(a, 0) = hessian(0, a) = kernels::dot(weight, columns[f]);
      for (std::size_t g = 0; g <= f; ++g) {
        const auto b = static_cast<Eigen::Index>(g + 1);
        hessian(a, b) = hessian(b, a) = kernels::weighted_dot(weight, columns[f], columns[g]);
      }
      hessian(a, a) += cfg.ridge;
    }
    info.gradient_norm = grad.cwiseAbs().maxCoeff() / static_cast<double>(n);
    if (info.gradient_norm < cfg.tolerance) {
      info.converged = true;
      break;
    }

    Eigen::LDLT<Eigen::MatrixXd> ldlt(hessian);
    Eigen::VectorXd step = ldlt.solve(-grad);
    if (ldlt.info() != Eigen::Success || !step.allFinite()) {
      // Singular curvature: fall back to a scaled gradient step.
      step = -grad / std::max(1.0, hessian.diagonal().maxCoeff());
    }

    double t = 1.0;
    bool accepted = false;
    std::vector<double> trial_eta;
    for (int halving = 0; halving < 60; ++halving, t *= 0.5) {
      const double trial_intercept = intercept + t * step(0);
      for (std::size_t f = 0; f < k; ++f) {
        trial_beta[f] = beta[f] + t * step(static_cast<Eigen::Index>(f + 1));
      }
      linear_predictors(columns, trial_intercept, trial_beta, trial_eta);
      const double trial_obj = objective_from_eta(trial_eta, labels, trial_beta, cfg.ridge);
      if (std::isfinite(trial_obj) && trial_obj <= obj) {
        intercept = trial_intercept;
        beta = trial_beta;
        eta.swap(trial_eta);
        obj = trial_obj;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // no descent possible at working precision
  }

  LogitModel model;
  model.feature_names = std::move(names);
  if (cfg.standardize) {
    model.coefficients.resize(k);
    model.intercept = intercept;
    for (std::size_t f = 0; f < k; ++f) {
      model.coefficients[f] = beta[f] / info.scales[f];
      model.intercept -= beta[f] * info.means[f] / info.scales[f];
    }
  } else {
    model.intercept = intercept;
    model.coefficients = beta;
  }
  model.training = std::move(info);
  return model;
}

LogitModel train_logit(const FeatureMatrix& data, const LogitConfig& cfg) {
  std::vector<std::span<const double>> cols;
  std::vector<std::string> names;
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    cols.push_back(data.column(f));
    names.emplace_back(kFeatureNames[f]);
  }
  return train_logit(cols, std::move(names), data.labels(), cfg);
}

double LogitModel::linear_predictor(std::span<const double> x) const {
  if (x.size() < coefficients.size()) throw DataError("logit: feature vector too short");
  double z = intercept;
  for (std::size_t f = 0; f < coefficients.size(); ++f) z += coefficients[f] * x[f];
  return z;
}

double LogitModel::predict_proba(std::span<const double> x) const {
  return sigmoid(linear_predictor(x));
}

nlohmann::json LogitModel::to_json() const {
  nlohmann::json coef = nlohmann::json::object();
  for (std::size_t f = 0; f < coefficients.size(); ++f) coef[feature_names[f]] = coefficients[f];
  nlohmann::json j{{"model", "logit"},
                   {"schema_version", 1},
                   {"features", feature_names},
                   {"intercept", intercept},
                   {"coefficients", coef}};
  j["training"] = {{"iterations", training.iterations},
                   {"gradient_norm", training.gradient_norm},
                   {"converged", training.converged},
                   {"standardized", training.standardized},
                   {"ridge", training.ridge},
                   {"means", training.means},
                   {"scales", training.scales}};
  return j;
}

LogitModel LogitModel::from_json(const nlohmann::json& j) {
  try {
    if (j.at("model").get<std::string>() != "logit") throw DataError("model file is not a logit");
    LogitModel m;
    m.feature_names = j.at("features").get<std::vector<std::string>>();
    m.intercept = j.at("intercept").get<double>();
    const auto& coef = j.at("coefficients");
    for (const auto& name : m.feature_names) m.coefficients.push_back(coef.at(name).get<double>());
    const auto& t = j.at("training");
    m.training.iterations = t.at("iterations").get<std::size_t>();
    m.training.gradient_norm = t.at("gradient_norm").get<double>();
    m.training.converged = t.at("converged").get<bool>();
    m.training.standardized = t.at("standardized").get<bool>();
    m.training.ridge = t.at("ridge").get<double>();
    m.training.means = t.at("means").get<std::vector<double>>();
    m.training.scales = t.at("scales").get<std::vector<double>>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("logit model: ") + e.what());
  }
}

std::vector<OddsRow> report_odds(const LogitModel& model) {
  std::vector<OddsRow> rows;
  for (std::size_t f = 0; f < model.coefficients.size(); ++f) {
    rows.push_back({model.feature_names[f], model.coefficients[f], std::exp(model.coefficients[f])});
  }
  return rows;
}

}  // namespace decaygraph
