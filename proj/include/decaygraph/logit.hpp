#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "decaygraph/edge_features.hpp"
#include "decaygraph/feature_io.hpp"

namespace decaygraph {

struct LogitConfig {
  std::size_t max_iter = 100;
  // Stop once the max-norm of the mean-loss gradient drops below this.
  double tolerance = 1e-8;
  // L2 penalty on coefficients (not the intercept), added to the summed loss.
  double ridge = 1e-8;
  bool standardize = false;

  void validate() const;
};

struct LogitTraining {
  std::size_t iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
  bool standardized = false;
  double ridge = 0.0;
  std::vector<double> means;   // standardization parameters, empty if unused
  std::vector<double> scales;
};

struct LogitModel {
  std::vector<std::string> feature_names;
  double intercept = 0.0;
  std::vector<double> coefficients;  // raw feature scale, same order as names
  LogitTraining training;

  double linear_predictor(std::span<const double> x) const;
  double predict_proba(std::span<const double> x) const;
  double predict_proba(const EdgeFeatureVector& x) const {
    const auto v = x.values();
    return predict_proba(std::span<const double>(v));
  }
  int predict_class(std::span<const double> x, double threshold = 0.5) const {
    return predict_proba(x) >= threshold ? 1 : 0;
  }

  nlohmann::json to_json() const;
  static LogitModel from_json(const nlohmann::json& j);
};

double sigmoid(double z);

// Penalized negative log-likelihood and its gradient, intercept first.
// Exposed so the analytic gradient can be checked numerically.
double logit_objective(std::span<const std::span<const double>> columns,
                       std::span<const int> labels, double intercept,
                       std::span<const double> beta, double ridge);
std::vector<double> logit_gradient(std::span<const std::span<const double>> columns,
                                   std::span<const int> labels, double intercept,
                                   std::span<const double> beta, double ridge);

// Damped Newton (IRLS) iterations; each accepted step does not increase the
// objective. Needs both classes and finite inputs, DataError otherwise.
LogitModel train_logit(std::span<const std::span<const double>> columns,
                       std::vector<std::string> names, std::span<const int> labels,
                       const LogitConfig& cfg = {});
LogitModel train_logit(const FeatureMatrix& data, const LogitConfig& cfg = {});

struct OddsRow {
  std::string feature;
  double beta;
  double odds;  // exp(beta)
};

std::vector<OddsRow> report_odds(const LogitModel& model);

}  // namespace decaygraph
