#pragma once

// Synthetic data drawn exactly from the Beta-propensity sensitivity model,
// keeping the latent complete propensity so every formula in core can be
// checked against Monte Carlo ground truth.

#include <cstdint>
#include <string>
#include <vector>

#include "austen/core.hpp"
#include "austen/dataset.hpp"

namespace austen {

enum class Scenario {
  // Observed covariates x1..xk drive g and Q; the confounder is latent.
  Sensitivity,
  // Same draw with logit g~ published as covariate "u", so omitting "u"
  // reproduces the sensitivity model exactly.
  LatentObserved,
  // Observed confounder z with a non-monotone (quadratic) effect on treatment
  // and a monotone effect on the outcome; columns "z" and "z_sq" are emitted.
  Cancellation,
};

Scenario parse_scenario(const std::string& text);
std::string to_string(Scenario scenario);

struct SimConfig {
  std::size_t n = 2000;
  double alpha = 0.3;
  double delta = 2.0;
  double noise_sd = 1.0;
  std::uint64_t seed = 0;
  Scenario scenario = Scenario::Sensitivity;

  // logit g(x) = propensity_intercept + sum_j propensity_coefs[j] * x_j,
  // x_j ~ Uniform(0,1). Q(t,x) = outcome_intercept + effect*t + sum_j outcome_coefs[j] * x_j.
  double propensity_intercept = -1.2;
  std::vector<double> propensity_coefs{1.2, 1.2};
  double outcome_intercept = 0.0;
  double effect = 1.0;
  std::vector<double> outcome_coefs{2.0, 1.0};
  std::size_t noise_covariates = 1;

  // Cancellation scenario: logit g gains -confounder_treatment * ((z - center)/0.5)^2
  // and Q gains confounder_outcome * z, z ~ Uniform(0,1).
  double confounder_treatment = 3.0;
  double confounder_center = 0.5;
  double confounder_outcome = 2.0;

  /// Throws InputError on invalid settings.
  void validate() const;
};

struct GroundTruth {
  Scenario scenario = Scenario::Sensitivity;
  double alpha = 0.0;
  double delta = 0.0;
  double ate = 0.0;
  double att = 0.0;
  double bias = 0.0;      // plug-in effect minus ATE at the oracle predictions
  double bias_att = 0.0;
  double partial_r2 = 0.0;  // outcome influence of the latent confounder on the oracle frame
};

struct SimSample {
  std::vector<std::string> covariate_names;
  std::vector<std::vector<double>> covariates;

  std::vector<double> g_true;
  std::vector<double> gtilde;
  std::vector<double> logit_gtilde;
  std::vector<int> t;
  std::vector<double> y;
  std::vector<double> y0;  // potential outcomes, same noise draw
  std::vector<double> y1;
  std::vector<double> q0;  // oracle E[Y | T=0, X]
  std::vector<double> q1;
  std::vector<double> structural_mean;  // E[Y | T, X, U] at the observed arm

  GroundTruth truth;

  std::size_t size() const noexcept { return y.size(); }
  PredictionFrame oracle_frame() const;
  Dataset dataset() const;
};

SimSample simulate(const SimConfig& config);

/// Mean g~ among treated minus mean g~ among controls.
double empirical_alpha(const SimSample& sample);

/// Covariate-conditional version of the treated/control gap, averaged over
/// units by weighting with the true propensity: mean[t g~/g] - mean[(1-t) g~/(1-g)].
/// Coincides with empirical_alpha in expectation when g is constant.
double empirical_alpha_conditional(const SimSample& sample);

/// 1 - mean[g~(1-g~)] / mean[g(1-g)]
double empirical_alpha_variance_form(const SimSample& sample);

/// Share of the oracle residual variance removed by knowing the latent term.
double empirical_partial_r2(const SimSample& sample);

}  // namespace austen
