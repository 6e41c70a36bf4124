#include "austen/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "austen/errors.hpp"
#include "austen/rng.hpp"
#include "austen/specfun.hpp"

namespace austen {
namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log of a Gamma(shape, 1) draw. Small shapes go through
// Gamma(shape) = Gamma(shape + 1) * U^(1/shape) so the log never underflows.
double log_gamma_draw(double shape, std::mt19937_64& rng) {
  if (shape >= 1.0) {
    std::gamma_distribution<double> gamma(shape, 1.0);
    return std::log(gamma(rng));
  }
  std::gamma_distribution<double> gamma(shape + 1.0, 1.0);
  const double log_g = std::log(gamma(rng));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng);
  while (u <= 0.0) u = unif(rng);
  return log_g + std::log(u) / shape;
}

// E[logit g~ | X, T=t] for g~ ~ Beta(gM, (1-g)M) updated by one Bernoulli draw.
double centering(double g, double m, int t) {
  return specfun::digamma(g * m + t) - specfun::digamma((1.0 - g) * m + (1 - t));
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  if (text == "sensitivity") return Scenario::Sensitivity;
  if (text == "latent_observed") return Scenario::LatentObserved;
  if (text == "cancellation") return Scenario::Cancellation;
  throw InputError("scenario must be one of {sensitivity, latent_observed, cancellation}, got '" +
                   text + "'");
}

std::string to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::Sensitivity: return "sensitivity";
    case Scenario::LatentObserved: return "latent_observed";
    case Scenario::Cancellation: return "cancellation";
  }
  return "sensitivity";
}

void SimConfig::validate() const {
  if (n < 1) throw InputError("simulation: n must be at least 1");
  if (scenario != Scenario::Cancellation && !(alpha > 0.0 && alpha < 1.0)) {
    throw InputError("simulation: alpha must lie in (0,1)");
  }
  if (!std::isfinite(delta)) throw InputError("simulation: delta must be finite");
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) {
    throw InputError("simulation: noise_sd must be nonnegative");
  }
  if (propensity_coefs.size() != outcome_coefs.size()) {
    throw InputError("simulation: propensity_coefs and outcome_coefs differ in length");
  }
}

SimSample simulate(const SimConfig& config) {
  config.validate();
  auto rng = make_rng(config.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);

  const std::size_t n = config.n;
  const std::size_t k = config.propensity_coefs.size();
  const bool latent = config.scenario != Scenario::Cancellation;
  const double m = latent ? 1.0 / config.alpha - 1.0 : 0.0;
  const double delta = latent ? config.delta : 0.0;

  SimSample s;
  for (std::size_t j = 0; j < k; ++j) s.covariate_names.push_back("x" + std::to_string(j + 1));
  for (std::size_t j = 0; j < config.noise_covariates; ++j) {
    s.covariate_names.push_back("noise" + std::to_string(j + 1));
  }
  if (config.scenario == Scenario::LatentObserved) s.covariate_names.push_back("u");
  if (config.scenario == Scenario::Cancellation) {
    s.covariate_names.push_back("z");
    s.covariate_names.push_back("z_sq");
  }
  s.covariates.assign(s.covariate_names.size(), std::vector<double>(n));
  for (auto* col : {&s.g_true, &s.gtilde, &s.logit_gtilde, &s.y, &s.y0, &s.y1, &s.q0, &s.q1,
                    &s.structural_mean}) {
    col->resize(n);
  }
  s.t.resize(n);

  constexpr double kTiny = std::numeric_limits<double>::min();
  const double one_below = std::nextafter(1.0, 0.0);

  for (std::size_t i = 0; i < n; ++i) {
    double logit_g = config.propensity_intercept;
    double q_base = config.outcome_intercept;
    for (std::size_t j = 0; j < k; ++j) {
      const double x = unif(rng);
      s.covariates[j][i] = x;
      logit_g += config.propensity_coefs[j] * x;
      q_base += config.outcome_coefs[j] * x;
    }
    for (std::size_t j = 0; j < config.noise_covariates; ++j) s.covariates[k + j][i] = unif(rng);

    if (config.scenario == Scenario::Cancellation) {
      const double z = unif(rng);
      const double scaled = (z - config.confounder_center) / 0.5;
      logit_g -= config.confounder_treatment * scaled * scaled;
      q_base += config.confounder_outcome * z;
      s.covariates[k + config.noise_covariates][i] = z;
      s.covariates[k + config.noise_covariates + 1][i] = z * z;
    }

    const double g = clip_propensity(sigmoid(logit_g));
    s.g_true[i] = g;

    double latent_logit = 0.0;
    double gt = g;
    if (latent) {
      const double a = g * m;
      const double b = (1.0 - g) * m;
      if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
        throw InputError("simulation: Beta parameters are not positive");
      }
      latent_logit = log_gamma_draw(a, rng) - log_gamma_draw(b, rng);
      gt = std::clamp(sigmoid(latent_logit), kTiny, one_below);
    }
    s.gtilde[i] = gt;
    s.logit_gtilde[i] = latent ? latent_logit : std::log(gt / (1.0 - gt));
    const int t = unif(rng) < gt ? 1 : 0;
    s.t[i] = t;
    if (config.scenario == Scenario::LatentObserved) {
      s.covariates[k + config.noise_covariates][i] = latent_logit;
    }

    const double eps = config.noise_sd > 0.0 ? config.noise_sd * noise(rng) : 0.0;
    const double q0 = q_base;
    const double q1 = q_base + config.effect;
    double shift0 = 0.0;
    double shift1 = 0.0;
    if (delta != 0.0) {
      shift0 = delta * (latent_logit - centering(g, m, 0));
      shift1 = delta * (latent_logit - centering(g, m, 1));
    }
    s.q0[i] = q0;
    s.q1[i] = q1;
    s.y0[i] = q0 + shift0 + eps;
    s.y1[i] = q1 + shift1 + eps;
    s.y[i] = t == 1 ? s.y1[i] : s.y0[i];
    s.structural_mean[i] = t == 1 ? q1 + shift1 : q0 + shift0;
  }

  GroundTruth& truth = s.truth;
  truth.scenario = config.scenario;
  truth.alpha = latent ? config.alpha : 0.0;
  truth.delta = delta;
  double effect_sum = 0.0;
  double effect_treated = 0.0;
  std::size_t treated = 0;
  double bracket_sum = 0.0;
  double bracket_treated = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double effect = s.y1[i] - s.y0[i];
    effect_sum += effect;
    const double bracket = latent ? digamma_bracket(s.g_true[i], config.alpha) : 0.0;
    bracket_sum += bracket;
    if (s.t[i] == 1) {
      effect_treated += effect;
      bracket_treated += bracket;
      ++treated;
    }
  }
  const double nn = static_cast<double>(n);
  truth.ate = effect_sum / nn;
  truth.att = treated > 0 ? effect_treated / static_cast<double>(treated) : 0.0;
  truth.bias = delta * bracket_sum / nn;
  truth.bias_att = treated > 0 ? delta * bracket_treated / static_cast<double>(treated) : 0.0;
  if (latent && delta != 0.0 && treated > 0 && treated < n && n >= 2) {
    truth.partial_r2 = r2_par(config.alpha, delta, s.oracle_frame());
  }
  return s;
}

PredictionFrame SimSample::oracle_frame() const {
  return PredictionFrame::from_columns(y, t, g_true, q0, q1);
}

Dataset SimSample::dataset() const {
  Dataset d{y, t, covariate_names, covariates};
  d.validate();
  return d;
}

double empirical_alpha(const SimSample& sample) {
  double sum1 = 0.0;
  double sum0 = 0.0;
  std::size_t n1 = 0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (sample.t[i] == 1) {
      sum1 += sample.gtilde[i];
      ++n1;
    } else {
      sum0 += sample.gtilde[i];
    }
  }
  const std::size_t n0 = sample.size() - n1;
  if (n1 == 0 || n0 == 0) throw DegenerateDataError("empirical alpha needs both treatment arms");
  return sum1 / static_cast<double>(n1) - sum0 / static_cast<double>(n0);
}

double empirical_alpha_conditional(const SimSample& sample) {
  if (sample.size() == 0) throw DegenerateDataError("empty sample");
  double sum = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double g = sample.g_true[i];
    sum += sample.t[i] == 1 ? sample.gtilde[i] / g : -sample.gtilde[i] / (1.0 - g);
  }
  return sum / static_cast<double>(sample.size());
}

double empirical_alpha_variance_form(const SimSample& sample) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    num += sample.gtilde[i] * (1.0 - sample.gtilde[i]);
    den += sample.g_true[i] * (1.0 - sample.g_true[i]);
  }
  if (!(den > 0.0)) throw DegenerateDataError("propensities have zero Bernoulli variance");
  return 1.0 - num / den;
}

double empirical_partial_r2(const SimSample& sample) {
  double outer = 0.0;
  double inner = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double q = sample.t[i] == 1 ? sample.q1[i] : sample.q0[i];
    const double r_outer = sample.y[i] - q;
    const double r_inner = sample.y[i] - sample.structural_mean[i];
    outer += r_outer * r_outer;
    inner += r_inner * r_inner;
  }
  if (!(outer > 0.0)) throw DegenerateDataError("oracle residuals have zero variance");
  return (outer - inner) / outer;
}

}  // namespace austen
