#include "cvinfer/generators.hpp"

#include <cmath>
#include <limits>

#include "cvinfer/error.hpp"

namespace cvinfer {

namespace {

// Risk of a constant prediction c when E[Y] = mu and Var(Y) = v.
std::optional<double> constant_risk(double c, double mu, double v, const LossFunction& loss) {
  switch (loss.type) {
    case LossType::squared_error:
      return v + (mu - c) * (mu - c);
    case LossType::excess_squared:
      return (mu - c) * (mu - c) - (mu - loss.anchor) * (mu - loss.anchor);
    case LossType::zero_one:
      return std::nullopt;
  }
  return std::nullopt;
}

double positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw Error(ErrorCode::invalid_configuration, std::string(what) + " must be positive");
  }
  return value;
}

}  // namespace

GaussianLocation::GaussianLocation(double mean, double variance)
    : mean_(mean), variance_(positive(variance, "variance")) {}

Dataset GaussianLocation::sample(std::size_t n, Rng& rng) const {
  std::vector<double> targets(n);
  const double sd = std::sqrt(variance_);
  for (auto& t : targets) t = mean_ + sd * rng.normal();
  return Dataset({}, std::move(targets), 0);
}

std::optional<double> GaussianLocation::exact_risk(const PredictionRule& rule,
                                                   const LossFunction& loss) const {
  const auto c = rule.constant_prediction();
  if (!c) return std::nullopt;
  return constant_risk(*c, mean_, variance_, loss);
}

nlohmann::json GaussianLocation::to_json() const {
  return {{"kind", name()}, {"mean", mean_}, {"variance", variance_}};
}

SurrogateMeanTask::SurrogateMeanTask(double mean, double x_scale, int x_df, double y_sd)
    : mean_(mean), x_scale_(positive(x_scale, "x_scale")), x_df_(x_df),
      y_sd_(positive(y_sd, "y_sd")) {
  if (x_df < 0) throw Error(ErrorCode::invalid_configuration, "x_df must be >= 0");
}

Dataset SurrogateMeanTask::sample(std::size_t n, Rng& rng) const {
  std::vector<double> features(n);
  std::vector<double> targets(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = x_df_ == 0 ? rng.normal() : rng.student_t(x_df_);
    features[i] = mean_ + x_scale_ * t;
    targets[i] = mean_ + y_sd_ * rng.normal();
  }
  return Dataset(std::move(features), std::move(targets), 1);
}

std::optional<double> SurrogateMeanTask::exact_risk(const PredictionRule& rule,
                                                    const LossFunction& loss) const {
  const auto c = rule.constant_prediction();
  if (!c) return std::nullopt;
  return constant_risk(*c, mean_, y_sd_ * y_sd_, loss);
}

double SurrogateMeanTask::feature_variance() const noexcept {
  if (x_df_ == 0) return x_scale_ * x_scale_;
  if (x_df_ <= 2) return std::numeric_limits<double>::infinity();
  return x_scale_ * x_scale_ * x_df_ / (x_df_ - 2.0);
}

nlohmann::json SurrogateMeanTask::to_json() const {
  return {{"kind", name()}, {"mean", mean_}, {"x_scale", x_scale_}, {"x_df", x_df_},
          {"y_sd", y_sd_}};
}

LinearGaussian::LinearGaussian(std::vector<double> beta, double noise_sd)
    : beta_(std::move(beta)), noise_sd_(positive(noise_sd, "noise_sd")) {
  if (beta_.empty()) throw Error(ErrorCode::invalid_configuration, "beta must be non-empty");
}

Dataset LinearGaussian::sample(std::size_t n, Rng& rng) const {
  const std::size_t p = beta_.size();
  std::vector<double> features(n * p);
  std::vector<double> targets(n);
  for (std::size_t i = 0; i < n; ++i) {
    double signal = 0.0;
    for (std::size_t c = 0; c < p; ++c) {
      const double x = rng.normal();
      features[i * p + c] = x;
      signal += beta_[c] * x;
    }
    targets[i] = signal + noise_sd_ * rng.normal();
  }
  return Dataset(std::move(features), std::move(targets), p);
}

std::optional<double> LinearGaussian::exact_risk(const PredictionRule& rule,
                                                 const LossFunction& loss) const {
  const auto form = rule.affine_form();
  if (!form || form->coefficients.size() != beta_.size()) return std::nullopt;
  // E[(Y - f(X))^2] = noise^2 + offset^2 + |beta - coef|^2 for X ~ N(0, I).
  double dist = form->offset * form->offset;
  double beta_norm = 0.0;
  for (std::size_t c = 0; c < beta_.size(); ++c) {
    const double d = beta_[c] - form->coefficients[c];
    dist += d * d;
    beta_norm += beta_[c] * beta_[c];
  }
  const double noise = noise_sd_ * noise_sd_;
  switch (loss.type) {
    case LossType::squared_error:
      return noise + dist;
    case LossType::excess_squared:
      return dist - beta_norm - loss.anchor * loss.anchor;
    case LossType::zero_one:
      return std::nullopt;
  }
  return std::nullopt;
}

std::optional<double> LinearGaussian::expected_loss_at(std::span<const double> x,
                                                       double prediction,
                                                       const LossFunction& loss,
                                                       bool /*classifies*/) const {
  double signal = 0.0;
  for (std::size_t c = 0; c < beta_.size(); ++c) signal += beta_[c] * x[c];
  const double noise = noise_sd_ * noise_sd_;
  switch (loss.type) {
    case LossType::squared_error:
      return noise + (signal - prediction) * (signal - prediction);
    case LossType::excess_squared:
      return (signal - prediction) * (signal - prediction) -
             (signal - loss.anchor) * (signal - loss.anchor);
    case LossType::zero_one:
      return std::nullopt;
  }
  return std::nullopt;
}

nlohmann::json LinearGaussian::to_json() const {
  return {{"kind", name()}, {"beta", beta_}, {"noise_sd", noise_sd_}};
}

LogisticLabels::LogisticLabels(std::vector<double> beta) : beta_(std::move(beta)) {
  if (beta_.empty()) throw Error(ErrorCode::invalid_configuration, "beta must be non-empty");
}

std::vector<double> LogisticLabels::alternating_beta(std::size_t dim, double scale) {
  std::vector<double> beta(dim);
  for (std::size_t c = 0; c < dim; ++c) beta[c] = (c % 2 == 0) ? scale : -scale;
  return beta;
}

double LogisticLabels::probability(std::span<const double> x) const noexcept {
  double t = 0.0;
  for (std::size_t c = 0; c < beta_.size(); ++c) t += beta_[c] * x[c];
  return 1.0 / (1.0 + std::exp(-t));
}

Dataset LogisticLabels::sample(std::size_t n, Rng& rng) const {
  const std::size_t p = beta_.size();
  std::vector<double> features(n * p);
  std::vector<double> targets(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < p; ++c) features[i * p + c] = rng.normal();
    targets[i] = rng.bernoulli(probability({features.data() + i * p, p})) ? 1.0 : 0.0;
  }
  return Dataset(std::move(features), std::move(targets), p, TargetKind::classification);
}

std::optional<double> LogisticLabels::expected_loss_at(std::span<const double> x,
                                                       double prediction,
                                                       const LossFunction& loss,
                                                       bool classifies) const {
  const double pi = probability(x);
  switch (loss.type) {
    case LossType::zero_one: {
      if (!classifies) return std::nullopt;
      const double label = predicted_label(prediction);
      return label == 1.0 ? 1.0 - pi : pi;
    }
    case LossType::squared_error:
      return pi * (1.0 - prediction) * (1.0 - prediction) + (1.0 - pi) * prediction * prediction;
    case LossType::excess_squared: {
      const double a = loss.anchor;
      return pi * ((1.0 - prediction) * (1.0 - prediction) - (1.0 - a) * (1.0 - a)) +
             (1.0 - pi) * (prediction * prediction - a * a);
    }
  }
  return std::nullopt;
}

nlohmann::json LogisticLabels::to_json() const {
  return {{"kind", name()}, {"beta", beta_}};
}

DiscreteDuplicates::DiscreteDuplicates(std::size_t levels, double noise_sd)
    : levels_(levels), noise_sd_(positive(noise_sd, "noise_sd")) {
  if (levels < 1) throw Error(ErrorCode::invalid_configuration, "levels must be >= 1");
}

Dataset DiscreteDuplicates::sample(std::size_t n, Rng& rng) const {
  std::vector<double> features(n);
  std::vector<double> targets(n);
  for (std::size_t i = 0; i < n; ++i) {
    features[i] = static_cast<double>(rng.below(levels_));
    targets[i] = noise_sd_ * rng.normal();
  }
  return Dataset(std::move(features), std::move(targets), 1);
}

std::optional<double> DiscreteDuplicates::exact_risk(const PredictionRule& rule,
                                                     const LossFunction& loss) const {
  if (loss.type == LossType::zero_one) return std::nullopt;
  double total = 0.0;
  for (std::size_t level = 0; level < levels_; ++level) {
    const double x = static_cast<double>(level);
    total += *expected_loss_at({&x, 1}, rule.predict({&x, 1}), loss, rule.classifies());
  }
  return total / static_cast<double>(levels_);
}

std::optional<double> DiscreteDuplicates::expected_loss_at(std::span<const double> /*x*/,
                                                           double prediction,
                                                           const LossFunction& loss,
                                                           bool /*classifies*/) const {
  const double noise = noise_sd_ * noise_sd_;
  switch (loss.type) {
    case LossType::squared_error:
      return noise + prediction * prediction;
    case LossType::excess_squared:
      return prediction * prediction - loss.anchor * loss.anchor;
    case LossType::zero_one:
      return std::nullopt;
  }
  return std::nullopt;
}

nlohmann::json DiscreteDuplicates::to_json() const {
  return {{"kind", name()}, {"levels", levels_}, {"noise_sd", noise_sd_}};
}

std::unique_ptr<Generator> make_generator(const nlohmann::json& spec) {
  if (!spec.is_object() || !spec.contains("kind")) {
    throw Error(ErrorCode::invalid_configuration, "task needs a \"kind\" field");
  }
  const auto kind = spec.at("kind").get<std::string>();
  if (kind == "gaussian_location") {
    return std::make_unique<GaussianLocation>(spec.value("mean", 0.0), spec.value("variance", 1.0));
  }
  if (kind == "surrogate_mean") {
    return std::make_unique<SurrogateMeanTask>(spec.value("mean", 0.0), spec.value("x_scale", 1.0),
                                               spec.value("x_df", 0), spec.value("y_sd", 1.0));
  }
  if (kind == "linear_gaussian") {
    std::vector<double> beta;
    if (spec.contains("beta")) {
      beta = spec.at("beta").get<std::vector<double>>();
    } else {
      beta.assign(spec.value("dim", std::size_t{5}), 1.0);
    }
    return std::make_unique<LinearGaussian>(std::move(beta), spec.value("noise_sd", 1.0));
  }
  if (kind == "logistic_labels") {
    std::vector<double> beta;
    if (spec.contains("beta")) {
      beta = spec.at("beta").get<std::vector<double>>();
    } else {
      beta = LogisticLabels::alternating_beta(spec.value("dim", std::size_t{10}),
                                              spec.value("scale", 1.0));
    }
    return std::make_unique<LogisticLabels>(std::move(beta));
  }
  if (kind == "discrete_duplicates") {
    return std::make_unique<DiscreteDuplicates>(spec.value("levels", std::size_t{2}),
                                                spec.value("noise_sd", 1.0));
  }
  throw Error(ErrorCode::invalid_configuration, "unknown task \"" + kind + "\"");
}

}  // namespace cvinfer
