#include "cvinfer/inference.hpp"

#include <cmath>
#include <limits>

#include "cvinfer/error.hpp"
#include "cvinfer/quantiles.hpp"

namespace cvinfer {

namespace {

constexpr const char* kKFoldTarget =
    "k-fold test error: fold rules' conditional risks weighted by validation share";

double quantile(double p, std::optional<double> df) {
  return df ? t_quantile(p, *df) : normal_quantile(p);
}

double cdf(double x, std::optional<double> df) {
  return df ? student_t_cdf(x, *df) : normal_cdf(x);
}

}  // namespace

InferenceResult make_inference(std::string procedure, double r_hat, double sigma_hat,
                               double se_scale, std::size_t n, double alpha,
                               std::optional<double> df) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::invalid_probability, "alpha must lie in (0, 1)");
  }
  InferenceResult r;
  r.procedure = std::move(procedure);
  r.r_hat = r_hat;
  r.sigma_hat = sigma_hat;
  r.standard_error = sigma_hat * se_scale;
  r.n = n;
  r.alpha = alpha;
  r.df = df;

  const double se = r.standard_error;
  if (!(se > 0.0)) {
    r.degenerate = true;
    r.ci_low = r.ci_high = r.one_sided_upper = r_hat;
    if (r_hat < 0.0) {
      r.decision = Decision::reject;
      r.p_value = 0.0;
    } else {
      r.decision = r_hat > 0.0 ? Decision::fail_to_reject : Decision::inconclusive;
      r.p_value = 1.0;
    }
    return r;
  }

  const double half = quantile(1.0 - alpha / 2.0, df) * se;
  r.ci_low = r_hat - half;
  r.ci_high = r_hat + half;
  const double threshold = quantile(alpha, df) * se;
  r.one_sided_upper = r_hat - threshold;
  r.decision = r_hat < threshold ? Decision::reject : Decision::fail_to_reject;
  r.p_value = cdf(r_hat / se, df);
  return r;
}

InferenceResult clt_interval(double r_hat, double sigma_hat, std::size_t n, double alpha) {
  return make_inference("clt", r_hat, sigma_hat, 1.0 / std::sqrt(static_cast<double>(n)), n,
                        alpha);
}

InferenceResult clt_confidence_interval(const LossMatrix& m, Estimator estimator, double alpha) {
  const auto variance = estimate_variance(m, estimator);
  auto r = clt_interval(cv_error(m), std::sqrt(variance.value), m.n(), alpha);
  r.procedure = "clt_" + to_string(estimator);
  r.estimator = to_string(variance.kind);
  r.target = kKFoldTarget;
  return r;
}

InferenceResult clt_improvement_test(const LossMatrix& m, Estimator estimator, double alpha) {
  if (m.kind() != LossKind::difference) {
    throw Error(ErrorCode::invalid_input, "improvement test needs a difference loss matrix");
  }
  auto r = clt_confidence_interval(m, estimator, alpha);
  if (r.decision == Decision::inconclusive) {
    throw Error(ErrorCode::inconclusive_degenerate,
                "all loss differences are zero; the test is inconclusive");
  }
  return r;
}

std::string to_string(Decision d) {
  switch (d) {
    case Decision::reject: return "reject";
    case Decision::fail_to_reject: return "fail_to_reject";
    case Decision::inconclusive: return "inconclusive";
  }
  return "unknown";
}

nlohmann::json to_json(const InferenceResult& r) {
  nlohmann::json j{{"procedure", r.procedure},
                   {"r_hat", r.r_hat},
                   {"sigma_hat", r.sigma_hat},
                   {"standard_error", r.standard_error},
                   {"n", r.n},
                   {"alpha", r.alpha},
                   {"ci_low", r.ci_low},
                   {"ci_high", r.ci_high},
                   {"decision", to_string(r.decision)},
                   {"p_value", r.p_value},
                   {"one_sided_upper", r.one_sided_upper},
                   {"degenerate", r.degenerate},
                   {"estimator", r.estimator},
                   {"target", r.target}};
  j["df"] = r.df ? nlohmann::json(*r.df) : nlohmann::json(nullptr);
  return j;
}

InferenceResult inference_result_from_json(const nlohmann::json& j) {
  InferenceResult r;
  r.procedure = j.at("procedure").get<std::string>();
  r.r_hat = j.at("r_hat").get<double>();
  r.sigma_hat = j.at("sigma_hat").get<double>();
  r.standard_error = j.at("standard_error").get<double>();
  r.n = j.at("n").get<std::size_t>();
  r.alpha = j.at("alpha").get<double>();
  r.ci_low = j.at("ci_low").get<double>();
  r.ci_high = j.at("ci_high").get<double>();
  const auto d = j.at("decision").get<std::string>();
  if (d == "reject") {
    r.decision = Decision::reject;
  } else if (d == "fail_to_reject") {
    r.decision = Decision::fail_to_reject;
  } else if (d == "inconclusive") {
    r.decision = Decision::inconclusive;
  } else {
    throw Error(ErrorCode::invalid_input, "unknown decision \"" + d + "\"");
  }
  r.p_value = j.at("p_value").get<double>();
  r.one_sided_upper = j.at("one_sided_upper").get<double>();
  r.degenerate = j.at("degenerate").get<bool>();
  r.estimator = j.value("estimator", "");
  r.target = j.value("target", "");
  if (j.contains("df") && !j.at("df").is_null()) r.df = j.at("df").get<double>();
  return r;
}

}  // namespace cvinfer
