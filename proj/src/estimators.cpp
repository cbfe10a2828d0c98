#include "cvinfer/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "cvinfer/error.hpp"
#include "cvinfer/numeric.hpp"

namespace cvinfer {

double cv_error(const LossMatrix& m) { return mean(m.losses()); }

VarianceEstimate sigma_in(const LossMatrix& m, bool binary_shortcut) {
  const auto& folds = m.by_fold();
  for (std::size_t j = 0; j < folds.size(); ++j) {
    if (folds[j].size() < 2) {
      throw Error(ErrorCode::within_fold_undefined,
                  "fold " + std::to_string(j) +
                      " has a single point; the within-fold estimator needs >= 2 per fold");
    }
  }
  const bool binary = binary_shortcut && m.binary();
  std::vector<double> per_fold(folds.size());
  for (std::size_t j = 0; j < folds.size(); ++j) {
    const auto nj = static_cast<double>(folds[j].size());
    if (binary) {
      const double p = mean(folds[j]);
      per_fold[j] = nj / (nj - 1.0) * p * (1.0 - p);
    } else {
      per_fold[j] = sample_variance(folds[j]);
    }
  }
  return VarianceEstimate{mean(per_fold),
                          binary ? EstimatorKind::within_fold_binary : EstimatorKind::within_fold,
                          m.k(), m.n(), !m.even_folds()};
}

VarianceEstimate sigma_out(const LossMatrix& m, double r_hat, bool binary_shortcut) {
  const double actual = cv_error(m);
  if (std::abs(actual - r_hat) > 1e-12 * std::max(1.0, std::abs(r_hat))) {
    throw Error(ErrorCode::inconsistent_inputs,
                "supplied R_hat does not match the loss matrix mean");
  }
  VarianceEstimate out{0.0, EstimatorKind::all_pairs, m.k(), m.n(), !m.even_folds()};
  if (binary_shortcut && m.binary()) {
    out.value = r_hat * (1.0 - r_hat);
    out.kind = EstimatorKind::all_pairs_binary;
    return out;
  }
  const auto& h = m.losses();
  std::vector<double> sq(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) sq[i] = (h[i] - r_hat) * (h[i] - r_hat);
  out.value = pairwise_sum(sq) / static_cast<double>(h.size());
  return out;
}

VarianceEstimate sigma_out(const LossMatrix& m, bool binary_shortcut) {
  return sigma_out(m, cv_error(m), binary_shortcut);
}

VarianceEstimate estimate_variance(const LossMatrix& m, Estimator which) {
  return which == Estimator::within ? sigma_in(m) : sigma_out(m);
}

VarianceEstimate brute_force_reference(const LossMatrix& m, Estimator which) {
  const auto& folds = m.by_fold();
  const auto k = static_cast<double>(m.k());
  const auto n = static_cast<double>(m.n());
  VarianceEstimate out{0.0, EstimatorKind::brute_force_all_pairs, m.k(), m.n(), !m.even_folds()};

  if (which == Estimator::within) {
    out.kind = EstimatorKind::brute_force_within;
    CompensatedSum outer;
    for (std::size_t j = 0; j < folds.size(); ++j) {
      const auto nj = static_cast<double>(folds[j].size());
      if (folds[j].size() < 2) {
        throw Error(ErrorCode::within_fold_undefined,
                    "fold " + std::to_string(j) + " has a single point");
      }
      CompensatedSum inner;
      for (double hi : folds[j]) {
        CompensatedSum fold_total;
        for (double hk : folds[j]) fold_total.add(hk);
        const double d = hi - fold_total.value() / nj;
        inner.add(d * d);
      }
      outer.add(inner.value() / (nj - 1.0));
    }
    out.value = outer.value() / k;
    return out;
  }

  CompensatedSum total;
  for (double h : m.losses()) total.add(h);
  const double r_hat = total.value() / n;
  CompensatedSum outer;
  for (const auto& fold : folds) {
    CompensatedSum inner;
    for (double hi : fold) inner.add((hi - r_hat) * (hi - r_hat));
    outer.add(k / n * inner.value());
  }
  out.value = outer.value() / k;
  return out;
}

std::string to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::within_fold: return "within_fold";
    case EstimatorKind::all_pairs: return "all_pairs";
    case EstimatorKind::within_fold_binary: return "within_fold_binary";
    case EstimatorKind::all_pairs_binary: return "all_pairs_binary";
    case EstimatorKind::brute_force_within: return "brute_force_within";
    case EstimatorKind::brute_force_all_pairs: return "brute_force_all_pairs";
  }
  return "unknown";
}

std::string to_string(Estimator which) { return which == Estimator::within ? "in" : "out"; }

Estimator estimator_from_string(const std::string& name) {
  if (name == "in" || name == "within") return Estimator::within;
  if (name == "out" || name == "all_pairs") return Estimator::out;
  throw Error(ErrorCode::invalid_configuration, "unknown estimator \"" + name + "\"");
}

nlohmann::json to_json(const VarianceEstimate& v) {
  return {{"value", v.value},
          {"kind", to_string(v.kind)},
          {"k", v.k},
          {"n", v.n},
          {"uneven_folds", v.uneven_folds}};
}

VarianceEstimate variance_estimate_from_json(const nlohmann::json& j) {
  static const EstimatorKind kinds[] = {
      EstimatorKind::within_fold,        EstimatorKind::all_pairs,
      EstimatorKind::within_fold_binary, EstimatorKind::all_pairs_binary,
      EstimatorKind::brute_force_within, EstimatorKind::brute_force_all_pairs};
  VarianceEstimate v;
  v.value = j.at("value").get<double>();
  const auto name = j.at("kind").get<std::string>();
  const auto it = std::find_if(std::begin(kinds), std::end(kinds),
                               [&](EstimatorKind k) { return to_string(k) == name; });
  if (it == std::end(kinds)) {
    throw Error(ErrorCode::invalid_input, "unknown estimator kind \"" + name + "\"");
  }
  v.kind = *it;
  v.k = j.at("k").get<std::size_t>();
  v.n = j.at("n").get<std::size_t>();
  v.uneven_folds = j.value("uneven_folds", false);
  return v;
}

}  // namespace cvinfer
