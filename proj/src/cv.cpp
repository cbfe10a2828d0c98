#include "cvinfer/cv.hpp"

#include <cmath>
#include <string>

#include "cvinfer/error.hpp"
#include "cvinfer/numeric.hpp"
#include "cvinfer/parallel.hpp"

namespace cvinfer {

nlohmann::json to_json(const Comparison& cmp) {
  nlohmann::json j;
  if (cmp.second) {
    j["algo1"] = to_json(cmp.first);
    j["algo2"] = to_json(*cmp.second);
  } else {
    j["algo"] = to_json(cmp.first);
  }
  j["loss"] = to_json(cmp.loss);
  return j;
}

Comparison comparison_from_json(const nlohmann::json& j) {
  Comparison cmp;
  if (j.contains("algo1")) {
    cmp.first = algorithm_from_json(j.at("algo1"));
    if (j.contains("algo2")) cmp.second = algorithm_from_json(j.at("algo2"));
  } else if (j.contains("algo")) {
    cmp.first = algorithm_from_json(j.at("algo"));
  } else {
    throw Error(ErrorCode::invalid_configuration, "comparison needs \"algo\" or \"algo1\"");
  }
  cmp.loss = j.contains("loss") ? loss_from_json(j.at("loss")) : LossFunction::squared_error();
  return cmp;
}

double SplitFit::mean_loss() const { return mean(losses); }

SplitFit fit_split(const Dataset& data, std::vector<std::size_t> train,
                   std::vector<std::size_t> validation, const Comparison& cmp) {
  PredictionRule first = fit(cmp.first, data, train);
  std::optional<PredictionRule> second;
  if (cmp.second) second = fit(*cmp.second, data, train);
  SplitFit split{std::move(train), std::move(validation), std::move(first), std::move(second), {}};
  split.losses.reserve(split.validation.size());
  for (auto i : split.validation) {
    double h = point_loss(split.first, cmp.loss, data[i]);
    if (split.second) h -= point_loss(*split.second, cmp.loss, data[i]);
    split.losses.push_back(h);
  }
  return split;
}

CvRun run_cv(const Dataset& data, const FoldPartition& partition, const Comparison& cmp,
             std::size_t workers) {
  if (data.size() != partition.n()) {
    throw Error(ErrorCode::invalid_input, "partition covers " + std::to_string(partition.n()) +
                                              " points, dataset has " +
                                              std::to_string(data.size()));
  }
  const std::size_t k = partition.k();
  std::vector<std::optional<SplitFit>> slots(k);
  parallel_for(k, workers, [&](std::size_t j) {
    try {
      slots[j] = fit_split(data, partition[j].train, partition[j].validation, cmp);
    } catch (const Error& e) {
      throw Error(e.code(), "fold " + std::to_string(j) + ": " + e.what());
    }
  });

  std::vector<SplitFit> fits;
  fits.reserve(k);
  std::vector<LossEntry> entries;
  entries.reserve(data.size());
  std::vector<double> fold_means(k);
  for (std::size_t j = 0; j < k; ++j) {
    fits.push_back(std::move(*slots[j]));
    const auto& f = fits.back();
    for (std::size_t r = 0; r < f.validation.size(); ++r) {
      entries.push_back({f.validation[r], j, f.losses[r]});
    }
    fold_means[j] = f.mean_loss();
  }
  LossMatrix losses(std::move(entries), data.size(), k, cmp.kind());
  const double r_hat = mean(losses.losses());
  return CvRun{partition, std::move(losses), std::move(fold_means), r_hat, std::move(fits)};
}

CvRun run_cv(const Dataset& data, const FoldPartition& partition, const AlgorithmSpec& algo,
             const LossFunction& loss, std::size_t workers) {
  return run_cv(data, partition, Comparison{algo, std::nullopt, loss}, workers);
}

CvRun run_comparison(const Dataset& data, const FoldPartition& partition,
                     const AlgorithmSpec& first, const AlgorithmSpec& second,
                     const LossFunction& loss, std::size_t workers) {
  return run_cv(data, partition, Comparison{first, second, loss}, workers);
}

nlohmann::json summarize(const CvRun& run) {
  return {{"r_hat", run.r_hat},
          {"fold_means", run.fold_means},
          {"k", run.partition.k()},
          {"n", run.partition.n()},
          {"loss_kind", run.losses.kind() == LossKind::difference ? "difference" : "plain"}};
}

namespace {

std::optional<double> exact_split_risk(const SplitFit& fit, const Generator& task,
                                       const LossFunction& loss) {
  const auto first = task.exact_risk(fit.first, loss);
  if (!first) return std::nullopt;
  if (!fit.second) return first;
  const auto second = task.exact_risk(*fit.second, loss);
  if (!second) return std::nullopt;
  return *first - *second;
}

// Loss of one rule at a fresh point; label noise is integrated out when the
// task can do it and plain Monte Carlo is not forced.
double fresh_loss(const PredictionRule& rule, const Generator& task, const LossFunction& loss,
                  DataPoint point, bool integrate_labels) {
  if (loss.type == LossType::zero_one && !rule.classifies()) {
    throw Error(ErrorCode::invalid_configuration, "0-1 loss needs a classifying rule");
  }
  const double prediction = rule.predict(point.features);
  if (integrate_labels) {
    if (auto v = task.expected_loss_at(point.features, prediction, loss, rule.classifies())) {
      return *v;
    }
  }
  return loss_value(loss, prediction, point.target, rule.classifies());
}

RiskEstimate risk_of(std::span<const SplitFit* const> fits, std::span<const double> weights,
                     const Generator& task, const LossFunction& loss, std::size_t n_mc,
                     std::uint64_t seed, RiskMethod method) {
  if (fits.size() != weights.size()) {
    throw Error(ErrorCode::invalid_input, "one weight per split is required");
  }
  if (method == RiskMethod::automatic) {
    double total = 0.0;
    bool exact = true;
    for (std::size_t s = 0; s < fits.size() && exact; ++s) {
      const auto r = exact_split_risk(*fits[s], task, loss);
      if (r) {
        total += weights[s] * *r;
      } else {
        exact = false;
      }
    }
    if (exact) return RiskEstimate{total, 0.0, 0, {}};
  }

  if (n_mc < 2) throw Error(ErrorCode::invalid_input, "Monte Carlo risk needs n_mc >= 2");
  RiskEstimate out;
  out.n_mc = n_mc;
  if (n_mc < 1000) {
    out.warnings.push_back("n_mc = " + std::to_string(n_mc) +
                           " < 1000: Monte Carlo target estimate is noisy");
  }
  Rng rng(seed);
  const Dataset pool = task.sample(n_mc, rng);
  const bool integrate = method == RiskMethod::automatic;
  std::vector<double> per_point(n_mc, 0.0);
  for (std::size_t s = 0; s < fits.size(); ++s) {
    for (std::size_t t = 0; t < n_mc; ++t) {
      double h = fresh_loss(fits[s]->first, task, loss, pool[t], integrate);
      if (fits[s]->second) h -= fresh_loss(*fits[s]->second, task, loss, pool[t], integrate);
      per_point[t] += weights[s] * h;
    }
  }
  out.value = mean(per_point);
  out.standard_error = std::sqrt(sample_variance(per_point) / static_cast<double>(n_mc));
  return out;
}

}  // namespace

RiskEstimate true_risk_oracle(std::span<const SplitFit> fits, std::span<const double> weights,
                              const Generator& task, const LossFunction& loss, std::size_t n_mc,
                              std::uint64_t seed, RiskMethod method) {
  std::vector<const SplitFit*> ptrs;
  ptrs.reserve(fits.size());
  for (const auto& f : fits) ptrs.push_back(&f);
  return risk_of(ptrs, weights, task, loss, n_mc, seed, method);
}

RiskEstimate true_risk_oracle(std::span<const std::shared_ptr<const SplitFit>> fits,
                              std::span<const double> weights, const Generator& task,
                              const LossFunction& loss, std::size_t n_mc, std::uint64_t seed,
                              RiskMethod method) {
  std::vector<const SplitFit*> ptrs;
  ptrs.reserve(fits.size());
  for (const auto& f : fits) ptrs.push_back(f.get());
  return risk_of(ptrs, weights, task, loss, n_mc, seed, method);
}

RiskEstimate split_risk(const SplitFit& fit, const Generator& task, const LossFunction& loss,
                        std::size_t n_mc, Rng& rng, RiskMethod method) {
  const double weight = 1.0;
  return true_risk_oracle(std::span<const SplitFit>(&fit, 1), std::span<const double>(&weight, 1),
                          task, loss, n_mc, rng.next(), method);
}

RiskEstimate true_risk_oracle(const CvRun& run, const Generator& task, const LossFunction& loss,
                              std::size_t n_mc, std::uint64_t seed, RiskMethod method) {
  std::vector<double> weights;
  weights.reserve(run.fits.size());
  const auto n = static_cast<double>(run.partition.n());
  for (const auto& f : run.fits) weights.push_back(static_cast<double>(f.validation.size()) / n);
  return true_risk_oracle(run.fits, weights, task, loss, n_mc, seed, method);
}

}  // namespace cvinfer
