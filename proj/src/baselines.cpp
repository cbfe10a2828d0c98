#include "cvinfer/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cvinfer/error.hpp"
#include "cvinfer/numeric.hpp"
#include "cvinfer/random.hpp"

namespace cvinfer {

namespace {

void check_fraction(double f) {
  if (!(f > 0.0 && f < 1.0)) {
    throw Error(ErrorCode::invalid_configuration, "holdout_fraction must lie in (0, 1)");
  }
}

std::vector<std::shared_ptr<const SplitFit>> share(std::vector<SplitFit> fits) {
  std::vector<std::shared_ptr<const SplitFit>> out;
  out.reserve(fits.size());
  for (auto& f : fits) out.push_back(std::make_shared<const SplitFit>(std::move(f)));
  return out;
}

std::vector<std::shared_ptr<const SplitFit>> fit_all(const Dataset& data,
                                                     const std::vector<Fold>& splits,
                                                     const Comparison& cmp) {
  std::vector<SplitFit> fits;
  fits.reserve(splits.size());
  for (const auto& s : splits) fits.push_back(fit_split(data, s.train, s.validation, cmp));
  return share(std::move(fits));
}

double sum_squared_deviations(std::span<const double> values, double centre) {
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    sq[i] = (values[i] - centre) * (values[i] - centre);
  }
  return pairwise_sum(sq);
}

}  // namespace

BaselineSpec BaselineSpec::defaults(BaselineKind kind, std::uint64_t seed) {
  BaselineSpec s;
  s.kind = kind;
  s.repetitions = kind == BaselineKind::five_by_two ? 5 : 10;
  s.holdout_fraction = 0.1;
  s.seed = seed;
  return s;
}

ProcedureOutcome clt_procedure(const CvRun& run, Estimator estimator, double alpha) {
  ProcedureOutcome out;
  out.result = clt_confidence_interval(run.losses, estimator, alpha);
  std::vector<SplitFit> copies(run.fits.begin(), run.fits.end());
  out.splits = share(std::move(copies));
  const auto n = static_cast<double>(run.partition.n());
  for (const auto& f : run.fits) {
    out.target_weights.push_back(static_cast<double>(f.validation.size()) / n);
  }
  return out;
}

InferenceResult holdout_inference(std::span<const double> validation_losses, std::size_t n,
                                  double holdout_fraction, double alpha) {
  check_fraction(holdout_fraction);
  if (validation_losses.size() < 2) {
    throw Error(ErrorCode::insufficient_data, "hold-out needs at least 2 validation points");
  }
  const double r_hat = mean(validation_losses);
  const double variance = sum_squared_deviations(validation_losses, r_hat) /
                          static_cast<double>(validation_losses.size());
  const double scale = std::sqrt(1.0 / holdout_fraction) / std::sqrt(static_cast<double>(n));
  auto r = make_inference("holdout", r_hat, std::sqrt(variance), scale, n, alpha);
  r.estimator = "validation_population_variance";
  r.target = "conditional risk of the rule trained on S";
  return r;
}

ProcedureOutcome holdout_procedure(const CvRun& run, double holdout_fraction, double alpha) {
  const auto& first = run.fits.front();
  ProcedureOutcome out;
  out.result = holdout_inference(first.losses, run.partition.n(), holdout_fraction, alpha);
  out.splits.push_back(std::make_shared<const SplitFit>(first));
  out.target_weights = {1.0};
  return out;
}

ProcedureOutcome holdout_procedure(const Dataset& data, const Comparison& cmp,
                                   const BaselineSpec& spec, double alpha) {
  check_fraction(spec.holdout_fraction);
  const auto splits = random_splits(data.size(), 1, spec.holdout_fraction, spec.seed);
  ProcedureOutcome out;
  out.splits = fit_all(data, splits, cmp);
  out.result = holdout_inference(out.splits[0]->losses, data.size(), spec.holdout_fraction, alpha);
  out.target_weights = {1.0};
  return out;
}

InferenceResult cv_ttest_inference(std::span<const double> fold_means, double r_hat,
                                   std::size_t n, double alpha) {
  const std::size_t k = fold_means.size();
  if (k < 2) throw Error(ErrorCode::insufficient_folds, "cross-validated t test needs k >= 2");
  const double variance =
      sum_squared_deviations(fold_means, r_hat) / static_cast<double>(k - 1);
  auto r = make_inference("cv_ttest", r_hat, std::sqrt(variance),
                          1.0 / std::sqrt(static_cast<double>(k)), n, alpha,
                          static_cast<double>(k - 1));
  r.estimator = "fold_mean_sample_variance";
  r.target = "k-fold test error: mean conditional risk of the k fold rules";
  return r;
}

ProcedureOutcome cv_ttest_procedure(const CvRun& run, double alpha) {
  ProcedureOutcome out;
  out.result = cv_ttest_inference(run.fold_means, run.r_hat, run.partition.n(), alpha);
  std::vector<SplitFit> copies(run.fits.begin(), run.fits.end());
  out.splits = share(std::move(copies));
  const auto n = static_cast<double>(run.partition.n());
  for (const auto& f : run.fits) {
    out.target_weights.push_back(static_cast<double>(f.validation.size()) / n);
  }
  return out;
}

ProcedureOutcome cv_ttest_procedure(const Dataset& data, const Comparison& cmp,
                                    const BaselineSpec& spec, double alpha) {
  if (spec.repetitions < 2) {
    throw Error(ErrorCode::insufficient_folds, "cross-validated t test needs k >= 2");
  }
  const auto partition = make_partition(data.size(), spec.repetitions, spec.seed, true);
  return cv_ttest_procedure(run_cv(data, partition, cmp), alpha);
}

std::vector<Fold> random_splits(std::size_t n, std::size_t repetitions, double fraction,
                                std::uint64_t seed) {
  check_fraction(fraction);
  const auto train_size =
      static_cast<std::size_t>(std::floor(static_cast<double>(n) * (1.0 - fraction)));
  if (train_size < 1 || train_size >= n) {
    throw Error(ErrorCode::insufficient_data, "split leaves an empty training or validation set");
  }
  Rng rng(seed);
  std::vector<Fold> splits;
  splits.reserve(repetitions);
  std::vector<std::size_t> order(n);
  for (std::size_t r = 0; r < repetitions; ++r) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    Fold f;
    f.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(train_size));
    f.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(train_size), order.end());
    std::sort(f.train.begin(), f.train.end());
    std::sort(f.validation.begin(), f.validation.end());
    splits.push_back(std::move(f));
  }
  return splits;
}

InferenceResult repeated_tv_inference(std::span<const double> split_means, std::size_t n,
                                      double holdout_fraction, bool corrected, double alpha) {
  check_fraction(holdout_fraction);
  const std::size_t r = split_means.size();
  if (r < 2) {
    throw Error(ErrorCode::insufficient_repetitions, "repeated train-validation needs r >= 2");
  }
  const auto rd = static_cast<double>(r);
  const double r_hat = mean(split_means);
  const double ss = sum_squared_deviations(split_means, r_hat);
  double variance = ss / (rd - 1.0);
  if (corrected) {
    variance = (1.0 / rd + holdout_fraction / (1.0 - holdout_fraction)) * (rd / (rd - 1.0)) * ss;
  }
  auto result = make_inference(corrected ? "corrected_repeated_tv" : "repeated_tv", r_hat,
                               std::sqrt(variance), 1.0 / std::sqrt(rd), n, alpha, rd - 1.0);
  result.estimator = corrected ? "corrected_split_mean_variance" : "split_mean_sample_variance";
  result.target = "mean conditional risk of the r independently trained split rules";
  return result;
}

ProcedureOutcome repeated_tv_from_fits(std::span<const std::shared_ptr<const SplitFit>> fits,
                                       std::size_t n, double holdout_fraction, bool corrected,
                                       double alpha) {
  std::vector<double> means;
  means.reserve(fits.size());
  for (const auto& f : fits) means.push_back(f->mean_loss());
  ProcedureOutcome out;
  out.result = repeated_tv_inference(means, n, holdout_fraction, corrected, alpha);
  out.splits.assign(fits.begin(), fits.end());
  out.target_weights.assign(fits.size(), 1.0 / static_cast<double>(fits.size()));
  return out;
}

ProcedureOutcome repeated_tv_procedure(const Dataset& data, const Comparison& cmp,
                                       const BaselineSpec& spec, double alpha, bool corrected) {
  if (spec.repetitions < 2) {
    throw Error(ErrorCode::insufficient_repetitions, "repeated train-validation needs r >= 2");
  }
  const auto splits = random_splits(data.size(), spec.repetitions, spec.holdout_fraction, spec.seed);
  const auto fits = fit_all(data, splits, cmp);
  return repeated_tv_from_fits(fits, data.size(), spec.holdout_fraction, corrected, alpha);
}

std::vector<Fold> five_by_two_splits(std::size_t n, std::size_t replicates, std::uint64_t seed) {
  if (n < 4) throw Error(ErrorCode::insufficient_data, "5x2 test needs n >= 4");
  Rng rng(seed);
  const std::size_t first_half = (n + 1) / 2;
  std::vector<Fold> splits;
  splits.reserve(2 * replicates);
  std::vector<std::size_t> order(n);
  for (std::size_t j = 0; j < replicates; ++j) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    std::vector<std::size_t> a(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(first_half));
    std::vector<std::size_t> b(order.begin() + static_cast<std::ptrdiff_t>(first_half), order.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    splits.push_back(Fold{b, a});
    splits.push_back(Fold{std::move(a), std::move(b)});
  }
  return splits;
}

InferenceResult five_by_two_inference(std::span<const double> first,
                                      std::span<const double> second, std::size_t n,
                                      double alpha) {
  const std::size_t reps = first.size();
  if (reps < 2 || second.size() != reps) {
    throw Error(ErrorCode::insufficient_repetitions, "5x2 test needs >= 2 paired replicates");
  }
  std::vector<double> s2(reps);
  for (std::size_t j = 0; j < reps; ++j) {
    const double centre = 0.5 * (first[j] + second[j]);
    s2[j] = (first[j] - centre) * (first[j] - centre) + (second[j] - centre) * (second[j] - centre);
  }
  const double variance = mean(s2);
  auto r = make_inference("five_by_two", first[0], std::sqrt(variance), 1.0, n, alpha,
                          static_cast<double>(reps));
  r.estimator = "half_split_variance";
  r.target = "mean conditional risk of the 2r half-sample rules";
  return r;
}

ProcedureOutcome five_by_two_from_fits(std::span<const std::shared_ptr<const SplitFit>> fits,
                                       std::size_t n, double alpha) {
  if (fits.size() % 2 != 0) {
    throw Error(ErrorCode::invalid_input, "5x2 fits must come in pairs");
  }
  std::vector<double> first;
  std::vector<double> second;
  for (std::size_t s = 0; s < fits.size(); s += 2) {
    first.push_back(fits[s]->mean_loss());
    second.push_back(fits[s + 1]->mean_loss());
  }
  ProcedureOutcome out;
  out.result = five_by_two_inference(first, second, n, alpha);
  out.splits.assign(fits.begin(), fits.end());
  out.target_weights.assign(fits.size(), 1.0 / static_cast<double>(fits.size()));
  return out;
}

ProcedureOutcome five_by_two_procedure(const Dataset& data, const Comparison& cmp,
                                       const BaselineSpec& spec, double alpha) {
  const auto splits = five_by_two_splits(data.size(), spec.repetitions, spec.seed);
  return five_by_two_from_fits(fit_all(data, splits, cmp), data.size(), alpha);
}

ProcedureOutcome run_baseline(const Dataset& data, const Comparison& cmp,
                              const BaselineSpec& spec, double alpha) {
  switch (spec.kind) {
    case BaselineKind::holdout:
      return holdout_procedure(data, cmp, spec, alpha);
    case BaselineKind::cv_ttest:
      return cv_ttest_procedure(data, cmp, spec, alpha);
    case BaselineKind::repeated_tv:
      return repeated_tv_procedure(data, cmp, spec, alpha, false);
    case BaselineKind::corrected_repeated_tv:
      return repeated_tv_procedure(data, cmp, spec, alpha, true);
    case BaselineKind::five_by_two:
      return five_by_two_procedure(data, cmp, spec, alpha);
  }
  throw Error(ErrorCode::invalid_configuration, "unknown baseline");
}

std::string to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::holdout: return "holdout";
    case BaselineKind::cv_ttest: return "cv_ttest";
    case BaselineKind::repeated_tv: return "repeated_tv";
    case BaselineKind::corrected_repeated_tv: return "corrected_repeated_tv";
    case BaselineKind::five_by_two: return "five_by_two";
  }
  return "unknown";
}

BaselineKind baseline_kind_from_string(const std::string& name) {
  for (auto k : {BaselineKind::holdout, BaselineKind::cv_ttest, BaselineKind::repeated_tv,
                 BaselineKind::corrected_repeated_tv, BaselineKind::five_by_two}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::invalid_configuration, "unknown baseline kind \"" + name + "\"");
}

}  // namespace cvinfer
