#include "cvinfer/stability.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cvinfer/error.hpp"
#include "cvinfer/numeric.hpp"
#include "cvinfer/parallel.hpp"

namespace cvinfer {

namespace {

// Stream tags keep the three Monte Carlo stages on disjoint seeds.
constexpr std::uint64_t kGammaStream = 0x67616d6d61ULL;
constexpr std::uint64_t kVarianceStream = 0x7369676d61ULL;
constexpr std::uint64_t kRatioStream = 0x726174696fULL;

struct Rules {
  PredictionRule first;
  std::optional<PredictionRule> second;
};

Rules fit_rules(const Comparison& cmp, const Dataset& data, std::span<const std::size_t> train) {
  Rules r{fit(cmp.first, data, train), std::nullopt};
  if (cmp.second) r.second = fit(*cmp.second, data, train);
  return r;
}

double h_at(const Rules& rules, const LossFunction& loss, DataPoint point) {
  double h = point_loss(rules.first, loss, point);
  if (rules.second) h -= point_loss(*rules.second, loss, point);
  return h;
}

McEstimate summarize_samples(std::span<const double> samples, bool clamp) {
  McEstimate e;
  e.raw = mean(samples);
  e.value = clamp ? std::max(e.raw, 0.0) : e.raw;
  e.standard_error =
      std::sqrt(sample_variance(samples) / static_cast<double>(samples.size()));
  return e;
}

void add_warning(std::vector<std::string>& warnings, std::string w) {
  if (std::find(warnings.begin(), warnings.end(), w) == warnings.end()) {
    warnings.push_back(std::move(w));
  }
}

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorCode::invalid_configuration, message);
}

}  // namespace

std::size_t training_size(std::size_t n, std::size_t k) {
  if (k < 2 || k > n) throw Error(ErrorCode::invalid_fold_count, "need 2 <= k <= n");
  return n - (n + k - 1) / k;
}

StabilityEstimates estimate_stabilities(const Generator& task, const Comparison& cmp,
                                        std::size_t n, std::size_t k,
                                        const StabilityOptions& options) {
  const std::size_t m = training_size(n, k);
  const std::size_t reps = options.replicates;
  const std::size_t inner = options.inner;
  require(reps >= 2, "stability estimation needs at least 2 replicates");
  require(inner >= 1, "inner Monte Carlo size must be >= 1");
  require(!options.exhaustive || m <= 50, "exhaustive swap mode needs m <= 50");

  StabilityEstimates out;
  out.m = m;
  out.replicates = reps;
  if (reps < 100) {
    out.warnings.push_back("replicates = " + std::to_string(reps) + " < 100");
  }
  if (inner < 50) {
    out.warnings.push_back("inner Monte Carlo size = " + std::to_string(inner) + " < 50");
  }

  std::vector<double> ms(reps), loss(reps), fourth(reps);
  const std::uint64_t base = derive_seed(options.seed, kGammaStream);
  parallel_for(reps, options.workers, [&](std::size_t r) {
    Rng rng(derive_seed(base, r));
    // Rows [0, m) form Z, row m is the replacement point, the rest are the
    // N + 1 test points shared by both fits.
    const Dataset data = task.sample(m + 1 + inner + 1, rng);
    std::vector<std::size_t> train(m);
    std::iota(train.begin(), train.end(), std::size_t{0});
    const Rules full = fit_rules(cmp, data, train);
    const std::size_t tests = inner + 1;
    std::vector<double> base_h(tests);
    for (std::size_t t = 0; t < tests; ++t) base_h[t] = h_at(full, cmp.loss, data[m + 1 + t]);

    std::vector<double> d(tests), sq(tests), quart(tests);
    std::vector<std::size_t> swapped(m);
    auto one_swap = [&](std::size_t i, double& a, double& b, double& c) {
      for (std::size_t j = 0, w = 0; j <= m; ++j) {
        if (j != i) swapped[w++] = j;
      }
      const Rules alt = fit_rules(cmp, data, swapped);
      for (std::size_t t = 0; t < tests; ++t) {
        d[t] = base_h[t] - h_at(alt, cmp.loss, data[m + 1 + t]);
        sq[t] = d[t] * d[t];
      }
      const double centre = mean(d);
      for (std::size_t t = 0; t < tests; ++t) {
        const double e = d[t] - centre;
        quart[t] = e * e * e * e;
      }
      a = mean(sq);
      b = sample_variance(d);
      c = mean(quart);
    };

    if (options.exhaustive) {
      double sa = 0.0, sb = 0.0, sc = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        double a = 0.0, b = 0.0, c = 0.0;
        one_swap(i, a, b, c);
        sa += a;
        sb += b;
        sc += c;
      }
      const auto md = static_cast<double>(m);
      ms[r] = sa / md;
      loss[r] = sb / md;
      fourth[r] = sc / md;
    } else {
      one_swap(static_cast<std::size_t>(rng.below(m)), ms[r], loss[r], fourth[r]);
    }
  });

  out.gamma_ms = summarize_samples(ms, true);
  out.gamma_loss = summarize_samples(loss, true);
  out.gamma_4 = summarize_samples(fourth, true);
  std::vector<double> diff(reps);
  for (std::size_t r = 0; r < reps; ++r) diff[r] = ms[r] - loss[r];
  out.ms_minus_loss = summarize_samples(diff, false);
  return out;
}

VarianceParams estimate_variance_params(const Generator& task, const Comparison& cmp,
                                        std::size_t n, std::size_t k,
                                        const StabilityOptions& options) {
  const std::size_t m = training_size(n, k);
  const std::size_t batches = options.batches;
  const std::size_t sets = options.train_sets;
  const std::size_t points = options.test_points;
  require(batches >= 2, "variance parameters need at least 2 batches");
  require(sets >= 2 && points >= 2, "each batch needs >= 2 training sets and >= 2 test points");

  VarianceParams out;
  out.m = m;
  out.replicates = batches * sets;
  if (out.replicates < 100) {
    out.warnings.push_back("replicates = " + std::to_string(out.replicates) + " < 100");
  }
  if (points < 50) {
    out.warnings.push_back("inner Monte Carlo size = " + std::to_string(points) + " < 50");
  }

  std::vector<double> sigma2(batches), tilde(batches), resid(batches), gap(batches);
  const std::uint64_t base = derive_seed(options.seed, kVarianceStream);
  parallel_for(batches, options.workers, [&](std::size_t g) {
    Rng rng(derive_seed(base, g));
    const Dataset tests = task.sample(points, rng);
    std::vector<std::size_t> train(m);
    std::iota(train.begin(), train.end(), std::size_t{0});
    // table[t * points + s] = h(test s, training set t)
    std::vector<double> table(sets * points);
    for (std::size_t t = 0; t < sets; ++t) {
      const Dataset data = task.sample(m, rng);
      const Rules rules = fit_rules(cmp, data, train);
      for (std::size_t s = 0; s < points; ++s) {
        table[t * points + s] = h_at(rules, cmp.loss, tests[s]);
      }
    }
    std::vector<double> row_mean(sets), col_mean(points, 0.0);
    for (std::size_t t = 0; t < sets; ++t) {
      row_mean[t] = mean(std::span<const double>(table.data() + t * points, points));
      for (std::size_t s = 0; s < points; ++s) col_mean[s] += table[t * points + s];
    }
    for (auto& c : col_mean) c /= static_cast<double>(sets);
    const double grand = mean(row_mean);

    const auto T = static_cast<double>(sets);
    const auto N = static_cast<double>(points);
    CompensatedSum ss_cols, ss_resid, ss_rows_within;
    for (std::size_t s = 0; s < points; ++s) {
      ss_cols.add((col_mean[s] - grand) * (col_mean[s] - grand));
    }
    for (std::size_t t = 0; t < sets; ++t) {
      for (std::size_t s = 0; s < points; ++s) {
        const double x = table[t * points + s];
        const double e = x - row_mean[t] - col_mean[s] + grand;
        ss_resid.add(e * e);
        ss_rows_within.add((x - row_mean[t]) * (x - row_mean[t]));
      }
    }
    const double ms_points = T * ss_cols.value() / (N - 1.0);
    const double ms_resid = ss_resid.value() / ((T - 1.0) * (N - 1.0));
    sigma2[g] = (ms_points - ms_resid) / T;
    tilde[g] = ss_rows_within.value() / (T * (N - 1.0));
    resid[g] = ms_resid;
    gap[g] = tilde[g] - sigma2[g];
  });

  out.sigma2 = summarize_samples(sigma2, true);
  out.sigma2_tilde = summarize_samples(tilde, true);
  out.cond_var_mean = summarize_samples(resid, true);
  out.tilde_gap = summarize_samples(gap, false);
  return out;
}

VarianceRatio variance_ratio_diagnostic(const Generator& task, const Comparison& cmp,
                                        std::size_t n, std::size_t k,
                                        const StabilityOptions& options,
                                        std::optional<McEstimate> sigma2) {
  const std::size_t reps = options.outer_reps;
  require(reps >= 2, "variance ratio needs at least 2 outer replicates");
  training_size(n, k);

  VarianceRatio out;
  out.outer_reps = reps;
  if (reps < 100) out.warnings.push_back("outer_reps = " + std::to_string(reps) + " < 100");
  if (!sigma2) {
    auto params = estimate_variance_params(task, cmp, n, k, options);
    for (auto& w : params.warnings) add_warning(out.warnings, std::move(w));
    sigma2 = params.sigma2;
  }

  std::vector<double> errors(reps);
  std::vector<std::vector<std::string>> risk_warnings(reps);
  const std::uint64_t base = derive_seed(options.seed, kRatioStream);
  const double root_n = std::sqrt(static_cast<double>(n));
  parallel_for(reps, options.workers, [&](std::size_t r) {
    Rng rng(derive_seed(base, r));
    const Dataset data = task.sample(n, rng);
    const auto partition = make_partition(n, k, rng.next(), true);
    const CvRun run = run_cv(data, partition, cmp);
    auto risk = true_risk_oracle(run, task, cmp.loss, options.n_mc, rng.next());
    errors[r] = root_n * (run.r_hat - risk.value);
    risk_warnings[r] = std::move(risk.warnings);
  });
  for (auto& ws : risk_warnings) {
    for (auto& w : ws) add_warning(out.warnings, std::move(w));
  }

  const double var = sample_variance(errors);
  if (!(sigma2->raw > 0.0)) {
    throw Error(ErrorCode::degenerate_diagnostic,
                var == 0.0 ? "variance ratio is 0/0: the loss does not vary"
                           : "estimated sigma^2 is not positive");
  }
  const double centre = mean(errors);
  std::vector<double> dev2(reps), dev4(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    const double e = errors[r] - centre;
    dev2[r] = e * e;
    dev4[r] = e * e * e * e;
  }
  const double m2 = mean(dev2);
  const double se_var =
      std::sqrt(std::max(mean(dev4) - m2 * m2, 0.0) / static_cast<double>(reps));

  out.scaled_error_variance = var;
  out.sigma2 = sigma2->raw;
  out.ratio.raw = var / sigma2->raw;
  out.ratio.value = out.ratio.raw;
  const double rel_var = var > 0.0 ? se_var / var : 0.0;
  const double rel_sigma = sigma2->standard_error / sigma2->raw;
  out.ratio.standard_error = out.ratio.raw * std::sqrt(rel_var * rel_var + rel_sigma * rel_sigma);
  return out;
}

StabilityReport stability_report(const Generator& task, const Comparison& cmp, std::size_t n,
                                 std::size_t k, const StabilityOptions& options) {
  StabilityReport report;
  report.n = n;
  report.k = k;
  auto gammas = estimate_stabilities(task, cmp, n, k, options);
  auto params = estimate_variance_params(task, cmp, n, k, options);
  report.m = gammas.m;
  report.gamma_ms = gammas.gamma_ms;
  report.gamma_loss = gammas.gamma_loss;
  report.gamma_4 = gammas.gamma_4;
  report.sigma2 = params.sigma2;
  report.sigma2_tilde = params.sigma2_tilde;
  report.cond_var_mean = params.cond_var_mean;
  report.mc_replicates = gammas.replicates;
  for (auto& w : gammas.warnings) add_warning(report.warnings, std::move(w));
  for (auto& w : params.warnings) add_warning(report.warnings, std::move(w));
  if (options.outer_reps > 0) {
    auto ratio = variance_ratio_diagnostic(task, cmp, n, k, options, params.sigma2);
    report.variance_ratio = ratio.ratio;
    for (auto& w : ratio.warnings) add_warning(report.warnings, std::move(w));
  }
  return report;
}

nlohmann::json to_json(const McEstimate& e) {
  return {{"value", e.value}, {"raw", e.raw}, {"standard_error", e.standard_error}};
}

McEstimate mc_estimate_from_json(const nlohmann::json& j) {
  return McEstimate{j.at("value").get<double>(), j.at("raw").get<double>(),
                    j.at("standard_error").get<double>()};
}

nlohmann::json to_json(const StabilityReport& r) {
  nlohmann::json j = {{"n", r.n},
                      {"k", r.k},
                      {"m", r.m},
                      {"gamma_ms", to_json(r.gamma_ms)},
                      {"gamma_loss", to_json(r.gamma_loss)},
                      {"gamma_4", to_json(r.gamma_4)},
                      {"sigma2", to_json(r.sigma2)},
                      {"sigma2_tilde", to_json(r.sigma2_tilde)},
                      {"cond_var_mean", to_json(r.cond_var_mean)},
                      {"variance_ratio", nullptr},
                      {"mc_replicates", r.mc_replicates},
                      {"warnings", r.warnings}};
  if (r.variance_ratio) j["variance_ratio"] = to_json(*r.variance_ratio);
  return j;
}

StabilityReport stability_report_from_json(const nlohmann::json& j) {
  StabilityReport r;
  r.n = j.at("n").get<std::size_t>();
  r.k = j.at("k").get<std::size_t>();
  r.m = j.at("m").get<std::size_t>();
  r.gamma_ms = mc_estimate_from_json(j.at("gamma_ms"));
  r.gamma_loss = mc_estimate_from_json(j.at("gamma_loss"));
  r.gamma_4 = mc_estimate_from_json(j.at("gamma_4"));
  r.sigma2 = mc_estimate_from_json(j.at("sigma2"));
  r.sigma2_tilde = mc_estimate_from_json(j.at("sigma2_tilde"));
  r.cond_var_mean = mc_estimate_from_json(j.at("cond_var_mean"));
  if (j.contains("variance_ratio") && !j.at("variance_ratio").is_null()) {
    r.variance_ratio = mc_estimate_from_json(j.at("variance_ratio"));
  }
  r.mc_replicates = j.at("mc_replicates").get<std::size_t>();
  r.warnings = j.value("warnings", std::vector<std::string>{});
  return r;
}

}  // namespace cvinfer
