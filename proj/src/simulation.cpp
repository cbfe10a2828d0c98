#include "cvinfer/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "cvinfer/error.hpp"
#include "cvinfer/numeric.hpp"
#include "cvinfer/parallel.hpp"
#include "cvinfer/quantiles.hpp"

namespace cvinfer {

WilsonInterval wilson_interval(std::size_t successes, std::size_t trials, double conf) {
  if (trials == 0) throw Error(ErrorCode::invalid_input, "Wilson interval needs trials >= 1");
  if (successes > trials) throw Error(ErrorCode::invalid_input, "successes exceed trials");
  if (!(conf > 0.0 && conf < 1.0)) {
    throw Error(ErrorCode::invalid_probability, "confidence must lie in (0, 1)");
  }
  const double z = normal_quantile(0.5 * (1.0 + conf));
  const auto t = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / t;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / t;
  const double centre = (p + z2 / (2.0 * t)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / t + z2 / (4.0 * t * t)) / denom;
  WilsonInterval w{std::max(0.0, centre - half), std::min(1.0, centre + half)};
  if (successes == 0) w.low = 0.0;
  if (successes == trials) w.high = 1.0;
  return w;
}

std::string ProcedureSpec::name() const {
  if (!label.empty()) return label;
  if (kind == "clt") return estimator == Estimator::within ? "clt_in" : "clt_out";
  return kind;
}

namespace {

const std::set<std::string> kKinds = {"clt",         "holdout",
                                      "cv_ttest",    "repeated_tv",
                                      "corrected_repeated_tv", "five_by_two",
                                      "custom"};

std::size_t repeated_count(const ProcedureSpec& p) {
  return p.repetitions ? p.repetitions : 10;
}

std::size_t five_by_two_count(const ProcedureSpec& p) {
  return p.repetitions ? p.repetitions : 5;
}

}  // namespace

ProcedureSpec procedure_from_json(const nlohmann::json& j) {
  ProcedureSpec p;
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "clt_in" || s == "clt_out") {
      p.kind = "clt";
      p.estimator = s == "clt_in" ? Estimator::within : Estimator::out;
    } else {
      p.kind = s;
    }
  } else {
    p.kind = j.at("kind").get<std::string>();
    if (j.contains("estimator")) p.estimator = estimator_from_string(j.at("estimator"));
    p.repetitions = j.value("repetitions", std::size_t{0});
    p.holdout_fraction = j.value("holdout_fraction", 0.1);
    p.label = j.value("label", std::string{});
  }
  if (!kKinds.count(p.kind) || p.kind == "custom") {
    throw Error(ErrorCode::invalid_configuration, "unknown procedure \"" + p.kind + "\"");
  }
  return p;
}

nlohmann::json to_json(const ProcedureSpec& p) {
  nlohmann::json j = {{"kind", p.kind}, {"label", p.name()}};
  if (p.kind == "clt") j["estimator"] = to_string(p.estimator);
  if (p.kind == "repeated_tv" || p.kind == "corrected_repeated_tv") {
    j["repetitions"] = repeated_count(p);
    j["holdout_fraction"] = p.holdout_fraction;
  }
  if (p.kind == "five_by_two") j["repetitions"] = five_by_two_count(p);
  return j;
}

void ExperimentPlan::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::invalid_configuration, m); };
  if (procedures.empty()) fail("plan lists no procedures");
  if (sample_sizes.empty()) fail("plan lists no sample sizes");
  for (std::size_t i = 1; i < sample_sizes.size(); ++i) {
    if (sample_sizes[i] <= sample_sizes[i - 1]) fail("sample sizes must be strictly ascending");
  }
  if (replications < 1) fail("replications must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::invalid_probability, "alpha must lie in (0, 1)");
  }
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw Error(ErrorCode::invalid_probability, "confidence must lie in (0, 1)");
  }
  if (k < 2 || k > sample_sizes.front()) fail("need 2 <= k <= smallest sample size");
  if (mode == ExperimentMode::test_size_power && !comparison.second) {
    fail("size/power experiments need a comparison of two algorithms");
  }
  if (both_directions && mode != ExperimentMode::test_size_power) {
    fail("both_directions applies to size/power experiments only");
  }
  std::set<std::string> names;
  for (const auto& p : procedures) {
    if (!kKinds.count(p.kind)) fail("unknown procedure \"" + p.kind + "\"");
    if (p.kind == "custom" && !p.custom) fail("custom procedure without a callback");
    if (!names.insert(p.name()).second) fail("duplicate procedure label \"" + p.name() + "\"");
  }
}

ExperimentPlan plan_from_json(const nlohmann::json& j) {
  ExperimentPlan plan;
  plan.task = j.at("task");
  plan.comparison = comparison_from_json(j.at("comparison"));
  for (const auto& p : j.at("procedures")) plan.procedures.push_back(procedure_from_json(p));
  plan.sample_sizes = j.at("sample_sizes").get<std::vector<std::size_t>>();
  plan.replications = j.value("replications", plan.replications);
  plan.alpha = j.value("alpha", plan.alpha);
  plan.seed = j.value("seed", plan.seed);
  if (j.contains("mode")) plan.mode = experiment_mode_from_string(j.at("mode"));
  plan.k = j.value("k", plan.k);
  plan.n_mc = j.value("n_mc", plan.n_mc);
  plan.workers = j.value("workers", plan.workers);
  plan.both_directions = j.value("both_directions", plan.both_directions);
  plan.confidence = j.value("confidence", plan.confidence);
  plan.min_class_size = j.value("min_class_size", plan.min_class_size);
  make_generator(plan.task);
  plan.validate();
  return plan;
}

nlohmann::json to_json(const ExperimentPlan& plan) {
  nlohmann::json procs = nlohmann::json::array();
  for (const auto& p : plan.procedures) procs.push_back(to_json(p));
  return {{"task", plan.task},
          {"comparison", to_json(plan.comparison)},
          {"procedures", procs},
          {"sample_sizes", plan.sample_sizes},
          {"replications", plan.replications},
          {"alpha", plan.alpha},
          {"seed", plan.seed},
          {"mode", to_string(plan.mode)},
          {"k", plan.k},
          {"n_mc", plan.n_mc},
          {"both_directions", plan.both_directions},
          {"confidence", plan.confidence},
          {"min_class_size", plan.min_class_size}};
}

namespace {

struct Record {
  double target = 0.0;
  double width = 0.0;
  bool hit = false;
  bool reject = false;
  bool inconclusive = false;
};

// Fitted splits shared by several procedures, with each split's own risk.
struct Group {
  std::vector<std::shared_ptr<const SplitFit>> fits;
  std::vector<double> risks;

  std::vector<double> means(double sign) const {
    std::vector<double> out;
    for (const auto& f : fits) out.push_back(sign * f->mean_loss());
    return out;
  }
  double mean_risk(double sign) const { return sign * mean(risks); }
};

struct Replication {
  const ExperimentPlan& plan;
  const Generator& task;
  std::size_t n;
  std::uint64_t risk_seed;
  std::vector<std::string>& warnings;

  void score(Group& g) {
    g.risks.clear();
    const double one = 1.0;
    for (const auto& f : g.fits) {
      auto r = true_risk_oracle(std::span<const std::shared_ptr<const SplitFit>>(&f, 1),
                                std::span<const double>(&one, 1), task, plan.comparison.loss,
                                plan.n_mc, risk_seed);
      for (auto& w : r.warnings) {
        if (std::find(warnings.begin(), warnings.end(), w) == warnings.end()) {
          warnings.push_back(std::move(w));
        }
      }
      g.risks.push_back(r.value);
    }
  }

  Group fit_group(const Dataset& data, const std::vector<Fold>& splits) {
    Group g;
    for (const auto& s : splits) {
      g.fits.push_back(std::make_shared<const SplitFit>(
          fit_split(data, s.train, s.validation, plan.comparison)));
    }
    score(g);
    return g;
  }
};

Record make_record(const InferenceResult& r, double target) {
  Record rec;
  rec.target = target;
  rec.width = r.ci_high - r.ci_low;
  rec.hit = r.ci_low <= target && target <= r.ci_high;
  rec.reject = r.decision == Decision::reject;
  rec.inconclusive = r.decision == Decision::inconclusive;
  return rec;
}

RateSummary rate(std::size_t successes, std::size_t trials, double conf) {
  RateSummary s;
  s.successes = successes;
  s.trials = trials;
  s.rate = static_cast<double>(successes) / static_cast<double>(trials);
  s.interval = wilson_interval(successes, trials, conf);
  return s;
}

PointSummary summarize_point(const ExperimentPlan& plan, const std::string& name,
                             const std::string& direction, std::size_t n,
                             const std::vector<Record>& recs) {
  PointSummary p;
  p.procedure = name;
  p.direction = direction;
  p.n = n;
  p.replications = recs.size();
  std::vector<double> targets, widths;
  for (const auto& r : recs) {
    targets.push_back(r.target);
    widths.push_back(r.width);
  }
  p.mean_target = mean(targets);
  if (plan.mode == ExperimentMode::ci_coverage) {
    const auto hits = static_cast<std::size_t>(
        std::count_if(recs.begin(), recs.end(), [](const Record& r) { return r.hit; }));
    p.coverage = rate(hits, recs.size(), plan.confidence);
    p.mean_width = mean(widths);
    p.width_se = std::sqrt(sample_variance(widths) / static_cast<double>(widths.size()));
    return p;
  }
  std::size_t rejections = 0, h0_rej = 0, h1_rej = 0;
  for (const auto& r : recs) {
    const bool h0 = r.target >= 0.0;
    (h0 ? p.h0_count : p.h1_count) += 1;
    if (r.inconclusive) ++p.inconclusive;
    if (r.reject) {
      ++rejections;
      (h0 ? h0_rej : h1_rej) += 1;
    }
  }
  p.rejection = rate(rejections, recs.size(), plan.confidence);
  if (p.h0_count >= plan.min_class_size) p.size = rate(h0_rej, p.h0_count, plan.confidence);
  if (p.h1_count >= plan.min_class_size) p.power = rate(h1_rej, p.h1_count, plan.confidence);
  return p;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentPlan& plan) {
  plan.validate();
  const auto task = make_generator(plan.task);
  const std::size_t procs = plan.procedures.size();
  const bool reversed = plan.both_directions;
  const std::size_t directions = reversed ? 2 : 1;

  bool need_repeated = false, need_5x2 = false;
  for (const auto& p : plan.procedures) {
    need_repeated |= p.kind == "repeated_tv" || p.kind == "corrected_repeated_tv";
    need_5x2 |= p.kind == "five_by_two";
  }

  ExperimentResult result;
  result.mode = plan.mode;
  for (std::size_t n : plan.sample_sizes) {
    const std::size_t reps = plan.replications;
    // records[(r * directions + d) * procs + p]
    std::vector<Record> records(reps * directions * procs);
    std::vector<std::vector<std::string>> rep_warnings(reps);
    const std::uint64_t size_seed = derive_seed(plan.seed, n);

    parallel_for(reps, plan.workers, [&](std::size_t r) {
      try {
        Rng rng(derive_seed(size_seed, r));
        const Dataset data = task->sample(n, rng);
        const std::uint64_t partition_seed = rng.next();
        const std::uint64_t split_seed = rng.next();
        const std::uint64_t halving_seed = rng.next();
        const std::uint64_t risk_seed = rng.next();
        const std::uint64_t custom_seed = rng.next();

        Replication rep{plan, *task, n, risk_seed, rep_warnings[r]};
        const CvRun cv = run_cv(data, make_partition(n, plan.k, partition_seed, true),
                                plan.comparison);
        Group cv_group;
        for (const auto& f : cv.fits) cv_group.fits.push_back(std::make_shared<const SplitFit>(f));
        rep.score(cv_group);
        double cv_target = 0.0;
        for (std::size_t j = 0; j < cv.fits.size(); ++j) {
          cv_target += static_cast<double>(cv.fits[j].validation.size()) /
                       static_cast<double>(n) * cv_group.risks[j];
        }

        std::map<std::pair<std::size_t, double>, Group> repeated;
        std::map<std::size_t, Group> halvings;
        if (need_repeated || need_5x2) {
          for (const auto& p : plan.procedures) {
            if (p.kind == "repeated_tv" || p.kind == "corrected_repeated_tv") {
              const auto key = std::make_pair(repeated_count(p), p.holdout_fraction);
              if (!repeated.count(key)) {
                repeated.emplace(key, rep.fit_group(data, random_splits(n, key.first, key.second,
                                                                        split_seed)));
              }
            } else if (p.kind == "five_by_two") {
              const auto reps5 = five_by_two_count(p);
              if (!halvings.count(reps5)) {
                halvings.emplace(reps5,
                                 rep.fit_group(data, five_by_two_splits(n, reps5, halving_seed)));
              }
            }
          }
        }

        const LossMatrix negated = cv.losses.negated();
        for (std::size_t d = 0; d < directions; ++d) {
          const double sign = d == 0 ? 1.0 : -1.0;
          for (std::size_t pi = 0; pi < procs; ++pi) {
            const auto& p = plan.procedures[pi];
            ScoredResult s;
            if (p.kind == "clt") {
              s.result = clt_confidence_interval(d == 0 ? cv.losses : negated, p.estimator,
                                                 plan.alpha);
              s.target = sign * cv_target;
            } else if (p.kind == "cv_ttest") {
              std::vector<double> means(cv.fold_means);
              for (auto& v : means) v *= sign;
              s.result = cv_ttest_inference(means, sign * cv.r_hat, n, plan.alpha);
              s.target = sign * cv_target;
            } else if (p.kind == "holdout") {
              std::vector<double> losses(cv.fits[0].losses);
              for (auto& v : losses) v *= sign;
              const double f = static_cast<double>(losses.size()) / static_cast<double>(n);
              s.result = holdout_inference(losses, n, f, plan.alpha);
              s.target = sign * cv_group.risks[0];
            } else if (p.kind == "repeated_tv" || p.kind == "corrected_repeated_tv") {
              const auto& g = repeated.at({repeated_count(p), p.holdout_fraction});
              s.result = repeated_tv_inference(g.means(sign), n, p.holdout_fraction,
                                               p.kind == "corrected_repeated_tv", plan.alpha);
              s.target = g.mean_risk(sign);
            } else if (p.kind == "five_by_two") {
              const auto& g = halvings.at(five_by_two_count(p));
              const auto means = g.means(sign);
              std::vector<double> first, second;
              for (std::size_t j = 0; j + 1 < means.size(); j += 2) {
                first.push_back(means[j]);
                second.push_back(means[j + 1]);
              }
              s.result = five_by_two_inference(first, second, n, plan.alpha);
              s.target = g.mean_risk(sign);
            } else {
              if (d == 1) continue;
              const ReplicationContext ctx{data, *task, plan.comparison, cv, r, plan.alpha,
                                           derive_seed(custom_seed, pi)};
              s = p.custom(ctx);
            }
            records[(r * directions + d) * procs + pi] = make_record(s.result, s.target);
          }
        }
      } catch (const Error& e) {
        throw Error(e.code(), "replication " + std::to_string(r) + " (n = " + std::to_string(n) +
                                  "): " + e.what());
      }
    });

    for (auto& ws : rep_warnings) {
      for (auto& w : ws) {
        if (std::find(result.warnings.begin(), result.warnings.end(), w) ==
            result.warnings.end()) {
          result.warnings.push_back(std::move(w));
        }
      }
    }
    for (std::size_t d = 0; d < directions; ++d) {
      for (std::size_t pi = 0; pi < procs; ++pi) {
        if (d == 1 && plan.procedures[pi].kind == "custom") continue;
        std::vector<Record> recs(reps);
        for (std::size_t r = 0; r < reps; ++r) recs[r] = records[(r * directions + d) * procs + pi];
        result.points.push_back(summarize_point(plan, plan.procedures[pi].name(),
                                                d == 0 ? "forward" : "reversed", n, recs));
      }
    }
  }
  return result;
}

ExperimentResult run_coverage_experiment(ExperimentPlan plan) {
  plan.mode = ExperimentMode::ci_coverage;
  plan.both_directions = false;
  return run_experiment(plan);
}

ExperimentResult run_test_experiment(ExperimentPlan plan) {
  plan.mode = ExperimentMode::test_size_power;
  return run_experiment(plan);
}

const PointSummary& ExperimentResult::at(const std::string& procedure, std::size_t n,
                                         const std::string& direction) const {
  for (const auto& p : points) {
    if (p.procedure == procedure && p.n == n && p.direction == direction) return p;
  }
  throw Error(ErrorCode::invalid_input, "no result for " + procedure + " at n = " +
                                            std::to_string(n) + " (" + direction + ")");
}

namespace {

nlohmann::json to_json(const RateSummary& s) {
  return {{"successes", s.successes}, {"trials", s.trials}, {"rate", s.rate},
          {"low", s.interval.low},    {"high", s.interval.high}};
}

RateSummary rate_from_json(const nlohmann::json& j) {
  RateSummary s;
  s.successes = j.at("successes").get<std::size_t>();
  s.trials = j.at("trials").get<std::size_t>();
  s.rate = j.at("rate").get<double>();
  s.interval = {j.at("low").get<double>(), j.at("high").get<double>()};
  return s;
}

nlohmann::json optional_rate(const std::optional<RateSummary>& s) {
  return s ? to_json(*s) : nlohmann::json(nullptr);
}

std::optional<RateSummary> optional_rate_from_json(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return rate_from_json(j.at(key));
}

std::string series_key(const PointSummary& p) {
  return p.direction == "forward" ? p.procedure : p.procedure + ":" + p.direction;
}

}  // namespace

nlohmann::json to_json(const ExperimentResult& r) {
  nlohmann::json points = nlohmann::json::array();
  // Plot-ready arrays: series[label][metric] = {n: [...], value: [...], ...}
  nlohmann::json series = nlohmann::json::object();
  auto push = [&](const PointSummary& p, const std::string& metric, double value, double low,
                  double high) {
    auto& s = series[series_key(p)][metric];
    s["n"].push_back(p.n);
    s["value"].push_back(value);
    s["low"].push_back(low);
    s["high"].push_back(high);
  };
  for (const auto& p : r.points) {
    points.push_back({{"procedure", p.procedure},
                      {"direction", p.direction},
                      {"n", p.n},
                      {"replications", p.replications},
                      {"mean_target", p.mean_target},
                      {"coverage", optional_rate(p.coverage)},
                      {"mean_width", p.mean_width},
                      {"width_se", p.width_se},
                      {"h0_count", p.h0_count},
                      {"h1_count", p.h1_count},
                      {"inconclusive", p.inconclusive},
                      {"rejection", optional_rate(p.rejection)},
                      {"size", optional_rate(p.size)},
                      {"power", optional_rate(p.power)}});
    if (p.coverage) {
      push(p, "coverage", p.coverage->rate, p.coverage->interval.low, p.coverage->interval.high);
      push(p, "mean_width", p.mean_width, p.mean_width - 2.0 * p.width_se,
           p.mean_width + 2.0 * p.width_se);
    }
    if (p.size) push(p, "size", p.size->rate, p.size->interval.low, p.size->interval.high);
    if (p.power) push(p, "power", p.power->rate, p.power->interval.low, p.power->interval.high);
  }
  return {{"mode", to_string(r.mode)},
          {"points", points},
          {"series", series},
          {"warnings", r.warnings}};
}

ExperimentResult experiment_result_from_json(const nlohmann::json& j) {
  ExperimentResult r;
  r.mode = experiment_mode_from_string(j.at("mode"));
  for (const auto& pj : j.at("points")) {
    PointSummary p;
    p.procedure = pj.at("procedure").get<std::string>();
    p.direction = pj.at("direction").get<std::string>();
    p.n = pj.at("n").get<std::size_t>();
    p.replications = pj.at("replications").get<std::size_t>();
    p.mean_target = pj.at("mean_target").get<double>();
    p.coverage = optional_rate_from_json(pj, "coverage");
    p.mean_width = pj.at("mean_width").get<double>();
    p.width_se = pj.at("width_se").get<double>();
    p.h0_count = pj.at("h0_count").get<std::size_t>();
    p.h1_count = pj.at("h1_count").get<std::size_t>();
    p.inconclusive = pj.at("inconclusive").get<std::size_t>();
    p.rejection = optional_rate_from_json(pj, "rejection");
    p.size = optional_rate_from_json(pj, "size");
    p.power = optional_rate_from_json(pj, "power");
    r.points.push_back(std::move(p));
  }
  r.warnings = j.value("warnings", std::vector<std::string>{});
  return r;
}

std::string to_long_csv(const ExperimentResult& r) {
  std::ostringstream out;
  out << "procedure,n,metric,value,low,high\n";
  auto row = [&](const PointSummary& p, const char* metric, double v, double lo, double hi) {
    char buf[160];
    std::snprintf(buf, sizeof buf, ",%zu,%s,%.17g,%.17g,%.17g\n", p.n, metric, v, lo, hi);
    out << series_key(p) << buf;
  };
  for (const auto& p : r.points) {
    if (p.coverage) {
      row(p, "coverage", p.coverage->rate, p.coverage->interval.low, p.coverage->interval.high);
      row(p, "mean_width", p.mean_width, p.mean_width - 2.0 * p.width_se,
          p.mean_width + 2.0 * p.width_se);
    }
    if (p.size) row(p, "size", p.size->rate, p.size->interval.low, p.size->interval.high);
    if (p.power) row(p, "power", p.power->rate, p.power->interval.low, p.power->interval.high);
  }
  return out.str();
}

std::string to_string(ExperimentMode mode) {
  return mode == ExperimentMode::ci_coverage ? "ci_coverage" : "test_size_power";
}

ExperimentMode experiment_mode_from_string(const std::string& name) {
  if (name == "ci_coverage") return ExperimentMode::ci_coverage;
  if (name == "test_size_power") return ExperimentMode::test_size_power;
  throw Error(ErrorCode::invalid_configuration, "unknown experiment mode \"" + name + "\"");
}

}  // namespace cvinfer
