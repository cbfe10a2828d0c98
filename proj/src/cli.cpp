#include "cvinfer/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include "cvinfer/baselines.hpp"
#include "cvinfer/cv.hpp"
#include "cvinfer/error.hpp"
#include "cvinfer/estimators.hpp"
#include "cvinfer/inference.hpp"
#include "cvinfer/io.hpp"
#include "cvinfer/learners.hpp"
#include "cvinfer/simulation.hpp"
#include "cvinfer/stability.hpp"

namespace cvinfer {

namespace {

// CVINFER_LOG: 0 silent, 1 warnings (default), 2 progress.
int log_level() {
  const char* v = std::getenv("CVINFER_LOG");
  if (!v || !*v) return 1;
  return std::atoi(v);
}

void log_at(int level, std::ostream& err, const std::string& msg) {
  if (log_level() >= level) err << "cvinfer: " << msg << "\n";
}

struct Options {
  std::string data, loss_matrix, plan, task;
  std::string algo, algo1, algo2, loss = "squared_error";
  std::string estimator = "out";
  std::string kind;
  std::string out, losses_out, emit_csv;
  double alpha = 0.05;
  double lambda = 1.0;
  double holdout_fraction = 0.1;
  std::size_t k = 10;
  std::size_t n = 0;
  std::size_t repetitions = 0;
  std::size_t workers = 1;
  std::optional<std::uint64_t> seed;
  bool shuffle = false;
  bool classification = false;
  StabilityOptions stab;
};

nlohmann::json parse_json_arg(const std::string& text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::invalid_configuration, "bad JSON argument: " + std::string(e.what()));
  }
}

// An algorithm is a bare name ("ridge") or a JSON object ({"algo": "ridge", ...}).
AlgorithmSpec algorithm_arg(const std::string& text) {
  if (!text.empty() && text.front() == '{') return algorithm_from_json(parse_json_arg(text));
  return algorithm_from_json(nlohmann::json{{"algo", text}});
}

LossFunction loss_arg(const std::string& text) {
  if (!text.empty() && text.front() == '{') return loss_from_json(parse_json_arg(text));
  return loss_from_json(nlohmann::json(text));
}

Comparison comparison_arg(const Options& o) {
  Comparison cmp;
  cmp.loss = loss_arg(o.loss);
  if (!o.algo.empty()) {
    if (!o.algo1.empty() || !o.algo2.empty()) {
      throw Error(ErrorCode::usage, "give either --algo or --algo1/--algo2");
    }
    cmp.first = algorithm_arg(o.algo);
  } else if (!o.algo1.empty() && !o.algo2.empty()) {
    cmp.first = algorithm_arg(o.algo1);
    cmp.second = algorithm_arg(o.algo2);
  } else {
    throw Error(ErrorCode::usage, "an algorithm is required (--algo, or --algo1 and --algo2)");
  }
  return cmp;
}

std::uint64_t fresh_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

class Runner {
 public:
  Runner(Options& o, std::ostream& out, std::ostream& err) : o_(o), out_(out), err_(err) {}

  void set_command(std::string name) { command_ = std::move(name); }

  std::uint64_t seed() {
    if (!o_.seed) o_.seed = fresh_seed();
    return *o_.seed;
  }

  nlohmann::json meta(nlohmann::json config) {
    return {{"tool", "cvinfer"},
            {"version", kToolVersion},
            {"command", command_},
            {"seed", seed()},
            {"config", std::move(config)}};
  }

  void emit(nlohmann::json body, nlohmann::json config) {
    body["meta"] = meta(std::move(config));
    if (body.contains("warnings")) {
      for (const auto& w : body["warnings"]) log_at(1, err_, "warning: " + w.get<std::string>());
    }
    const std::string text = body.dump(2) + "\n";
    if (o_.out.empty()) {
      out_ << text;
    } else {
      write_text_file(o_.out, text);
    }
  }

  Dataset data() const {
    return read_dataset_csv(o_.data,
                            o_.classification ? TargetKind::classification : TargetKind::regression);
  }

  nlohmann::json common_config() const {
    nlohmann::json c;
    if (!o_.data.empty()) c["data"] = o_.data;
    if (!o_.loss_matrix.empty()) c["loss_matrix"] = o_.loss_matrix;
    return c;
  }

  int cv(bool compare) {
    if (compare && (o_.algo1.empty() || o_.algo2.empty())) {
      throw Error(ErrorCode::usage, "cv compare needs --algo1 and --algo2");
    }
    const Comparison cmp = comparison_arg(o_);
    const Dataset d = data();
    const auto partition = make_partition(d.size(), o_.k, seed(), o_.shuffle);
    const CvRun run = run_cv(d, partition, cmp, o_.workers);
    if (!o_.losses_out.empty()) write_text_file(o_.losses_out, format_loss_matrix_csv(run.losses));
    auto config = common_config();
    config.update({{"comparison", to_json(cmp)}, {"k", o_.k}, {"shuffle", o_.shuffle},
                   {"losses_out", o_.losses_out}});
    emit(summarize(run), config);
    return 0;
  }

  LossMatrix loss_matrix(LossKind kind) const { return read_loss_matrix_csv(o_.loss_matrix, kind); }

  int estimate() {
    const auto m = loss_matrix(LossKind::plain);
    const auto est = estimate_variance(m, estimator_from_string(o_.estimator));
    auto config = common_config();
    config["estimator"] = o_.estimator;
    emit(to_json(est), config);
    return 0;
  }

  int infer(bool test) {
    const auto which = estimator_from_string(o_.estimator);
    auto config = common_config();
    config.update({{"estimator", o_.estimator}, {"alpha", o_.alpha}});
    if (!test) {
      emit(to_json(clt_confidence_interval(loss_matrix(LossKind::plain), which, o_.alpha)),
           config);
      return 0;
    }
    const auto result = clt_improvement_test(loss_matrix(LossKind::difference), which, o_.alpha);
    emit(to_json(result), config);
    return result.decision == Decision::reject ? 1 : 0;
  }

  int baseline() {
    BaselineSpec spec = BaselineSpec::defaults(baseline_kind_from_string(o_.kind), seed());
    if (o_.repetitions) spec.repetitions = o_.repetitions;
    spec.holdout_fraction = o_.holdout_fraction;
    const Comparison cmp = comparison_arg(o_);
    const auto outcome = run_baseline(data(), cmp, spec, o_.alpha);
    auto body = to_json(outcome.result);
    body["splits"] = outcome.splits.size();
    body["target_weights"] = outcome.target_weights;
    auto config = common_config();
    config.update({{"kind", o_.kind}, {"comparison", to_json(cmp)}, {"alpha", o_.alpha},
                   {"repetitions", spec.repetitions},
                   {"holdout_fraction", spec.holdout_fraction}});
    emit(body, config);
    return 0;
  }

  nlohmann::json task_arg() const {
    if (o_.task.empty()) throw Error(ErrorCode::usage, "--task is required");
    if (o_.task.front() == '{') return parse_json_arg(o_.task);
    return read_json_file(o_.task);
  }

  int diagnose() {
    const auto task_json = task_arg();
    const auto task = make_generator(task_json);
    const Comparison cmp = comparison_arg(o_);
    if (o_.n == 0) throw Error(ErrorCode::usage, "--n is required");
    o_.stab.seed = seed();
    o_.stab.workers = o_.workers;
    log_at(2, err_, "estimating stability functionals");
    const auto report = stability_report(*task, cmp, o_.n, o_.k, o_.stab);
    nlohmann::json config = {{"task", task_json},
                             {"comparison", to_json(cmp)},
                             {"n", o_.n},
                             {"k", o_.k},
                             {"replicates", o_.stab.replicates},
                             {"inner", o_.stab.inner},
                             {"exhaustive", o_.stab.exhaustive},
                             {"batches", o_.stab.batches},
                             {"train_sets", o_.stab.train_sets},
                             {"test_points", o_.stab.test_points},
                             {"outer_reps", o_.stab.outer_reps},
                             {"n_mc", o_.stab.n_mc}};
    emit(to_json(report), config);
    return 0;
  }

  int simulate() {
    auto plan_json = read_json_file(o_.plan);
    if (o_.seed) {
      plan_json["seed"] = *o_.seed;
    } else if (plan_json.contains("seed")) {
      o_.seed = plan_json.at("seed").get<std::uint64_t>();
    } else {
      plan_json["seed"] = seed();
    }
    ExperimentPlan plan = plan_from_json(plan_json);
    plan.workers = o_.workers;
    log_at(2, err_, "running " + std::to_string(plan.replications) + " replications per size");
    const auto result = run_experiment(plan);
    if (!o_.emit_csv.empty()) write_text_file(o_.emit_csv, to_long_csv(result));
    auto config = to_json(plan);
    config["plan_file"] = o_.plan;
    emit(to_json(result), config);
    return 0;
  }

  int loocv_ridge() {
    const Dataset d = data();
    const auto m = ridge_loocv_losses(d, o_.lambda);
    if (!o_.losses_out.empty()) write_text_file(o_.losses_out, format_loss_matrix_csv(m));
    auto config = common_config();
    config.update({{"lambda", o_.lambda}, {"losses_out", o_.losses_out}});
    emit({{"r_hat", cv_error(m)}, {"k", m.k()}, {"n", m.n()}, {"loss_kind", "plain"}}, config);
    return 0;
  }

 private:
  Options& o_;
  std::ostream& out_;
  std::ostream& err_;
  std::string command_;
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Inference for cross-validation error", "cvinfer"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  auto existing = CLI::ExistingFile;
  auto add_seed = [&](CLI::App* c) {
    c->add_option("--seed", o.seed, "Master seed (generated and recorded when omitted)");
  };
  auto add_out = [&](CLI::App* c) { c->add_option("--out", o.out, "Write JSON here instead of stdout"); };
  auto add_algos = [&](CLI::App* c) {
    c->add_option("--algo", o.algo, "Algorithm name or JSON object");
    c->add_option("--algo1", o.algo1, "First algorithm of a comparison");
    c->add_option("--algo2", o.algo2, "Second algorithm of a comparison");
    c->add_option("--loss", o.loss, "squared_error, zero_one or JSON");
  };
  auto add_data = [&](CLI::App* c) {
    c->add_option("--data", o.data, "Dataset CSV (x1..xp,y)")->required()->check(existing);
    c->add_flag("--classification", o.classification, "Targets are 0/1 labels");
  };

  auto* cv = app.add_subcommand("cv", "k-fold cross-validation");
  cv->require_subcommand(1);
  auto* cv_run = cv->add_subcommand("run", "Cross-validate one algorithm");
  auto* cv_compare = cv->add_subcommand("compare", "Cross-validate a loss difference");
  for (auto* c : {cv_run, cv_compare}) {
    add_data(c);
    add_algos(c);
    c->add_option("--k", o.k, "Number of folds");
    c->add_flag("--shuffle", o.shuffle, "Assign folds after a seeded shuffle");
    c->add_option("--workers", o.workers, "Threads for fold fitting");
    c->add_option("--losses-out", o.losses_out, "Write the loss matrix CSV here");
    add_seed(c);
    add_out(c);
  }

  auto* est = app.add_subcommand("estimate", "Variance estimate from a loss matrix");
  est->add_option("--loss-matrix", o.loss_matrix, "index,fold,loss CSV")->required()->check(existing);
  est->add_option("--estimator", o.estimator, "in or out")
      ->check(CLI::IsMember({"in", "out"}));
  add_seed(est);
  add_out(est);

  auto* infer = app.add_subcommand("infer", "Confidence interval or improvement test");
  infer->require_subcommand(1);
  auto* infer_ci = infer->add_subcommand("ci", "Two-sided CLT interval");
  auto* infer_test = infer->add_subcommand("test", "One-sided test of R < 0 on a difference matrix");
  for (auto* c : {infer_ci, infer_test}) {
    c->add_option("--loss-matrix", o.loss_matrix, "index,fold,loss CSV")->required()->check(existing);
    c->add_option("--estimator", o.estimator, "in or out")->check(CLI::IsMember({"in", "out"}));
    c->add_option("--alpha", o.alpha, "Level");
    add_seed(c);
    add_out(c);
  }

  auto* base = app.add_subcommand("baseline", "Run a comparison procedure");
  base->add_option("--kind", o.kind, "holdout, cv_ttest, repeated_tv, corrected_repeated_tv, five_by_two")
      ->required();
  add_data(base);
  add_algos(base);
  base->add_option("--alpha", o.alpha, "Level");
  base->add_option("--repetitions", o.repetitions, "Folds, splits or replicates");
  base->add_option("--holdout-fraction", o.holdout_fraction, "Validation share");
  add_seed(base);
  add_out(base);

  auto* diag = app.add_subcommand("diagnose", "Stability diagnostics");
  diag->require_subcommand(1);
  auto* stab = diag->add_subcommand("stability", "Monte Carlo stability report");
  stab->add_option("--task", o.task, "Task JSON or path to a JSON file")->required();
  add_algos(stab);
  stab->add_option("--n", o.n, "Sample size")->required();
  stab->add_option("--k", o.k, "Number of folds");
  stab->add_option("--replicates", o.stab.replicates, "Swap replicates");
  stab->add_option("--inner", o.stab.inner, "Test points per swap replicate");
  stab->add_flag("--exhaustive", o.stab.exhaustive, "Average over every swap index");
  stab->add_option("--batches", o.stab.batches, "Batches for variance parameters");
  stab->add_option("--train-sets", o.stab.train_sets, "Training sets per batch");
  stab->add_option("--test-points", o.stab.test_points, "Test points per batch");
  stab->add_option("--outer-reps", o.stab.outer_reps, "CV runs for the variance ratio (0 skips)");
  stab->add_option("--n-mc", o.stab.n_mc, "Monte Carlo points for the target");
  stab->add_option("--workers", o.workers, "Threads");
  add_seed(stab);
  add_out(stab);

  auto* sim = app.add_subcommand("simulate", "Run an experiment plan");
  sim->add_option("--plan", o.plan, "Plan JSON")->required()->check(existing);
  sim->add_option("--emit-csv", o.emit_csv, "Also write long-format CSV here");
  sim->add_option("--workers", o.workers, "Threads");
  add_seed(sim);
  add_out(sim);

  auto* loocv = app.add_subcommand("loocv-ridge", "Closed-form leave-one-out losses of ridge");
  add_data(loocv);
  loocv->add_option("--lambda", o.lambda, "Ridge penalty");
  loocv->add_option("--losses-out", o.losses_out, "Write the loss matrix CSV here");
  add_seed(loocv);
  add_out(loocv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    app.exit(e, err, err);
    return 2;
  }

  Runner runner(o, out, err);
  try {
    if (cv_run->parsed()) {
      runner.set_command("cv run");
      return runner.cv(false);
    }
    if (cv_compare->parsed()) {
      runner.set_command("cv compare");
      return runner.cv(true);
    }
    if (est->parsed()) {
      runner.set_command("estimate");
      return runner.estimate();
    }
    if (infer_ci->parsed()) {
      runner.set_command("infer ci");
      return runner.infer(false);
    }
    if (infer_test->parsed()) {
      runner.set_command("infer test");
      return runner.infer(true);
    }
    if (base->parsed()) {
      runner.set_command("baseline");
      return runner.baseline();
    }
    if (stab->parsed()) {
      runner.set_command("diagnose stability");
      return runner.diagnose();
    }
    if (sim->parsed()) {
      runner.set_command("simulate");
      return runner.simulate();
    }
    runner.set_command("loocv-ridge");
    return runner.loocv_ridge();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::usage) {
      err << "cvinfer: " << e.what() << "\n";
      return 2;
    }
    out << nlohmann::json{{"error", {{"code", to_string(e.code())}, {"message", e.what()}}}}.dump(2)
        << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    out << nlohmann::json{{"error", {{"code", to_string(ErrorCode::invalid_configuration)},
                                     {"message", e.what()}}}}
               .dump(2)
        << "\n";
    return 1;
  }
}

}  // namespace cvinfer
