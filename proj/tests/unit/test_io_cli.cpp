#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "common.hpp"
#include "cvinfer/cli.hpp"
#include "cvinfer/cv.hpp"
#include "cvinfer/inference.hpp"
#include "cvinfer/io.hpp"
#include "cvinfer/stability.hpp"

namespace fs = std::filesystem;
using namespace cvinfer;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    static int counter = 0;
    dir = fs::temp_directory_path() /
          ("cvinfer_unit_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string file(const std::string& name, const std::string& text) const {
    write_text_file(dir / name, text);
    return (dir / name).string();
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "cvinfer");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string dataset_text() {
  LinearGaussian task({1.0, -1.0}, 0.5);
  Rng rng(3);
  return format_dataset_csv(task.sample(40, rng));
}

}  // namespace

TEST_CASE("dataset CSV round trip") {
  const Dataset d({0.1, -2.5, 1e-300, 3.0}, {1.0 / 3.0, 7.0}, 2);
  const auto text = format_dataset_csv(d);
  CHECK(text.rfind("x1,x2,y\n", 0) == 0);
  const auto back = parse_dataset_csv(text);
  CHECK(back.feature_buffer() == d.feature_buffer());
  CHECK(back.targets() == d.targets());
  CHECK(format_dataset_csv(back) == text);
  CHECK(error_code_of([] { parse_dataset_csv("a,b\n1,2\n"); }) == ErrorCode::invalid_input);
}

TEST_CASE("loss matrix CSV round trip and errors") {
  const LossMatrix m({{0, 1, 0.25}, {1, 0, -1.0 / 7.0}, {2, 1, 3.0}}, 3, 2);
  const auto text = format_loss_matrix_csv(m);
  const auto back = parse_loss_matrix_csv(text);
  CHECK(back.losses() == m.losses());
  CHECK(back.fold_sizes() == m.fold_sizes());
  CHECK(format_loss_matrix_csv(back) == text);
  CHECK(error_code_of([] { parse_loss_matrix_csv("index,fold,loss\n0,0,1\n0,1,2\n"); }) ==
        ErrorCode::malformed_loss_matrix);
  CHECK(error_code_of([] { parse_loss_matrix_csv("index,fold,loss\n0,0,abc\n1,1,2\n"); }) ==
        ErrorCode::malformed_loss_matrix);
  CHECK(error_code_of([] { read_text_file("/nonexistent/cvinfer/file.csv"); }) == ErrorCode::io_error);
}

TEST_CASE("cli: cv, estimate and infer") {
  Scratch s;
  const auto data = s.file("d.csv", dataset_text());
  const auto matrix = s.path("m.csv");
  const auto cv = cli({"cv", "compare", "--data", data, "--algo1", "ridge", "--algo2",
                       R"({"algo":"knn","neighbors":3})", "--k", "5", "--seed", "9", "--losses-out",
                       matrix});
  REQUIRE(cv.code == 0);
  const auto summary = nlohmann::json::parse(cv.out);
  CHECK(summary.at("k") == 5);
  CHECK(summary.at("meta").at("seed") == 9);

  const auto est = cli({"estimate", "--loss-matrix", matrix, "--estimator", "in"});
  REQUIRE(est.code == 0);
  const auto v = variance_estimate_from_json(nlohmann::json::parse(est.out));
  CHECK(v.k == 5);
  CHECK(v.n == 40);

  const auto ci = cli({"infer", "ci", "--loss-matrix", matrix, "--estimator", "out", "--alpha", "0.05"});
  REQUIRE(ci.code == 0);
  const auto r = inference_result_from_json(nlohmann::json::parse(ci.out));
  CHECK(r.ci_low <= r.r_hat);
  CHECK(r.r_hat <= r.ci_high);
  CHECK(r.r_hat == doctest::Approx(summary.at("r_hat").get<double>()));

  const auto test = cli({"infer", "test", "--loss-matrix", matrix, "--estimator", "out"});
  const auto t = inference_result_from_json(nlohmann::json::parse(test.out));
  CHECK(test.code == (t.decision == Decision::reject ? 1 : 0));
}

TEST_CASE("cli: exit codes") {
  const auto missing = cli({"estimate", "--loss-matrix", "/no/such/matrix.csv"});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("/no/such/matrix.csv") != std::string::npos);
  CHECK(cli({"estimate", "--bogus"}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);

  Scratch s;
  // single-point folds make the within-fold estimator undefined
  const auto loo = s.file("loo.csv", "index,fold,loss\n0,0,1\n1,1,2\n2,2,0.5\n");
  const auto bad = cli({"estimate", "--loss-matrix", loo, "--estimator", "in"});
  CHECK(bad.code == 1);
  CHECK(nlohmann::json::parse(bad.out).at("error").at("code") == "within-fold-undefined");

  const auto reject = s.file("neg.csv", "index,fold,loss\n0,0,-1\n1,0,-1.1\n2,1,-0.9\n3,1,-1.05\n");
  CHECK(cli({"infer", "test", "--loss-matrix", reject, "--estimator", "in"}).code == 1);
  const auto keep = s.file("pos.csv", "index,fold,loss\n0,0,1\n1,0,1.1\n2,1,0.9\n3,1,1.05\n");
  CHECK(cli({"infer", "test", "--loss-matrix", keep, "--estimator", "in"}).code == 0);
}

TEST_CASE("cli: simulate is byte-reproducible") {
  Scratch s;
  const auto plan = s.file("plan.json", R"({
    "task": {"kind": "gaussian_location", "mean": 0, "variance": 1},
    "comparison": {"algo": {"algo": "sample_mean"}, "loss": {"kind": "excess_squared", "anchor": 1}},
    "procedures": ["clt_in", "clt_out", "holdout"],
    "sample_sizes": [50, 100], "replications": 20, "k": 5})");
  const auto a = cli({"simulate", "--plan", plan, "--seed", "7", "--out", s.path("a.json")});
  const auto b = cli({"simulate", "--plan", plan, "--seed", "7", "--out", s.path("b.json")});
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  const auto ta = read_text_file(s.path("a.json"));
  CHECK(ta == read_text_file(s.path("b.json")));
  const auto j = nlohmann::json::parse(ta);
  CHECK(j.at("meta").at("seed") == 7);
  CHECK(j.contains("series"));
}

TEST_CASE("cli: every command records a seed and re-parses") {
  Scratch s;
  const auto data = s.file("d.csv", dataset_text());
  const auto matrix = s.file("m.csv", "index,fold,loss\n0,0,1\n1,0,2\n2,1,0.5\n3,1,0.25\n");
  const auto plan = s.file("plan.json", R"({
    "task": {"kind": "gaussian_location", "mean": 0, "variance": 1},
    "comparison": {"algo": {"algo": "sample_mean"}},
    "procedures": ["clt_out"], "sample_sizes": [30], "replications": 5, "k": 3})");
  const std::vector<std::vector<std::string>> commands = {
      {"cv", "run", "--data", data, "--algo", "ridge"},
      {"cv", "compare", "--data", data, "--algo1", "ridge", "--algo2", "knn"},
      {"estimate", "--loss-matrix", matrix},
      {"infer", "ci", "--loss-matrix", matrix},
      {"baseline", "--kind", "five_by_two", "--data", data, "--algo1", "ridge", "--algo2", "knn"},
      {"diagnose", "stability", "--task", R"({"kind":"gaussian_location","mean":0,"variance":1})",
       "--algo", "sample_mean", "--n", "40", "--k", "4", "--replicates", "100", "--inner", "50",
       "--batches", "4", "--train-sets", "5", "--test-points", "50", "--outer-reps", "0"},
      {"simulate", "--plan", plan},
      {"loocv-ridge", "--data", data, "--lambda", "2"}};
  for (const auto& c : commands) {
    const auto r = cli(c);
    INFO(c[0]);
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j.at("meta").contains("seed"));
    CHECK(j.at("meta").at("version") == kToolVersion);
  }
  const auto diag = cli(commands[5]);
  const auto report = stability_report_from_json(nlohmann::json::parse(diag.out));
  CHECK(report.n == 40);
}
