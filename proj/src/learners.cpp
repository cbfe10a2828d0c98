#include "cvinfer/learners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "cvinfer/error.hpp"

namespace cvinfer {

AlgorithmSpec AlgorithmSpec::constant_value(double c) {
  AlgorithmSpec s;
  s.kind = AlgorithmKind::constant;
  s.constant = c;
  return s;
}

AlgorithmSpec AlgorithmSpec::sample_mean() {
  AlgorithmSpec s;
  s.kind = AlgorithmKind::sample_mean;
  return s;
}

AlgorithmSpec AlgorithmSpec::surrogate_mean() {
  AlgorithmSpec s;
  s.kind = AlgorithmKind::surrogate_mean;
  return s;
}

AlgorithmSpec AlgorithmSpec::ridge(double lambda, bool standardize) {
  AlgorithmSpec s;
  s.kind = AlgorithmKind::ridge;
  s.lambda = lambda;
  s.standardize = standardize;
  return s;
}

AlgorithmSpec AlgorithmSpec::knn(std::size_t neighbors, bool standardize) {
  AlgorithmSpec s;
  s.kind = AlgorithmKind::knn;
  s.neighbors = neighbors;
  s.standardize = standardize;
  return s;
}

AlgorithmSpec AlgorithmSpec::logistic(double l2, bool standardize) {
  AlgorithmSpec s;
  s.kind = AlgorithmKind::logistic;
  s.l2 = l2;
  s.standardize = standardize;
  return s;
}

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// log(1 + exp(-t)) without overflow.
double log1p_exp_neg(double t) {
  if (t > 0) return std::log1p(std::exp(-t));
  return -t + std::log1p(std::exp(t));
}

void check_dim(const AlgorithmSpec& spec, const Dataset& data) {
  if (data.dim() == 0) {
    throw Error(ErrorCode::invalid_configuration, to_string(spec.kind) + " needs at least one feature");
  }
  if (data.dim() > kMaxLinearDim) {
    throw Error(ErrorCode::invalid_configuration,
                to_string(spec.kind) + " supports at most " + std::to_string(kMaxLinearDim) +
                    " features");
  }
}

// Gathers (optionally standardized) training rows into a dense matrix.
RowMatrix gather(const Dataset& data, std::span<const std::size_t> rows,
                 const std::vector<double>& center, const std::vector<double>& scale) {
  const std::size_t p = data.dim();
  RowMatrix x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto f = data.features(rows[r]);
    for (std::size_t c = 0; c < p; ++c) {
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          center.empty() ? f[c] : (f[c] - center[c]) / scale[c];
    }
  }
  return x;
}

Eigen::VectorXd gather_targets(const Dataset& data, std::span<const std::size_t> rows) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) y(static_cast<Eigen::Index>(r)) = data.target(rows[r]);
  return y;
}

// Cholesky factor of X'X + lambda I. A pivot below 1e-12 of the largest
// diagonal entry is treated as singular.
Eigen::LLT<Eigen::MatrixXd> factor_normal_matrix(const RowMatrix& x, double lambda) {
  const auto p = x.cols();
  Eigen::MatrixXd gram = x.transpose() * x;
  gram.diagonal().array() += lambda;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::singular_system, "normal matrix X'X + lambda I is not positive definite");
  }
  const Eigen::MatrixXd l = llt.matrixL();
  double max_diag = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) max_diag = std::max(max_diag, gram(i, i));
  for (Eigen::Index i = 0; i < p; ++i) {
    if (l(i, i) * l(i, i) <= 1e-12 * max_diag) {
      throw Error(ErrorCode::singular_system, "normal matrix X'X + lambda I is singular");
    }
  }
  return llt;
}

}  // namespace

void PredictionRule::scale_into(std::span<const double> x, std::vector<double>& out) const {
  out.resize(x.size());
  for (std::size_t c = 0; c < x.size(); ++c) {
    out[c] = center_.empty() ? x[c] : (x[c] - center_[c]) / scale_[c];
  }
}

double PredictionRule::predict(std::span<const double> x) const {
  switch (kind_) {
    case AlgorithmKind::constant:
    case AlgorithmKind::sample_mean:
    case AlgorithmKind::surrogate_mean:
      return bias_;
    case AlgorithmKind::ridge:
    case AlgorithmKind::logistic: {
      if (x.size() != dim_) throw Error(ErrorCode::invalid_input, "feature dimension mismatch");
      double t = bias_;
      for (std::size_t c = 0; c < dim_; ++c) {
        const double v = center_.empty() ? x[c] : (x[c] - center_[c]) / scale_[c];
        t += weights_[c] * v;
      }
      return kind_ == AlgorithmKind::logistic ? sigmoid(t) : t;
    }
    case AlgorithmKind::knn: {
      if (x.size() != dim_) throw Error(ErrorCode::invalid_input, "feature dimension mismatch");
      thread_local std::vector<double> scaled;
      thread_local std::vector<std::pair<double, std::size_t>> dist;
      scale_into(x, scaled);
      const auto& snap = *snapshot_;
      const std::size_t m = snap.targets.size();
      dist.resize(m);
      for (std::size_t r = 0; r < m; ++r) {
        const double* row = snap.features.data() + r * dim_;
        double d = 0.0;
        for (std::size_t c = 0; c < dim_; ++c) {
          const double diff = row[c] - scaled[c];
          d += diff * diff;
        }
        dist[r] = {d, r};
      }
      // Lexicographic order breaks distance ties by the smaller training index.
      const std::size_t kk = std::min(neighbors_, m);
      std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
      double sum = 0.0;
      for (std::size_t r = 0; r < kk; ++r) sum += snap.targets[dist[r].second];
      return sum / static_cast<double>(kk);
    }
  }
  return bias_;
}

bool PredictionRule::classifies() const noexcept {
  return kind_ == AlgorithmKind::logistic || kind_ == AlgorithmKind::knn ||
         kind_ == AlgorithmKind::constant;
}

std::optional<AffineForm> PredictionRule::affine_form() const {
  switch (kind_) {
    case AlgorithmKind::constant:
    case AlgorithmKind::sample_mean:
    case AlgorithmKind::surrogate_mean:
      return AffineForm{bias_, std::vector<double>(dim_, 0.0)};
    case AlgorithmKind::ridge: {
      AffineForm form{bias_, weights_};
      if (!center_.empty()) {
        for (std::size_t c = 0; c < dim_; ++c) {
          form.coefficients[c] = weights_[c] / scale_[c];
          form.offset -= weights_[c] * center_[c] / scale_[c];
        }
      }
      return form;
    }
    default:
      return std::nullopt;
  }
}

std::optional<double> PredictionRule::constant_prediction() const {
  switch (kind_) {
    case AlgorithmKind::constant:
    case AlgorithmKind::sample_mean:
    case AlgorithmKind::surrogate_mean:
      return bias_;
    default:
      return std::nullopt;
  }
}

PredictionRule fit(const AlgorithmSpec& spec, const Dataset& data,
                   std::span<const std::size_t> train) {
  if (train.empty()) throw Error(ErrorCode::invalid_input, "training set is empty");
  PredictionRule rule;
  rule.kind_ = spec.kind;
  rule.dim_ = data.dim();
  const auto m = static_cast<double>(train.size());

  const bool uses_features = spec.kind == AlgorithmKind::ridge ||
                             spec.kind == AlgorithmKind::knn ||
                             spec.kind == AlgorithmKind::logistic;
  if (uses_features && spec.standardize && data.dim() > 0) {
    const std::size_t p = data.dim();
    rule.center_.assign(p, 0.0);
    rule.scale_.assign(p, 0.0);
    for (auto i : train) {
      const auto f = data.features(i);
      for (std::size_t c = 0; c < p; ++c) rule.center_[c] += f[c];
    }
    for (auto& v : rule.center_) v /= m;
    for (auto i : train) {
      const auto f = data.features(i);
      for (std::size_t c = 0; c < p; ++c) {
        const double d = f[c] - rule.center_[c];
        rule.scale_[c] += d * d;
      }
    }
    for (auto& v : rule.scale_) {
      v = train.size() > 1 ? std::sqrt(v / (m - 1.0)) : 0.0;
      if (!(v > 0.0)) v = 1.0;
    }
  }

  switch (spec.kind) {
    case AlgorithmKind::constant:
      rule.bias_ = spec.constant;
      break;
    case AlgorithmKind::sample_mean: {
      double sum = 0.0;
      for (auto i : train) sum += data.target(i);
      rule.bias_ = sum / m;
      break;
    }
    case AlgorithmKind::surrogate_mean: {
      if (data.dim() == 0) {
        throw Error(ErrorCode::invalid_configuration, "surrogate_mean needs a feature column");
      }
      double sum = 0.0;
      for (auto i : train) sum += data.features(i)[0];
      rule.bias_ = sum / m;
      break;
    }
    case AlgorithmKind::ridge: {
      check_dim(spec, data);
      if (spec.lambda < 0) throw Error(ErrorCode::invalid_configuration, "ridge lambda must be >= 0");
      const RowMatrix x = gather(data, train, rule.center_, rule.scale_);
      const Eigen::VectorXd y = gather_targets(data, train);
      const auto llt = factor_normal_matrix(x, spec.lambda);
      const Eigen::VectorXd w = llt.solve(x.transpose() * y);
      rule.weights_.assign(w.data(), w.data() + w.size());
      break;
    }
    case AlgorithmKind::knn: {
      if (spec.neighbors < 1) throw Error(ErrorCode::invalid_configuration, "knn needs neighbors >= 1");
      rule.neighbors_ = spec.neighbors;
      auto snap = std::make_shared<PredictionRule::Snapshot>();
      snap->features.reserve(train.size() * data.dim());
      snap->targets.reserve(train.size());
      for (auto i : train) {
        const auto f = data.features(i);
        for (std::size_t c = 0; c < data.dim(); ++c) {
          snap->features.push_back(rule.center_.empty() ? f[c]
                                                        : (f[c] - rule.center_[c]) / rule.scale_[c]);
        }
        snap->targets.push_back(data.target(i));
      }
      rule.snapshot_ = std::move(snap);
      break;
    }
    case AlgorithmKind::logistic: {
      check_dim(spec, data);
      for (auto i : train) {
        const double y = data.target(i);
        if (y != 0.0 && y != 1.0) {
          throw Error(ErrorCode::invalid_configuration, "logistic regression needs 0/1 targets");
        }
      }
      const std::size_t p = data.dim();
      const RowMatrix x = gather(data, train, rule.center_, rule.scale_);
      const Eigen::VectorXd y = gather_targets(data, train);
      const Eigen::VectorXd sign = 2.0 * y.array() - 1.0;
      Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
      double b = 0.0;
      const double step = spec.step_scale / m;
      Eigen::VectorXd t(x.rows());
      Eigen::VectorXd g(x.rows());
      for (std::size_t it = 0; it < spec.iterations; ++it) {
        t.noalias() = x * w;
        t.array() += b;
        for (Eigen::Index r = 0; r < x.rows(); ++r) g(r) = -sign(r) * sigmoid(-sign(r) * t(r));
        Eigen::VectorXd grad_w = x.transpose() * g + spec.l2 * w;
        const double grad_b = spec.intercept ? g.sum() : 0.0;
        w -= step * grad_w;
        b -= step * grad_b;
      }
      rule.weights_.assign(w.data(), w.data() + w.size());
      rule.bias_ = b;
      break;
    }
  }
  return rule;
}

PredictionRule fit(const AlgorithmSpec& spec, const Dataset& data) {
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return fit(spec, data, all);
}

double loss_value(const LossFunction& loss, double prediction, double target, bool classifies) {
  switch (loss.type) {
    case LossType::squared_error: {
      const double r = target - prediction;
      return r * r;
    }
    case LossType::zero_one:
      if (!classifies) {
        throw Error(ErrorCode::invalid_configuration, "0-1 loss needs a classifying rule");
      }
      return predicted_label(prediction) != target ? 1.0 : 0.0;
    case LossType::excess_squared: {
      const double r = target - prediction;
      const double s = target - loss.anchor;
      return r * r - s * s;
    }
  }
  return 0.0;
}

double point_loss(const PredictionRule& rule, const LossFunction& loss, DataPoint point) {
  if (loss.type == LossType::zero_one && !rule.classifies()) {
    throw Error(ErrorCode::invalid_configuration,
                "0-1 loss is incompatible with a " + to_string(rule.kind()) + " rule");
  }
  return loss_value(loss, rule.predict(point.features), point.target, rule.classifies());
}

LossMatrix ridge_loocv_losses(const Dataset& data, double lambda) {
  const std::size_t n = data.size();
  if (n < 2) throw Error(ErrorCode::insufficient_data, "leave-one-out needs at least 2 points");
  if (data.dim() == 0 || data.dim() > kMaxLinearDim) {
    throw Error(ErrorCode::invalid_configuration, "ridge needs between 1 and 64 features");
  }
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  const RowMatrix x = gather(data, all, {}, {});
  const Eigen::VectorXd y = gather_targets(data, all);
  const auto llt = factor_normal_matrix(x, lambda);
  const auto p = x.cols();
  const Eigen::MatrixXd inverse = llt.solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::VectorXd w_hat = inverse * (x.transpose() * y);

  std::vector<LossEntry> entries;
  entries.reserve(n);
  Eigen::VectorXd mx(p);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = x.row(static_cast<Eigen::Index>(i)).transpose();
    mx.noalias() = inverse * row;
    const double leverage = row.dot(mx);
    if (std::abs(1.0 - leverage) < 1e-12) {
      throw Error(ErrorCode::leverage_singularity,
                  "leverage of point " + std::to_string(i) + " is 1; leave-one-out fit is undefined");
    }
    const double fitted = w_hat.dot(row);
    const double yi = y(static_cast<Eigen::Index>(i));
    // w_i = w_hat + M x_i (<w_hat, x_i> - y_i) / (1 - h_i)
    const Eigen::VectorXd w_i = w_hat + mx * ((fitted - yi) / (1.0 - leverage));
    const double r = yi - w_i.dot(row);
    entries.push_back({i, i, r * r});
  }
  return LossMatrix(std::move(entries), n, n, LossKind::plain);
}

double LogisticObjective::value(std::span<const double> params) const {
  const std::size_t p = data->dim();
  const double b = intercept ? params[p] : 0.0;
  double total = 0.0;
  for (auto i : rows) {
    const auto f = data->features(i);
    double t = b;
    for (std::size_t c = 0; c < p; ++c) t += params[c] * f[c];
    const double s = 2.0 * data->target(i) - 1.0;
    total += log1p_exp_neg(s * t);
  }
  double norm = 0.0;
  for (std::size_t c = 0; c < p; ++c) norm += params[c] * params[c];
  return total + 0.5 * l2 * norm;
}

std::vector<double> LogisticObjective::gradient(std::span<const double> params) const {
  const std::size_t p = data->dim();
  const double b = intercept ? params[p] : 0.0;
  std::vector<double> grad(p + (intercept ? 1 : 0), 0.0);
  for (auto i : rows) {
    const auto f = data->features(i);
    double t = b;
    for (std::size_t c = 0; c < p; ++c) t += params[c] * f[c];
    const double s = 2.0 * data->target(i) - 1.0;
    const double g = -s * sigmoid(-s * t);
    for (std::size_t c = 0; c < p; ++c) grad[c] += g * f[c];
    if (intercept) grad[p] += g;
  }
  for (std::size_t c = 0; c < p; ++c) grad[c] += l2 * params[c];
  return grad;
}

std::string to_string(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::constant: return "constant";
    case AlgorithmKind::sample_mean: return "sample_mean";
    case AlgorithmKind::surrogate_mean: return "surrogate_mean";
    case AlgorithmKind::ridge: return "ridge";
    case AlgorithmKind::knn: return "knn";
    case AlgorithmKind::logistic: return "logistic";
  }
  return "unknown";
}

std::string to_string(LossType type) {
  switch (type) {
    case LossType::squared_error: return "squared_error";
    case LossType::zero_one: return "zero_one";
    case LossType::excess_squared: return "excess_squared";
  }
  return "unknown";
}

nlohmann::json to_json(const AlgorithmSpec& spec) {
  nlohmann::json j{{"algo", to_string(spec.kind)}};
  switch (spec.kind) {
    case AlgorithmKind::constant:
      j["value"] = spec.constant;
      break;
    case AlgorithmKind::ridge:
      j["lambda"] = spec.lambda;
      j["standardize"] = spec.standardize;
      break;
    case AlgorithmKind::knn:
      j["neighbors"] = spec.neighbors;
      j["standardize"] = spec.standardize;
      break;
    case AlgorithmKind::logistic:
      j["l2"] = spec.l2;
      j["iterations"] = spec.iterations;
      j["step_scale"] = spec.step_scale;
      j["intercept"] = spec.intercept;
      j["standardize"] = spec.standardize;
      break;
    default:
      break;
  }
  return j;
}

AlgorithmSpec algorithm_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("algo")) {
    throw Error(ErrorCode::invalid_configuration, "algorithm config needs an \"algo\" field");
  }
  const auto name = j.at("algo").get<std::string>();
  AlgorithmSpec s;
  if (name == "constant") {
    s = AlgorithmSpec::constant_value(j.value("value", 0.0));
  } else if (name == "sample_mean") {
    s = AlgorithmSpec::sample_mean();
  } else if (name == "surrogate_mean") {
    s = AlgorithmSpec::surrogate_mean();
  } else if (name == "ridge") {
    s = AlgorithmSpec::ridge(j.value("lambda", 1.0));
  } else if (name == "knn") {
    s = AlgorithmSpec::knn(j.value("neighbors", std::size_t{5}));
  } else if (name == "logistic") {
    s = AlgorithmSpec::logistic(j.value("l2", 1.0));
    s.iterations = j.value("iterations", std::size_t{500});
    s.step_scale = j.value("step_scale", 0.1);
    s.intercept = j.value("intercept", true);
  } else {
    throw Error(ErrorCode::invalid_configuration, "unknown algorithm \"" + name + "\"");
  }
  s.standardize = j.value("standardize", false);
  return s;
}

nlohmann::json to_json(const LossFunction& loss) {
  nlohmann::json j{{"kind", to_string(loss.type)}};
  if (loss.type == LossType::excess_squared) j["anchor"] = loss.anchor;
  return j;
}

LossFunction loss_from_json(const nlohmann::json& j) {
  const std::string name = j.is_string() ? j.get<std::string>() : j.at("kind").get<std::string>();
  if (name == "squared_error") return LossFunction::squared_error();
  if (name == "zero_one") return LossFunction::zero_one();
  if (name == "excess_squared") {
    return LossFunction::excess_squared(j.is_object() ? j.value("anchor", 0.0) : 0.0);
  }
  throw Error(ErrorCode::invalid_configuration, "unknown loss \"" + name + "\"");
}

}  // namespace cvinfer
