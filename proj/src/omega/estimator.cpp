#include "driftweight/omega/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "driftweight/errors.hpp"
#include "driftweight/nn/serialize.hpp"
#include "driftweight/text.hpp"

namespace dw::omega {

namespace {

double softplus(double u) { return std::max(u, 0.0) + std::log1p(std::exp(-std::abs(u))); }

double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

}  // namespace

const char* method_name(Method m) { return m == Method::method1 ? "method1" : "method2"; }

Method parse_method(std::string_view name) {
  if (name == "method1") return Method::method1;
  if (name == "method2") return Method::method2;
  throw ValidationError("unknown estimator method '" + std::string(name) + "'");
}

std::vector<QuadrupleExample> generate_data(std::span<const int> times, Rng& rng) {
  std::vector<int> distinct(times.begin(), times.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 2) {
    throw DegenerateError("generate_data: stream spans fewer than two distinct times");
  }
  const auto others = static_cast<int>(distinct.size()) - 1;
  std::uniform_int_distribution<int> pick(0, others - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  std::vector<QuadrupleExample> out;
  out.reserve(times.size());
  for (std::size_t j = 0; j < times.size(); ++j) {
    const auto own = static_cast<int>(
        std::lower_bound(distinct.begin(), distinct.end(), times[j]) - distinct.begin());
    int k = pick(rng);
    if (k >= own) ++k;
    const int z = coin(rng) >= 0.5 ? 1 : -1;
    out.push_back({j, times[j], distinct[k], z});
  }
  return out;
}

OmegaEstimator::OmegaEstimator(int input_dim, int horizon, EstimatorConfig config, Rng& init_rng)
    : input_dim_(input_dim), config_(std::move(config)) {
  if (input_dim <= 0) throw ShapeError("OmegaEstimator: input_dim must be positive");
  if (horizon <= 0) throw ValidationError("OmegaEstimator: horizon must be positive");
  if (config_.clip && !(*config_.clip > 0.0)) throw ValidationError("omega clip must be > 0");
  encoding_ = TimeEncoding(horizon, config_.frequencies);
  net_ = nn::DenseNet::mlp(input_dim + encoding_.dim(), config_.hidden, 1, config_.batchnorm);
  net_.init_glorot(init_rng);
  if (config_.zero_output_init) {
    const std::size_t last = net_.layers().size() - 1;
    net_.weight(last).setZero();
    net_.bias(last).setZero();
  }
  optimizer_ = nn::AdamState(net_.parameter_count(), {.learning_rate = config_.learning_rate, .weight_decay = config_.weight_decay});
}

void OmegaEstimator::check_time(int t) const {
  if (t < 0 || t > encoding_.horizon()) {
    throw RangeError("time " + std::to_string(t) + " outside estimator horizon " +
                     std::to_string(encoding_.horizon()));
  }
}

nn::Matrix OmegaEstimator::encode(const nn::Matrix& x, std::span<const int> t) const {
  if (x.cols() != input_dim_) throw ShapeError("estimator input has the wrong dimension");
  if (static_cast<std::size_t>(x.rows()) != t.size()) {
    throw ShapeError("estimator input rows and time stamps differ in count");
  }
  nn::Matrix rows(x.rows(), input_dim_ + encoding_.dim());
  rows.leftCols(input_dim_) = x;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    check_time(t[i]);
    const auto enc = encoding_.row(t[i]);
    std::copy(enc.begin(), enc.end(), rows.row(i).data() + input_dim_);
  }
  return rows;
}

double OmegaEstimator::score(std::span<const double> x, int t) const {
  if (static_cast<int>(x.size()) != input_dim_) throw ShapeError("score: wrong input size");
  nn::Matrix row = Eigen::Map<const nn::Matrix>(x.data(), 1, input_dim_);
  const int times[1] = {t};
  return net_.forward(encode(row, times), nn::Mode::infer)(0, 0);
}

nn::Vector OmegaEstimator::scores(const nn::Matrix& x, std::span<const int> t) const {
  return net_.forward(encode(x, t), nn::Mode::infer).col(0);
}

double OmegaEstimator::log_omega(std::span<const double> x, int T, int t) const {
  check_time(T);
  check_time(t);
  if (T == t) return 0.0;
  return score(x, T) - score(x, t);
}

double OmegaEstimator::omega_unclipped(std::span<const double> x, int T, int t) const {
  return std::exp(log_omega(x, T, t));
}

double OmegaEstimator::omega(std::span<const double> x, int T, int t) const {
  const double w = omega_unclipped(x, T, t);
  return config_.clip ? std::min(w, *config_.clip) : w;
}

nn::Vector OmegaEstimator::log_omegas(const nn::Matrix& x, int T, std::span<const int> t) const {
  check_time(T);
  const auto n = x.rows();
  if (static_cast<std::size_t>(n) != t.size()) throw ShapeError("omegas: row/time mismatch");
  nn::Vector result = nn::Vector::Zero(n);
  if (n == 0) return result;
  nn::Matrix stacked(2 * n, x.cols());
  stacked.topRows(n) = x;
  stacked.bottomRows(n) = x;
  std::vector<int> times(static_cast<std::size_t>(2 * n), T);
  std::copy(t.begin(), t.end(), times.begin() + n);
  const nn::Vector g = scores(stacked, times);
  for (Eigen::Index i = 0; i < n; ++i) {
    result[i] = t[i] == T ? 0.0 : g[i] - g[n + i];
  }
  return result;
}

nn::Vector OmegaEstimator::omegas_unclipped(const nn::Matrix& x, int T,
                                            std::span<const int> t) const {
  return log_omegas(x, T, t).array().exp().matrix();
}

nn::Vector OmegaEstimator::omegas(const nn::Matrix& x, int T, std::span<const int> t) const {
  nn::Vector w = omegas_unclipped(x, T, t);
  if (config_.clip) w = w.cwiseMin(*config_.clip);
  return w;
}

namespace {

/// Network input rows for a batch: first block scores (x, t2); for method1 a second
/// block scores (x, t1).
nn::Matrix batch_rows(const OmegaEstimator& est, const TimedInputs& data,
                      std::span<const QuadrupleExample> batch) {
  const auto b = static_cast<Eigen::Index>(batch.size());
  const bool pairwise = est.method() == Method::method1;
  nn::Matrix x(pairwise ? 2 * b : b, data.dim());
  std::vector<int> times(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < b; ++i) {
    const auto& q = batch[i];
    if (q.row >= data.size()) throw ShapeError("quadruple row outside the data set");
    const int t2 = q.z > 0 ? q.t_pos : q.t_neg;
    const int t1 = q.z > 0 ? q.t_neg : q.t_pos;
    x.row(i) = data.x.row(static_cast<Eigen::Index>(q.row));
    times[i] = t2;
    if (pairwise) {
      x.row(b + i) = x.row(i);
      times[b + i] = t1;
    }
  }
  return est.encode(x, times);
}

double batch_loss(const OmegaEstimator& est, std::span<const QuadrupleExample> batch,
                  const nn::Matrix& out, nn::Matrix* d_out) {
  const auto b = static_cast<Eigen::Index>(batch.size());
  const bool pairwise = est.method() == Method::method1;
  double total = 0.0;
  for (Eigen::Index i = 0; i < b; ++i) {
    const double z = batch[i].z > 0 ? 1.0 : -1.0;
    const double margin = pairwise ? out(i, 0) - out(b + i, 0) : out(i, 0);
    const double u = -z * margin;
    total += softplus(u);
    if (d_out) {
      const double d = -z * sigmoid(u) / static_cast<double>(b);
      (*d_out)(i, 0) = d;
      if (pairwise) (*d_out)(b + i, 0) = -d;
    }
  }
  return total / static_cast<double>(b);
}

}  // namespace

double pairwise_logistic_loss(const OmegaEstimator& est, const TimedInputs& data,
                              std::span<const QuadrupleExample> batch) {
  if (batch.empty()) throw InputError("pairwise_logistic_loss: empty batch");
  const auto out = est.net().forward(batch_rows(est, data, batch), nn::Mode::infer);
  return batch_loss(est, batch, out, nullptr);
}

nn::LossAndGrad pairwise_logistic_grad(const OmegaEstimator& est, const TimedInputs& data,
                                       std::span<const QuadrupleExample> batch, nn::Mode mode) {
  if (batch.empty()) throw InputError("pairwise_logistic_grad: empty batch");
  return nn::grad(
      est.net(), batch_rows(est, data, batch),
      [&](const nn::Matrix& out, nn::Matrix& d_out) { return batch_loss(est, batch, out, &d_out); },
      mode);
}

double quadruple_accuracy(const OmegaEstimator& est, const TimedInputs& data,
                          std::span<const QuadrupleExample> quads) {
  if (quads.empty()) throw InputError("quadruple_accuracy: empty set");
  const auto out = est.net().forward(batch_rows(est, data, quads), nn::Mode::infer);
  const auto b = static_cast<Eigen::Index>(quads.size());
  const bool pairwise = est.method() == Method::method1;
  std::size_t hits = 0;
  for (Eigen::Index i = 0; i < b; ++i) {
    const double margin = pairwise ? out(i, 0) - out(b + i, 0) : out(i, 0);
    if (margin * quads[i].z > 0.0) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(b);
}

TrainReport train(OmegaEstimator& est, const TimedInputs& data, const TrainOptions& options,
                  Rng& rng) {
  const int epochs = options.epochs.value_or(est.config().epochs);
  const int batch_size = options.batch_size.value_or(est.config().batch_size);
  if (epochs < 1) throw InputError("train: epochs must be >= 1");
  if (batch_size < 1) throw InputError("train: batch_size must be >= 1");
  if (data.x.rows() != static_cast<Eigen::Index>(data.t.size())) {
    throw ShapeError("train: inputs and time stamps differ in count");
  }

  TrainReport report;
  const bool has_holdout = options.holdout_data != nullptr && !options.holdout.empty();
  if (has_holdout) {
    report.initial_holdout_loss = pairwise_logistic_loss(est, *options.holdout_data, options.holdout);
  }

  std::vector<QuadrupleExample> quads;
  std::vector<std::size_t> order;
  std::vector<QuadrupleExample> batch;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    if (epoch == 0 || !est.config().cache_quadruples) {
      quads = generate_data(data.t, rng);
      order.resize(quads.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
    }
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t stop = std::min(order.size(), start + batch_size);
      batch.clear();
      for (std::size_t i = start; i < stop; ++i) batch.push_back(quads[order[i]]);
      auto lg = pairwise_logistic_grad(est, data, batch, nn::Mode::train);
      nn::adam_step(est.net().parameters(),
                    std::span<const double>(lg.grad.data(), static_cast<std::size_t>(lg.grad.size())),
                    est.optimizer());
      est.net().update_running_stats(lg.tape);
      epoch_loss += lg.loss * static_cast<double>(batch.size());
      seen += batch.size();
      ++report.updates;
    }
    report.final_train_loss = epoch_loss / static_cast<double>(seen);
  }
  report.epochs = epochs;
  est.mark_trained();
  if (has_holdout) {
    report.final_holdout_loss = pairwise_logistic_loss(est, *options.holdout_data, options.holdout);
  }
  return report;
}

void write_snapshot(std::ostream& out, const OmegaEstimator& est) {
  const auto& cfg = est.config();
  out << "omega 1\n";
  out << "method " << method_name(cfg.method) << "\n";
  out << "clip " << (cfg.clip ? text::format_double(*cfg.clip) : std::string("none")) << "\n";
  out << "horizon " << est.horizon() << "\n";
  out << "frequencies " << cfg.frequencies << "\n";
  out << "input_dim " << est.input_dim() << "\n";
  out << "learning_rate " << text::format_double(cfg.learning_rate) << "\n";
  out << "weight_decay " << text::format_double(cfg.weight_decay) << "\n";
  out << "epochs " << cfg.epochs << "\n";
  out << "batch_size " << cfg.batch_size << "\n";
  out << "trained " << (est.trained() ? 1 : 0) << "\n";
  nn::write_snapshot(out, est.net());
}

OmegaEstimator read_snapshot(std::istream& in) {
  auto field = [&](const std::string& key) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("omega snapshot truncated");
    std::istringstream row(line);
    std::string word, value;
    row >> word >> value;
    if (word != key) throw IoError("omega snapshot: expected '" + key + "', got '" + word + "'");
    return value;
  };
  if (field("omega") != "1") throw IoError("unsupported omega snapshot version");
  EstimatorConfig cfg;
  cfg.method = parse_method(field("method"));
  const auto clip = field("clip");
  cfg.clip = clip == "none" ? std::nullopt : std::optional<double>(text::parse_double(clip));
  const int horizon = static_cast<int>(text::parse_int(field("horizon")));
  cfg.frequencies = static_cast<int>(text::parse_int(field("frequencies")));
  const int input_dim = static_cast<int>(text::parse_int(field("input_dim")));
  cfg.learning_rate = text::parse_double(field("learning_rate"));
  cfg.weight_decay = text::parse_double(field("weight_decay"));
  cfg.epochs = static_cast<int>(text::parse_int(field("epochs")));
  cfg.batch_size = static_cast<int>(text::parse_int(field("batch_size")));
  const bool trained = field("trained") == "1";

  auto net = nn::read_snapshot(in);
  if (net.input_size() != input_dim + 1 + 2 * cfg.frequencies || net.output_size() != 1) {
    throw IoError("omega snapshot: network shape does not match header");
  }
  cfg.hidden.clear();
  for (std::size_t k = 0; k + 1 < net.layers().size(); ++k) cfg.hidden.push_back(net.layers()[k].out);
  cfg.batchnorm = net.layers().front().norm == nn::Norm::batchnorm;

  Rng unused(0);
  OmegaEstimator est(input_dim, horizon, cfg, unused);
  est.net() = std::move(net);
  if (trained) est.mark_trained();
  return est;
}

}  // namespace dw::omega
