#include "driftweight/train/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "driftweight/errors.hpp"
#include "driftweight/nn/adam.hpp"

namespace dw::train {

Dataset to_dataset(std::span<const data::TimedSample> samples, int classes) {
  if (classes < 2) throw ValidationError("to_dataset: need at least two classes");
  Dataset d;
  if (samples.empty()) return d;
  const auto dim = static_cast<Eigen::Index>(samples.front().x.size());
  d.x.resize(static_cast<Eigen::Index>(samples.size()), dim);
  d.y.reserve(samples.size());
  d.t.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (static_cast<Eigen::Index>(s.x.size()) != dim) throw ShapeError("to_dataset: ragged features");
    if (!s.y || *s.y < 0 || *s.y >= classes) throw InputError("to_dataset: missing or invalid label");
    for (Eigen::Index k = 0; k < dim; ++k) d.x(static_cast<Eigen::Index>(i), k) = s.x[k];
    d.y.push_back(*s.y);
    d.t.push_back(s.t);
  }
  return d;
}

Dataset subset(const Dataset& d, const std::function<bool(std::size_t)>& keep) {
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (keep(i)) rows.push_back(static_cast<Eigen::Index>(i));
  }
  Dataset out;
  out.x.resize(static_cast<Eigen::Index>(rows.size()), d.x.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.x.row(static_cast<Eigen::Index>(k)) = d.x.row(rows[k]);
    out.y.push_back(d.y[rows[k]]);
    out.t.push_back(d.t[rows[k]]);
  }
  return out;
}

Classifier::Classifier(int input_dim, int classes, const ModelConfig& config, Rng& init_rng)
    : classes_(classes) {
  if (classes < 2) throw ValidationError("Classifier: need at least two classes");
  net_ = nn::DenseNet::mlp(input_dim, config.hidden, classes);
  net_.init_glorot(init_rng);
}

std::vector<int> Classifier::predict(const nn::Matrix& x) const {
  const auto logits = net_.forward(x, nn::Mode::infer);
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index best = 0;
    logits.row(i).maxCoeff(&best);
    out[i] = static_cast<int>(best);
  }
  return out;
}

double Classifier::accuracy(const Dataset& d) const {
  if (d.size() == 0) throw InputError("accuracy: empty data set");
  const auto pred = predict(d.x);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == d.y[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double weighted_cross_entropy(const nn::Matrix& logits, std::span<const int> labels,
                              std::span<const double> weights, nn::Matrix* d_logits) {
  const auto b = logits.rows();
  if (static_cast<std::size_t>(b) != labels.size()) throw ShapeError("cross entropy: label count");
  if (!weights.empty() && weights.size() != labels.size()) throw ShapeError("cross entropy: weight count");
  if (d_logits) d_logits->resize(b, logits.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < b; ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    const double peak = logits.row(i).maxCoeff();
    const auto shifted = (logits.row(i).array() - peak).eval();
    const double log_z = std::log(shifted.exp().sum());
    total += w * (log_z - shifted(labels[i]));
    if (d_logits) {
      d_logits->row(i) = (shifted - log_z).exp().matrix() * (w / static_cast<double>(b));
      (*d_logits)(i, labels[i]) -= w / static_cast<double>(b);
    }
  }
  return total / static_cast<double>(b);
}

void fit(Classifier& model, const Dataset& d, std::span<const double> weights,
         const ModelConfig& config, int epochs, Rng& shuffle_rng, const StepObserver& observer) {
  if (d.size() == 0) throw InputError("fit: empty training set");
  if (!weights.empty() && weights.size() != d.size()) throw ShapeError("fit: one weight per sample");
  if (config.batch_size < 1) throw ValidationError("fit: batch_size must be >= 1");

  std::vector<std::size_t> active;
  active.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (weights.empty()) {
      active.push_back(i);
      continue;
    }
    if (!std::isfinite(weights[i]) || weights[i] < 0.0) throw InputError("fit: weights must be finite and >= 0");
    if (weights[i] > 0.0) active.push_back(i);
  }
  if (active.empty()) throw DegenerateError("fit: every sample weight is zero");

  nn::AdamState opt(model.net().parameter_count(), {.learning_rate = config.learning_rate});
  nn::Matrix x;
  std::vector<int> y;
  std::vector<double> w;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(active.begin(), active.end(), shuffle_rng);
    for (std::size_t start = 0; start < active.size(); start += config.batch_size) {
      const std::size_t stop = std::min(active.size(), start + config.batch_size);
      const auto b = static_cast<Eigen::Index>(stop - start);
      x.resize(b, d.x.cols());
      y.resize(static_cast<std::size_t>(b));
      w.resize(weights.empty() ? 0 : static_cast<std::size_t>(b));
      for (Eigen::Index i = 0; i < b; ++i) {
        const auto idx = active[start + i];
        x.row(i) = d.x.row(static_cast<Eigen::Index>(idx));
        y[i] = d.y[idx];
        if (!weights.empty()) w[i] = weights[idx];
      }
      auto lg = nn::grad(model.net(), x, [&](const nn::Matrix& out, nn::Matrix& d_out) {
        return weighted_cross_entropy(out, y, w, &d_out);
      });
      nn::adam_step(model.net().parameters(),
                    std::span<const double>(lg.grad.data(), static_cast<std::size_t>(lg.grad.size())),
                    opt);
      if (observer) observer(model.net().parameters());
    }
  }
}

}  // namespace dw::train
