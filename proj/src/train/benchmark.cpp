#include "driftweight/train/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

#include "driftweight/errors.hpp"
#include "driftweight/omega/inputs.hpp"
#include "driftweight/stats.hpp"
#include "driftweight/text.hpp"

namespace dw::train {

void BenchmarkConfig::validate() const {
  schedule.validate();
  if (protocols.empty()) throw ValidationError("benchmark: no protocols");
  if (seeds.empty()) throw ValidationError("benchmark: no seeds");
  const int last = resolved_last_step();
  if (first_step < 1) throw ValidationError("benchmark: first_step must be >= 1");
  if (last < first_step || last + 1 > schedule.horizon) {
    throw ValidationError("benchmark: step range must satisfy 1 <= first <= last < horizon");
  }
  if (model.epochs < 1 || model.batch_size < 1) throw ValidationError("benchmark: bad model config");
  if (estimator_refresh_epochs < 1 || estimator.epochs < 1) {
    throw ValidationError("benchmark: estimator epochs must be >= 1");
  }
  if (jobs < 1) throw ValidationError("benchmark: jobs must be >= 1");
}

int BenchmarkConfig::resolved_last_step() const {
  return last_step < 0 ? schedule.horizon - 1 : last_step;
}

namespace {

using Clock = std::chrono::steady_clock;

std::vector<std::size_t> rows_where(std::span<const int> t, auto pred) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (pred(t[i])) rows.push_back(i);
  }
  return rows;
}

omega::TimedInputs take(const omega::TimedInputs& in, std::span<const std::size_t> rows) {
  omega::TimedInputs out;
  out.x.resize(static_cast<Eigen::Index>(rows.size()), in.x.cols());
  out.t.reserve(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.x.row(static_cast<Eigen::Index>(k)) = in.x.row(static_cast<Eigen::Index>(rows[k]));
    out.t.push_back(in.t[rows[k]]);
  }
  return out;
}

/// One protocol over every evaluated step of one seed.
std::vector<StepResult> run_item(const BenchmarkConfig& cfg, const ProtocolSpec& protocol,
                                 std::uint64_t seed, const StreamSource& source) {
  const auto stream = source ? source(seed) : data::generate_stream(cfg.schedule, seed);
  const int classes = cfg.schedule.num_classes();
  const auto history = to_dataset(stream, classes);
  const omega::InputSpec spec{cfg.estimator_uses_label, classes};
  const bool needs_inputs =
      protocol.kind == Protocol::omega_weighted || protocol.kind == Protocol::beta_weighted;
  const auto inputs = needs_inputs ? omega::make_inputs(stream, spec) : omega::TimedInputs{};

  std::optional<omega::OmegaEstimator> estimator;
  auto estimator_config = cfg.estimator;
  estimator_config.method = protocol.method;

  std::vector<StepResult> results;
  for (int t = cfg.first_step; t <= cfg.resolved_last_step(); ++t) {
    const auto start = Clock::now();
    StepContext ctx{t, classes, cfg.model, seed, {}};
    Classifier model;
    std::size_t n_train = 0;
    const auto upto = rows_where(history.t, [t](int ti) { return ti <= t; });
    const auto now = rows_where(history.t, [t](int ti) { return ti == t; });

    switch (protocol.kind) {
      case Protocol::everything:
        model = train_everything(history, ctx);
        n_train = upto.size();
        break;
      case Protocol::recent:
        model = train_recent(history, ctx);
        n_train = now.size();
        break;
      case Protocol::finetune:
        model = train_finetune(history, ctx);
        n_train = upto.size();
        break;
      case Protocol::omega_weighted:
      case Protocol::beta_weighted: {
        const auto seen = take(inputs, upto);
        nn::Vector w;
        if (protocol.kind == Protocol::omega_weighted) {
          auto train_rng = make_rng(seed, "omega_train", t);
          if (!estimator || !cfg.estimator_warm_start) {
            auto init_rng = make_rng(seed, "omega_init", cfg.estimator_warm_start ? 0 : t);
            estimator.emplace(inputs.dim(), cfg.schedule.horizon, estimator_config, init_rng);
          }
          omega::TrainOptions opts;
          if (cfg.estimator_warm_start) opts.epochs = cfg.estimator_refresh_epochs;
          omega::train(*estimator, seen, opts, train_rng);
          w = estimator->omegas(seen.x, t, seen.t);
        } else {
          auto rng = make_rng(seed, "propensity", t);
          const auto current = take(inputs, now);
          const auto fitted = omega::fit_standard_propensity(seen.x, current.x, cfg.propensity, rng);
          w = fitted.beta(seen.x);
        }
        std::vector<double> weights(history.size(), 0.0);
        for (std::size_t k = 0; k < upto.size(); ++k) {
          weights[upto[k]] = w[static_cast<Eigen::Index>(k)];
          if (w[static_cast<Eigen::Index>(k)] > 0.0) ++n_train;
        }
        model = train_weighted(history, weights, ctx);
        break;
      }
    }
    const double acc = evaluate_next_step(model, cfg.schedule, t, seed, cfg.test_size);
    const double ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    results.push_back({protocol.name(), seed, t, acc, n_train, ms});
  }
  return results;
}

}  // namespace

std::vector<StepResult> run_benchmark(const BenchmarkConfig& config, const StreamSource& source) {
  config.validate();
  struct Item {
    std::size_t protocol;
    std::size_t seed;
  };
  std::vector<Item> items;
  for (std::size_t p = 0; p < config.protocols.size(); ++p) {
    for (std::size_t s = 0; s < config.seeds.size(); ++s) items.push_back({p, s});
  }
  std::vector<std::vector<StepResult>> out(items.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < items.size(); i = next++) {
      try {
        out[i] = run_item(config, config.protocols[items[i].protocol],
                          config.seeds[items[i].seed], source);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(config.jobs), items.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<StepResult> runs;
  for (auto& chunk : out) runs.insert(runs.end(), chunk.begin(), chunk.end());
  return runs;
}

std::vector<SummaryRow> summarize(const std::vector<StepResult>& runs) {
  std::vector<std::string> order;
  std::map<std::pair<std::string, int>, std::vector<double>> groups;
  for (const auto& r : runs) {
    if (std::find(order.begin(), order.end(), r.protocol) == order.end()) order.push_back(r.protocol);
    groups[{r.protocol, r.t}].push_back(r.accuracy);
  }
  std::vector<SummaryRow> rows;
  for (const auto& protocol : order) {
    for (const auto& [key, values] : groups) {
      if (key.first != protocol) continue;
      rows.push_back({protocol, key.second, stats::mean(values), stats::stderr_of_mean(values),
                      static_cast<int>(values.size())});
    }
  }
  return rows;
}

double mean_accuracy(const std::vector<StepResult>& runs, const std::string& protocol,
                     int from_step) {
  std::vector<double> values;
  for (const auto& r : runs) {
    if (r.protocol == protocol && r.t >= from_step) values.push_back(r.accuracy);
  }
  if (values.empty()) throw InputError("mean_accuracy: no runs for protocol '" + protocol + "'");
  return stats::mean(values);
}

std::vector<double> per_seed_accuracy(const std::vector<StepResult>& runs,
                                      const std::string& protocol, int from_step) {
  std::map<std::uint64_t, std::vector<double>> by_seed;
  for (const auto& r : runs) {
    if (r.protocol == protocol && r.t >= from_step) by_seed[r.seed].push_back(r.accuracy);
  }
  std::vector<double> out;
  for (const auto& [seed, values] : by_seed) out.push_back(stats::mean(values));
  return out;
}

void write_runs_csv(std::ostream& out, const std::vector<StepResult>& runs) {
  out << "protocol,seed,t,accuracy,n_train,wallclock_ms\n";
  for (const auto& r : runs) {
    out << r.protocol << ',' << r.seed << ',' << r.t << ',' << text::format_double(r.accuracy) << ','
        << r.n_train << ',' << text::format_double(r.wallclock_ms) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "protocol,t,mean_accuracy,stderr,seeds\n";
  for (const auto& r : rows) {
    out << r.protocol << ',' << r.t << ',' << text::format_double(r.mean) << ','
        << text::format_double(r.stderr_mean) << ',' << r.seeds << '\n';
  }
}

}  // namespace dw::train
