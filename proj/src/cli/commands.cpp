#include "driftweight/cli/commands.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "driftweight/cli/manifest.hpp"
#include "driftweight/cli/svg.hpp"
#include "driftweight/data/stream_io.hpp"
#include "driftweight/errors.hpp"
#include "driftweight/omega/inputs.hpp"
#include "driftweight/stats.hpp"
#include "driftweight/text.hpp"
#include "driftweight/validate/mmd.hpp"

namespace fs = std::filesystem;

namespace dw::cli {

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw IoError("write failed: " + path.string());
}

template <class Fn>
void write_file(const fs::path& path, Fn&& body) {
  auto out = open_out(path);
  body(out);
  finish(out, path);
}

void claim(const ExperimentConfig& config, const RunOptions& options, const char* command) {
  claim_output_dir(options.out, Manifest{command, config_hash(config), config.seed}, options.force);
  write_file(options.out / "config.ini", [&](std::ostream& out) { write_config(out, config); });
}

data::Stream input_stream(const ExperimentConfig& config, const std::string& dir) {
  if (dir.empty()) return data::generate_stream(config.schedule, config.seed);
  if (!fs::is_directory(dir)) throw IoError("stream directory not found: " + dir);
  return data::load_stream_dir(dir);
}

omega::InputSpec input_spec(const ExperimentConfig& config) {
  return {config.estimator_uses_label, config.schedule.num_classes()};
}

int max_time(const data::Stream& stream) {
  int hi = 0;
  for (const auto& s : stream) hi = std::max(hi, s.t);
  return hi;
}

// Minimal reader for the CSV files this tool writes itself (no quoting).
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  bool has(const std::string& name) const {
    return std::find(header.begin(), header.end(), name) != header.end();
  }
  std::size_t column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw IoError("csv: missing column " + name);
    return static_cast<std::size_t>(it - header.begin());
  }
  std::vector<double> numbers(const std::string& name) const {
    const auto c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(text::parse_double(r.at(c)));
    return out;
  }
};

Table read_table(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  Table table;
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty csv: " + path.string());
  table.header = text::split(line, ',');
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    auto fields = text::split(line, ',');
    if (fields.size() != table.header.size()) throw IoError("csv: ragged row in " + path.string());
    table.rows.push_back(std::move(fields));
  }
  return table;
}

void chart(const fs::path& path, const std::vector<Series>& series, const ChartLabels& labels) {
  write_file(path, [&](std::ostream& out) { write_line_chart(out, series, labels); });
}

bool plot_benchmark(const fs::path& dir) {
  const auto path = dir / "summary.csv";
  if (!fs::exists(path)) return false;
  const auto table = read_table(path);
  if (!table.has("protocol") || !table.has("mean_accuracy")) return false;  // rl writes a summary.csv too
  const auto pc = table.column("protocol");
  const auto t = table.numbers("t");
  const auto acc = table.numbers("mean_accuracy");
  std::vector<Series> series;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& name = table.rows[i][pc];
    auto it = std::find_if(series.begin(), series.end(), [&](const Series& s) { return s.name == name; });
    if (it == series.end()) it = series.insert(series.end(), Series{name, {}, {}});
    it->x.push_back(t[i]);
    it->y.push_back(acc[i]);
  }
  chart(dir / "accuracy.svg", series, {"Next-step accuracy", "t", "mean accuracy"});
  return true;
}

bool plot_mmd(const fs::path& dir) {
  const auto path = dir / "mmd.csv";
  if (!fs::exists(path)) return false;
  const auto table = read_table(path);
  const auto t = table.numbers("t");
  chart(dir / "mmd.svg",
        {Series{"unweighted", t, table.numbers("mmd_unweighted")},
         Series{"omega-weighted", t, table.numbers("mmd_weighted")}},
        {"MMD^2 between current and past data", "t", "MMD^2"});
  return true;
}

std::optional<Series> mean_curve(const fs::path& dir, const std::string& name) {
  if (!fs::is_directory(dir)) return std::nullopt;
  std::map<int, std::pair<double, int>> by_episode;
  bool any = false;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".csv") continue;
    const auto table = read_table(entry.path());
    const auto ep = table.numbers("episode");
    const auto ret = table.numbers("eval_return");
    for (std::size_t i = 0; i < ep.size(); ++i) {
      auto& acc = by_episode[static_cast<int>(ep[i])];
      acc.first += ret[i];
      acc.second += 1;
    }
    any = true;
  }
  if (!any) return std::nullopt;
  Series s{name, {}, {}};
  for (const auto& [e, acc] : by_episode) {
    s.x.push_back(e);
    s.y.push_back(acc.first / acc.second);
  }
  return s;
}

bool plot_rl(const fs::path& dir) {
  std::vector<Series> series;
  for (const char* variant : {"baseline", "weighted"}) {
    if (auto s = mean_curve(dir / variant, variant)) series.push_back(std::move(*s));
  }
  if (series.empty()) return false;
  chart(dir / "returns.svg", series, {"Greedy evaluation return (mean over seeds)", "episode", "return"});
  return true;
}

std::string seed_file(std::uint64_t seed) { return "seed_" + std::to_string(seed) + ".csv"; }

}  // namespace

void apply_overrides(ExperimentConfig& config, std::optional<std::uint64_t> seed, std::optional<int> jobs) {
  if (seed) {
    config.seed = *seed;
    config.seeds = {*seed};
  }
  if (jobs) config.jobs = *jobs;
}

void cmd_gen(const ExperimentConfig& config, const RunOptions& options, std::ostream& log) {
  config.validate();
  const auto& s = config.schedule;
  if (options.dry_run) {
    log << "gen: " << s.horizon << " steps x " << s.samples_per_step << " samples, seed " << config.seed
        << " -> " << options.out.string() << '\n';
    return;
  }
  claim(config, options, "gen");
  for (int t = 0; t < s.horizon; ++t) {
    data::save_stream(options.out / data::step_file_name(t), data::generate_step(s, t, config.seed));
  }
  log << "gen: wrote " << s.horizon << " step files to " << options.out.string() << '\n';
}

void cmd_train_omega(const ExperimentConfig& config, const RunOptions& options, std::ostream& log) {
  config.validate();
  if (options.dry_run) {
    log << "train-omega: " << omega::method_name(config.estimator.method) << ", " << config.estimator.epochs
        << " epochs on " << (config.stream_dir.empty() ? "a generated stream" : config.stream_dir) << '\n';
    return;
  }
  const auto stream = input_stream(config, config.stream_dir);
  const auto inputs = omega::make_inputs(stream, input_spec(config));
  const int horizon = std::max(config.schedule.horizon, max_time(stream) + 1);
  claim(config, options, "train-omega");

  auto init_rng = make_rng(config.seed, "omega_init");
  auto train_rng = make_rng(config.seed, "omega_train");
  omega::OmegaEstimator est(inputs.dim(), horizon, config.estimator, init_rng);
  const auto report = omega::train(est, inputs, {}, train_rng);
  write_file(options.out / "omega.snapshot", [&](std::ostream& out) { omega::write_snapshot(out, est); });
  log << "train-omega: " << report.epochs << " epochs, " << report.updates << " updates, final loss "
      << text::format_double(report.final_train_loss) << '\n';
}

void cmd_benchmark(const ExperimentConfig& config, const RunOptions& options, std::ostream& log) {
  config.validate();
  const auto bench = config.benchmark();
  if (options.dry_run) {
    log << "benchmark plan: steps " << bench.first_step << ".." << bench.resolved_last_step() << '\n';
    for (const auto& p : bench.protocols) {
      for (auto seed : bench.seeds) log << "  " << p.name() << " seed " << seed << '\n';
    }
    log << (bench.protocols.size() * bench.seeds.size()) << " work items, jobs " << bench.jobs << '\n';
    return;
  }
  train::StreamSource source;
  if (!config.stream_dir.empty()) {
    for (auto seed : bench.seeds) {
      const auto dir = fs::path(config.stream_dir) / ("seed_" + std::to_string(seed));
      if (!fs::is_directory(dir)) throw IoError("missing stream directory " + dir.string());
    }
    source = [dir = fs::path(config.stream_dir)](std::uint64_t seed) {
      return data::load_stream_dir(dir / ("seed_" + std::to_string(seed)));
    };
  }
  claim(config, options, "benchmark");
  const auto runs = train::run_benchmark(bench, source);

  for (const auto& p : bench.protocols) {
    std::vector<train::StepResult> mine;
    std::copy_if(runs.begin(), runs.end(), std::back_inserter(mine),
                 [&](const train::StepResult& r) { return r.protocol == p.name(); });
    write_file(options.out / ("runs_" + p.name() + ".csv"), [&](std::ostream& out) { train::write_runs_csv(out, mine); });
    log << "  " << p.name() << ": mean accuracy "
        << text::format_double(train::mean_accuracy(runs, p.name(), bench.first_step)) << '\n';
  }
  write_file(options.out / "summary.csv",
             [&](std::ostream& out) { train::write_summary_csv(out, train::summarize(runs)); });
  plot_benchmark(options.out);
}

void cmd_rl(const ExperimentConfig& config, const RunOptions& options, std::ostream& log) {
  config.validate();
  auto baseline = config.rl_config();
  baseline.weighted = false;
  auto weighted = config.rl_config();
  weighted.weighted = true;
  if (options.dry_run) {
    log << "rl plan: " << baseline.episodes << " episodes, goal path " << config.rl_goal_path << ", "
        << config.seeds.size() << " seeds, " << (options.baseline_only ? "baseline only" : "baseline + weighted")
        << '\n';
    return;
  }
  claim(config, options, "rl");
  const auto base_curves = rl::run_rl_experiment(baseline, config.seeds, config.jobs);
  std::vector<std::vector<rl::CurvePoint>> weighted_curves;
  if (!options.baseline_only) weighted_curves = rl::run_rl_experiment(weighted, config.seeds, config.jobs);

  auto dump = [&](const char* variant, const std::vector<std::vector<rl::CurvePoint>>& curves) {
    const auto dir = options.out / variant;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string());
    for (std::size_t i = 0; i < curves.size(); ++i) {
      write_file(dir / seed_file(config.seeds[i]), [&](std::ostream& out) { rl::write_curve_csv(out, curves[i]); });
    }
  };
  dump("baseline", base_curves);
  if (!options.baseline_only) dump("weighted", weighted_curves);

  std::vector<double> base_final, weighted_final;
  for (const auto& c : base_curves) base_final.push_back(rl::final_mean_return(c));
  for (const auto& c : weighted_curves) weighted_final.push_back(rl::final_mean_return(c));
  write_file(options.out / "summary.csv", [&](std::ostream& out) {
    out << (options.baseline_only ? "seed,baseline\n" : "seed,baseline,weighted,difference\n");
    for (std::size_t i = 0; i < base_final.size(); ++i) {
      out << config.seeds[i] << ',' << text::format_double(base_final[i]);
      if (!options.baseline_only) {
        out << ',' << text::format_double(weighted_final[i]) << ','
            << text::format_double(weighted_final[i] - base_final[i]);
      }
      out << '\n';
    }
  });
  log << "rl: baseline final-quarter return " << text::format_double(stats::mean(base_final)) << '\n';
  if (!options.baseline_only && base_final.size() >= 2) {
    const auto test = stats::paired_t_test(weighted_final, base_final);
    log << "rl: weighted final-quarter return " << text::format_double(stats::mean(weighted_final)) << ", wins "
        << test.wins << '/' << test.n << ", paired p " << text::format_double(test.p_two_sided);
    log << '\n';
  }
  plot_rl(options.out);
}

void cmd_validate(const ExperimentConfig& config, const RunOptions& options, std::ostream& log) {
  config.validate();
  if (config.snapshot.empty()) throw ValidationError("validate.snapshot is required");
  if (options.dry_run) {
    log << "validate: " << config.snapshot << " against "
        << (config.validate_stream_dir.empty() ? "a generated stream" : config.validate_stream_dir) << '\n';
    return;
  }
  std::ifstream in(config.snapshot);
  if (!in) throw IoError("cannot open snapshot " + config.snapshot);
  const auto est = omega::read_snapshot(in);
  const auto stream = input_stream(config, config.validate_stream_dir);
  validate::Fig3Options fig3;
  fig3.inputs = input_spec(config);
  if (!stream.empty() && fig3.inputs.dim(static_cast<int>(stream.front().x.size())) != est.input_dim()) {
    throw ValidationError("snapshot input width does not match the stream and estimator.uses_label");
  }
  claim(config, options, "validate");
  const auto report = validate::fig3_protocol(stream, est, fig3);
  write_file(options.out / "mmd.csv", [&](std::ostream& out) { validate::write_report_csv(out, report); });
  plot_mmd(options.out);
  log << "validate: " << report.records.size() << " steps written to " << (options.out / "mmd.csv").string() << '\n';
}

void cmd_plot(const RunOptions& options, std::ostream& log) {
  if (!fs::is_directory(options.out)) throw IoError("no such directory " + options.out.string());
  int drawn = 0;
  if (plot_benchmark(options.out)) { log << "plot: accuracy.svg\n"; ++drawn; }
  if (plot_mmd(options.out)) { log << "plot: mmd.svg\n"; ++drawn; }
  if (plot_rl(options.out)) { log << "plot: returns.svg\n"; ++drawn; }
  if (drawn == 0) throw IoError("nothing to plot in " + options.out.string());
}

int exit_code_for(const std::exception& error) {
  return dynamic_cast<const IoError*>(&error) ? 2 : 1;
}

}  // namespace dw::cli
