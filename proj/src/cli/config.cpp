#include "driftweight/cli/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "driftweight/errors.hpp"
#include "driftweight/random.hpp"
#include "driftweight/text.hpp"

namespace dw::cli {

namespace {

using Get = std::function<std::string(const ExperimentConfig&)>;
using Set = std::function<void(ExperimentConfig&, std::string_view)>;

struct Field {
  std::string section;
  std::string key;
  Get get;
  Set set;
};

std::string fmt(double v) { return text::format_double(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

bool parse_bool(std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ValidationError("expected a boolean, got '" + std::string(v) + "'");
}

int parse_small(std::string_view v) {
  const long long n = text::parse_int(v);
  if (n < INT32_MIN || n > INT32_MAX) throw ValidationError("integer out of range: " + std::string(v));
  return static_cast<int>(n);
}

std::string join_ints(const auto& values) {
  std::string out;
  for (const auto& v : values) {
    if (!out.empty()) out += ',';
    out += std::to_string(v);
  }
  return out;
}

std::vector<int> parse_int_list(std::string_view v) {
  std::vector<int> out;
  if (text::trim(v).empty()) return out;
  for (const auto& part : text::split(v, ',')) out.push_back(parse_small(text::trim(part)));
  return out;
}

std::vector<std::uint64_t> parse_seed_list(std::string_view v) {
  std::vector<std::uint64_t> out;
  for (const auto& part : text::split(v, ',')) {
    const long long n = text::parse_int(text::trim(part));
    if (n < 0) throw ValidationError("seeds must be >= 0");
    out.push_back(static_cast<std::uint64_t>(n));
  }
  return out;
}

std::string fmt_clip(const std::optional<double>& c) { return c ? fmt(*c) : "none"; }
std::optional<double> parse_clip(std::string_view v) {
  if (v == "none") return std::nullopt;
  return text::parse_double(v);
}

const char* kind_name(data::DriftKind k) {
  return k == data::DriftKind::gaussian_walk ? "gaussian_walk" : "label_shift";
}
data::DriftKind parse_kind(std::string_view v) {
  if (v == "gaussian_walk") return data::DriftKind::gaussian_walk;
  if (v == "label_shift") return data::DriftKind::label_shift;
  throw ValidationError("unknown schedule kind '" + std::string(v) + "'");
}

#define DW_INT(sec, key, expr) \
  Field{sec, key, [](const ExperimentConfig& c) { return std::to_string(c.expr); }, \
        [](ExperimentConfig& c, std::string_view v) { c.expr = parse_small(v); }}
#define DW_DOUBLE(sec, key, expr) \
  Field{sec, key, [](const ExperimentConfig& c) { return fmt(c.expr); }, \
        [](ExperimentConfig& c, std::string_view v) { c.expr = text::parse_double(v); }}
#define DW_BOOL(sec, key, expr) \
  Field{sec, key, [](const ExperimentConfig& c) { return fmt(c.expr); }, \
        [](ExperimentConfig& c, std::string_view v) { c.expr = parse_bool(v); }}
#define DW_STRING(sec, key, expr) \
  Field{sec, key, [](const ExperimentConfig& c) { return c.expr; }, \
        [](ExperimentConfig& c, std::string_view v) { c.expr = std::string(v); }}
#define DW_INTS(sec, key, expr) \
  Field{sec, key, [](const ExperimentConfig& c) { return join_ints(c.expr); }, \
        [](ExperimentConfig& c, std::string_view v) { c.expr = parse_int_list(v); }}
#define DW_CLIP(sec, key, expr) \
  Field{sec, key, [](const ExperimentConfig& c) { return fmt_clip(c.expr); }, \
        [](ExperimentConfig& c, std::string_view v) { c.expr = parse_clip(v); }}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"run", "seed", [](const ExperimentConfig& c) { return std::to_string(c.seed); },
            [](ExperimentConfig& c, std::string_view v) {
              const auto s = parse_seed_list(v);
              if (s.size() != 1) throw ValidationError("run.seed takes one value");
              c.seed = s.front();
            }},
      Field{"run", "seeds", [](const ExperimentConfig& c) { return join_ints(c.seeds); },
            [](ExperimentConfig& c, std::string_view v) { c.seeds = parse_seed_list(v); }},
      DW_INT("run", "jobs", jobs),

      Field{"schedule", "kind", [](const ExperimentConfig& c) { return std::string(kind_name(c.schedule.kind)); },
            [](ExperimentConfig& c, std::string_view v) { c.schedule.kind = parse_kind(v); }},
      DW_INT("schedule", "horizon", schedule.horizon),
      DW_INT("schedule", "samples_per_step", schedule.samples_per_step),
      DW_DOUBLE("schedule", "mu0", schedule.gaussian.mu0),
      DW_DOUBLE("schedule", "d", schedule.gaussian.d),
      DW_INT("schedule", "flip_period", schedule.gaussian.flip_period),
      DW_INT("schedule", "classes", schedule.label.classes),
      DW_INT("schedule", "steps_per_pair", schedule.label.steps_per_pair),
      DW_DOUBLE("schedule", "peak", schedule.label.peak),
      DW_INT("schedule", "feature_dim", schedule.label.feature_dim),
      DW_DOUBLE("schedule", "class_separation", schedule.label.class_separation),
      DW_DOUBLE("schedule", "sigma", schedule.label.sigma),

      Field{"estimator", "method", [](const ExperimentConfig& c) { return std::string(omega::method_name(c.estimator.method)); },
            [](ExperimentConfig& c, std::string_view v) { c.estimator.method = omega::parse_method(v); }},
      DW_CLIP("estimator", "clip", estimator.clip),
      DW_INTS("estimator", "hidden", estimator.hidden),
      DW_BOOL("estimator", "batchnorm", estimator.batchnorm),
      DW_INT("estimator", "frequencies", estimator.frequencies),
      DW_DOUBLE("estimator", "learning_rate", estimator.learning_rate),
      DW_DOUBLE("estimator", "weight_decay", estimator.weight_decay),
      DW_INT("estimator", "epochs", estimator.epochs),
      DW_INT("estimator", "batch_size", estimator.batch_size),
      DW_BOOL("estimator", "cache_quadruples", estimator.cache_quadruples),
      DW_BOOL("estimator", "zero_output_init", estimator.zero_output_init),
      DW_BOOL("estimator", "uses_label", estimator_uses_label),
      DW_BOOL("estimator", "warm_start", estimator_warm_start),
      DW_INT("estimator", "refresh_epochs", estimator_refresh_epochs),

      DW_INTS("model", "hidden", model.hidden),
      DW_DOUBLE("model", "learning_rate", model.learning_rate),
      DW_INT("model", "epochs", model.epochs),
      DW_INT("model", "batch_size", model.batch_size),
      DW_INT("model", "finetune_epochs", model.finetune_epochs),

      DW_INTS("propensity", "hidden", propensity.hidden),
      DW_DOUBLE("propensity", "learning_rate", propensity.learning_rate),
      DW_DOUBLE("propensity", "weight_decay", propensity.weight_decay),
      DW_INT("propensity", "epochs", propensity.epochs),
      DW_INT("propensity", "batch_size", propensity.batch_size),
      DW_CLIP("propensity", "clip", propensity.clip),

      Field{"benchmark", "protocols",
            [](const ExperimentConfig& c) {
              std::string out;
              for (const auto& p : c.protocols) out += (out.empty() ? "" : ",") + p.name();
              return out;
            },
            [](ExperimentConfig& c, std::string_view v) {
              c.protocols.clear();
              for (const auto& part : text::split(v, ',')) {
                c.protocols.push_back(train::parse_protocol(text::trim(part)));
              }
            }},
      DW_INT("benchmark", "first_step", first_step),
      DW_INT("benchmark", "last_step", last_step),
      DW_INT("benchmark", "test_size", test_size),
      DW_STRING("benchmark", "stream_dir", stream_dir),

      DW_STRING("rl", "goal_path", rl_goal_path),
      DW_INT("rl", "width", rl.grid.width),
      DW_INT("rl", "height", rl.grid.height),
      DW_DOUBLE("rl", "goal_reward", rl.grid.goal_reward),
      DW_DOUBLE("rl", "step_penalty", rl.grid.step_penalty),
      DW_INT("rl", "episode_cap", rl.grid.episode_cap),
      DW_INT("rl", "episodes", rl.episodes),
      DW_INT("rl", "burn_in", rl.burn_in_episodes),
      DW_DOUBLE("rl", "epsilon_start", rl.epsilon_start),
      DW_DOUBLE("rl", "epsilon_end", rl.epsilon_end),
      DW_INT("rl", "epsilon_decay", rl.epsilon_decay_episodes),
      DW_INT("rl", "updates_per_episode", rl.updates_per_episode),
      DW_INT("rl", "batch_size", rl.batch_size),
      Field{"rl", "buffer_capacity", [](const ExperimentConfig& c) { return std::to_string(c.rl.buffer_capacity); },
            [](ExperimentConfig& c, std::string_view v) {
              const long long n = text::parse_int(v);
              if (n < 1) throw ValidationError("rl.buffer_capacity must be positive");
              c.rl.buffer_capacity = static_cast<std::size_t>(n);
            }},
      DW_DOUBLE("rl", "gamma", rl.q.gamma),
      DW_DOUBLE("rl", "tau", rl.q.tau),
      DW_DOUBLE("rl", "learning_rate", rl.q.learning_rate),
      DW_INT("rl", "refresh_every", rl.refresh_every),
      DW_INT("rl", "refresh_epochs", rl.refresh_epochs),
      DW_DOUBLE("rl", "estimator_learning_rate", rl.estimator.learning_rate),
      DW_CLIP("rl", "estimator_clip", rl.estimator.clip),
      DW_INTS("rl", "estimator_hidden", rl.estimator.hidden),
      DW_INT("rl", "estimator_batch_size", rl.estimator.batch_size),
      DW_BOOL("rl", "force_unit_omega", rl.force_unit_omega),

      DW_STRING("validate", "snapshot", snapshot),
      DW_STRING("validate", "stream_dir", validate_stream_dir),
  };
  return table;
}

#undef DW_INT
#undef DW_DOUBLE
#undef DW_BOOL
#undef DW_STRING
#undef DW_INTS
#undef DW_CLIP

}  // namespace

ExperimentConfig::ExperimentConfig() {
  for (const char* p : {"everything", "recent", "finetune", "omega_weighted", "beta_weighted"}) {
    protocols.push_back(train::parse_protocol(p));
  }
  estimator.learning_rate = 1e-3;
}

void ExperimentConfig::validate() const {
  schedule.validate();
  if (seeds.empty()) throw ValidationError("run.seeds must not be empty");
  if (jobs < 1) throw ValidationError("run.jobs must be >= 1");
  if (estimator.clip && !(*estimator.clip > 0.0)) throw ValidationError("estimator.clip must be > 0 or none");
  if (estimator.epochs < 1 || estimator.batch_size < 1) throw ValidationError("estimator epochs/batch must be >= 1");
  if (estimator.frequencies < 0) throw ValidationError("estimator.frequencies must be >= 0");
  if (!(estimator.learning_rate > 0.0)) throw ValidationError("estimator.learning_rate must be > 0");
  if (!(model.learning_rate > 0.0)) throw ValidationError("model.learning_rate must be > 0");
  if (!(propensity.learning_rate > 0.0)) throw ValidationError("propensity.learning_rate must be > 0");
  if (propensity.epochs < 1 || propensity.batch_size < 1) throw ValidationError("propensity epochs/batch must be >= 1");
  if (rl_goal_path != "perimeter" && rl_goal_path != "fixed") {
    throw ValidationError("rl.goal_path must be 'perimeter' or 'fixed'");
  }
  benchmark().validate();
  rl_config().validate();
}

train::BenchmarkConfig ExperimentConfig::benchmark() const {
  train::BenchmarkConfig b;
  b.schedule = schedule;
  b.model = model;
  b.estimator = estimator;
  b.estimator_warm_start = estimator_warm_start;
  b.estimator_refresh_epochs = estimator_refresh_epochs;
  b.estimator_uses_label = estimator_uses_label;
  b.propensity = propensity;
  b.protocols = protocols;
  b.seeds = seeds;
  b.first_step = first_step;
  b.last_step = last_step;
  b.test_size = test_size;
  b.jobs = jobs;
  return b;
}

rl::RLConfig ExperimentConfig::rl_config() const {
  rl::RLConfig r = rl;
  auto grid = rl_goal_path == "fixed" ? rl::stationary_grid(rl.grid.width, rl.grid.height)
                                      : rl::drifting_grid(rl.grid.width, rl.grid.height);
  grid.goal_reward = rl.grid.goal_reward;
  grid.step_penalty = rl.grid.step_penalty;
  grid.episode_cap = rl.grid.episode_cap;
  r.grid = grid;
  return r;
}

ExperimentConfig parse_config(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  ExperimentConfig cfg;
  const auto& table = fields();
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ValidationError("config: key '" + section + "' outside any section");
    }
    for (const auto& [key, value] : body) {
      const auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) {
        return f.section == section && f.key == key;
      });
      if (it == table.end()) throw ValidationError("config: unknown key " + section + "." + key);
      try {
        it->set(cfg, text::trim(value.data()));
      } catch (const ValidationError& e) {
        throw ValidationError("config: " + section + "." + key + ": " + e.what());
      } catch (const Error& e) {
        throw ValidationError("config: " + section + "." + key + ": " + e.what());
      }
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  return parse_config(in);
}

void write_config(std::ostream& out, const ExperimentConfig& config) {
  std::string section;
  for (const auto& f : fields()) {
    if (f.section != section) {
      if (!section.empty()) out << '\n';
      section = f.section;
      out << '[' << section << "]\n";
    }
    out << f.key << " = " << f.get(config) << '\n';
  }
}

std::string config_text(const ExperimentConfig& config) {
  std::ostringstream out;
  write_config(out, config);
  return out.str();
}

std::string config_hash(const ExperimentConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(config_text(config))));
  return buf;
}

}  // namespace dw::cli
