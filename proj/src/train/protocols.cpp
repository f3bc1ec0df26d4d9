#include "driftweight/train/protocols.hpp"

#include "driftweight/errors.hpp"

namespace dw::train {

std::string ProtocolSpec::name() const {
  switch (kind) {
    case Protocol::everything: return "everything";
    case Protocol::recent: return "recent";
    case Protocol::finetune: return "finetune";
    case Protocol::omega_weighted:
      return method == omega::Method::method1 ? "omega_weighted" : "omega_weighted_m2";
    case Protocol::beta_weighted: return "beta_weighted";
  }
  return "unknown";
}

ProtocolSpec parse_protocol(std::string_view name) {
  if (name == "everything") return {Protocol::everything};
  if (name == "recent") return {Protocol::recent};
  if (name == "finetune") return {Protocol::finetune};
  if (name == "omega_weighted" || name == "omega_weighted_m1") return {Protocol::omega_weighted};
  if (name == "omega_weighted_m2") return {Protocol::omega_weighted, omega::Method::method2};
  if (name == "beta_weighted") return {Protocol::beta_weighted};
  throw ValidationError("unknown protocol '" + std::string(name) + "'");
}

namespace {

Classifier fresh_model(const Dataset& d, const StepContext& ctx) {
  auto rng = make_rng(ctx.seed, "model", ctx.t);
  return Classifier(d.dim(), ctx.classes, ctx.model, rng);
}

Dataset up_to(const Dataset& history, int t) {
  return subset(history, [&](std::size_t i) { return history.t[i] <= t; });
}

}  // namespace

Classifier train_everything(const Dataset& history, const StepContext& ctx) {
  const auto d = up_to(history, ctx.t);
  if (d.size() == 0) throw InputError("train_everything: no samples at or before t");
  auto model = fresh_model(d, ctx);
  auto shuffle = make_rng(ctx.seed, "shuffle", ctx.t);
  fit(model, d, {}, ctx.model, ctx.model.epochs, shuffle, ctx.observer);
  return model;
}

Classifier train_recent(const Dataset& history, const StepContext& ctx) {
  const auto d = subset(history, [&](std::size_t i) { return history.t[i] == ctx.t; });
  if (d.size() == 0) throw InputError("train_recent: no samples at t");
  auto model = fresh_model(d, ctx);
  auto shuffle = make_rng(ctx.seed, "shuffle", ctx.t);
  fit(model, d, {}, ctx.model, ctx.model.epochs, shuffle, ctx.observer);
  return model;
}

Classifier train_finetune(const Dataset& history, const StepContext& ctx) {
  const auto past = subset(history, [&](std::size_t i) { return history.t[i] < ctx.t; });
  const auto now = subset(history, [&](std::size_t i) { return history.t[i] == ctx.t; });
  if (past.size() == 0) throw InputError("train_finetune: no samples before t");
  if (now.size() == 0) throw InputError("train_finetune: no samples at t");
  auto model = fresh_model(past, ctx);
  auto shuffle = make_rng(ctx.seed, "shuffle", ctx.t);
  fit(model, past, {}, ctx.model, ctx.model.epochs, shuffle, ctx.observer);
  const int stage2 = ctx.model.finetune_epochs < 0 ? ctx.model.epochs : ctx.model.finetune_epochs;
  if (stage2 > 0) fit(model, now, {}, ctx.model, stage2, shuffle, ctx.observer);
  return model;
}

Classifier train_weighted(const Dataset& history, std::span<const double> weights,
                          const StepContext& ctx) {
  if (weights.size() != history.size()) throw ShapeError("train_weighted: one weight per sample");
  std::vector<double> kept;
  kept.reserve(weights.size());
  for (std::size_t i = 0; i < history.size(); ++i) {
    if (history.t[i] <= ctx.t) kept.push_back(weights[i]);
  }
  const auto d = up_to(history, ctx.t);
  if (d.size() == 0) throw InputError("train_weighted: no samples at or before t");
  auto model = fresh_model(d, ctx);
  auto shuffle = make_rng(ctx.seed, "shuffle", ctx.t);
  fit(model, d, kept, ctx.model, ctx.model.epochs, shuffle, ctx.observer);
  return model;
}

double evaluate_next_step(const Classifier& model, const data::DriftSchedule& schedule, int t,
                          std::uint64_t seed, int test_size) {
  if (t < 0 || t + 1 > schedule.horizon) {
    throw RangeError("evaluate_next_step: t + 1 outside the horizon");
  }
  const auto test = data::generate_test(schedule, t + 1, seed, test_size);
  return model.accuracy(to_dataset(test, model.classes()));
}

}  // namespace dw::train
