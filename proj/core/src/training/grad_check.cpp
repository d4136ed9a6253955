#include "msp_dst/training/grad_check.hpp"

#include "msp_dst/common/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace msp {

namespace {

double total_loss(Model<double>& model, const std::vector<LabeledTurn>& batch, const LossWeights& w, bool backward) {
  LossParts parts;
  for (const auto& t : batch) parts += model.turn_loss(t, w, backward);
  return parts.joint(w);
}

}  // namespace

GradCheckResult grad_check(Model<double>& model, const std::vector<LabeledTurn>& batch, const LossWeights& w, double h,
                           int samples, std::uint64_t seed) {
  auto& params = model.params();
  params.zero_grad();
  total_loss(model, batch, w, true);

  struct Coord {
    int param;
    Eigen::Index index;
  };
  std::vector<Coord> coords;
  GradCheckResult r;
  for (int p = 0; p < static_cast<int>(params.size()); ++p) {
    if (params[p].frozen) {
      r.frozen += static_cast<std::size_t>(params[p].value.size());
      continue;
    }
    for (Eigen::Index i = 0; i < params[p].value.size(); ++i) coords.push_back({p, i});
  }
  Rng rng(seed);
  const std::size_t k = std::min(coords.size(), static_cast<std::size_t>(std::max(samples, 0)));
  for (std::size_t i = 0; i < k; ++i) std::swap(coords[i], coords[i + rng() % (coords.size() - i)]);

  for (std::size_t i = 0; i < k; ++i) {
    auto& p = params[coords[i].param];
    double& x = p.value.data()[coords[i].index];
    const double ga = p.grad.data()[coords[i].index];
    if (!std::isfinite(ga)) throw std::runtime_error("non-finite analytic gradient at " + p.name);
    const double saved = x;
    x = saved + h;
    const double up = total_loss(model, batch, w, false);
    x = saved - h;
    const double down = total_loss(model, batch, w, false);
    x = saved;
    const double gn = (up - down) / (2 * h);
    if (!std::isfinite(gn)) throw std::runtime_error("non-finite numerical gradient at " + p.name);
    const double rel = std::abs(ga - gn) / std::max({std::abs(ga), std::abs(gn), 1e-8});
    if (r.checked == 0 || rel > r.max_rel_error) {
      r.max_rel_error = rel;
      r.worst = p.name + "[" + std::to_string(coords[i].index) + "]";
    }
    ++r.checked;
  }
  return r;
}

MicroSetup micro_setup(std::uint64_t seed, Strategy strategy, bool zero_heads) {
  std::vector<SlotDef> slots(2);
  slots[0].name = "taxi-people";
  slots[0].domain = "taxi";
  slots[0].kind = SlotKind::categorical;
  slots[0].ontology = {"one", "two", "three"};
  slots[1].name = "taxi-destination";
  slots[1].domain = "taxi";
  slots[1].kind = SlotKind::span;
  Schema schema(slots);

  auto turn = [&](std::string agent, std::string user, std::string people, std::string dest) {
    Turn t;
    t.agent = std::move(agent);
    t.user = std::move(user);
    t.agent_tokens = tokenize(t.agent);
    t.user_tokens = tokenize(t.user);
    t.gold = DialogueState(schema.size());
    t.gold.values[0] = SlotValue::parse(people);
    t.gold.values[1] = SlotValue::parse(dest);
    return t;
  };
  Dialogue d;
  d.id = "micro";
  d.turns.push_back(turn("hello , where to ?", "a taxi to city centre north for two people .", "two", "city centre north"));
  d.turns.push_back(turn("when do you want to leave ?", "as soon as possible please .", "two", "city centre north"));
  d.turns.push_back(turn("booked .", "actually make it three people .", "three", "city centre north"));
  compute_last_updated(d);

  Vocabulary vocab = Vocabulary::build({d}, schema);
  for (int i = 0; vocab.size() < 50; ++i) vocab.add("filler" + std::to_string(i));

  ModelConfig cfg;
  cfg.encoder = {8, 2, 2, 16, 48};
  cfg.strategy = strategy;
  cfg.zero_heads = zero_heads;
  Model<double> model(cfg, schema, vocab);
  model.init(seed);

  auto batch = label_dialogue(d, schema, cfg.label_options());
  for (auto& t : batch) model.encode_ids(t.context);
  return {schema, d, std::move(model), std::move(batch)};
}

}  // namespace msp
