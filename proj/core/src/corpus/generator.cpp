#include "msp_dst/corpus/generator.hpp"

#include "msp_dst/common/error.hpp"
#include "msp_dst/common/rng.hpp"
#include "msp_dst/corpus/text.hpp"

#include <cstdio>

#include <algorithm>
#include <map>

namespace msp {

namespace {

const std::vector<std::string> kDays = {"monday", "tuesday", "wednesday", "thursday",
                                        "friday", "saturday", "sunday"};
const std::vector<std::string> kPeople = {"one", "two", "three", "four",
                                          "five", "six", "seven", "eight"};
const std::vector<std::string> kPlaces = {
    "cambridge", "ely", "norwich", "peterborough", "leicester", "stevenage",
    "london kings cross", "stansted airport", "bishops stortford", "birmingham new street",
    "broxbourne", "kings lynn"};
const std::vector<std::string> kFoods = {"italian", "chinese", "indian", "british", "french",
                                         "thai",    "mexican", "korean", "spanish", "turkish"};
const std::vector<std::string> kRestaurants = {
    "golden wok", "the varsity", "curry garden", "la margherita", "bedouin", "nandos",
    "the copper kettle", "yu garden", "pizza hut city centre", "the gandhi", "sala thong",
    "meghna", "the nirala", "cote"};
const std::vector<std::string> kHotels = {"acorn guest house", "the lensfield", "gonville",
                                          "alpha milton", "city centre north", "huntingdon marriott",
                                          "the cambridge belfry", "limehouse", "warkworth house",
                                          "arbury lodge"};
const std::vector<std::string> kAreas = {"north", "south", "east", "west", "centre"};

const std::vector<std::string>& times() {
  static const std::vector<std::string> t = [] {
    std::vector<std::string> out;
    for (int h = 5; h <= 23; ++h) {
      for (int m : {0, 15, 30, 45}) {
        char buf[6];
        std::snprintf(buf, sizeof(buf), "%02d:%02d", h, m);
        out.emplace_back(buf);
      }
    }
    return out;
  }();
  return t;
}

struct SlotSpec {
  std::string name;
  std::string domain;
  std::string role;
  SlotKind kind;
  const std::vector<std::string>* values;
  std::vector<std::string> phrases;  // "{v}" is replaced by the value
  std::string question;
  std::string distractor;
  std::vector<std::string> dontcare;  // empty: slot never receives dontcare
};

std::vector<SlotSpec> domain_slots(const std::string& domain) {
  using K = SlotKind;
  if (domain == "train") {
    return {
        {"train-destination", domain, "destination", K::span, &kPlaces,
         {"to {v}", "going to {v}", "heading to {v}"}, "where are you travelling to ?",
         "there is also a train to {v} .", {}},
        {"train-day", domain, "day", K::categorical, &kDays,
         {"on {v}", "leaving on {v}", "travelling on {v}"}, "what day will you travel ?",
         "there are more trains on {v} .", {}},
        {"train-leaveat", domain, "leaveat", K::span, &times(),
         {"leaving after {v}", "departing after {v}", "after {v}"},
         "what time do you want to leave ?", "there is a train leaving at {v} .",
         {"i do not mind what time it leaves", "any departure time is fine"}},
        {"train-book_people", domain, "people", K::categorical, &kPeople,
         {"for {v} people", "for {v} passengers", "with {v} tickets"},
         "how many tickets do you need ?", "i can also book {v} tickets .", {}},
    };
  }
  if (domain == "restaurant") {
    return {
        {"restaurant-food", domain, "food", K::categorical, &kFoods,
         {"serving {v} food", "that serves {v} food", "with {v} cuisine"},
         "what type of food would you like ?", "there is also a nice {v} place nearby .",
         {"i do not care about the type of food", "any type of food is fine"}},
        {"restaurant-name", domain, "name", K::span, &kRestaurants,
         {"called {v}", "named {v}", "at {v}"}, "do you have a restaurant in mind ?",
         "how about {v} instead ?", {}},
        {"restaurant-book_day", domain, "day", K::categorical, &kDays,
         {"on {v}", "for {v}", "booked for {v}"}, "what day is the booking for ?",
         "there is also a table free on {v} .", {}},
        {"restaurant-book_people", domain, "people", K::categorical, &kPeople,
         {"for {v} people", "for a group of {v}", "for {v} guests"}, "how many people ?",
         "the table also seats {v} people .", {}},
    };
  }
  if (domain == "hotel") {
    return {
        {"hotel-name", domain, "name", K::span, &kHotels, {"called {v}", "named {v}", "at {v}"},
         "which hotel would you like ?", "you could also try {v} .", {}},
        {"hotel-area", domain, "area", K::categorical, &kAreas,
         {"in the {v}", "in the {v} area", "located in the {v}"}, "which area do you prefer ?",
         "there are also hotels in the {v} .", {"any area is fine", "i do not mind the area"}},
        {"hotel-book_day", domain, "day", K::categorical, &kDays,
         {"from {v}", "starting {v}", "arriving on {v}"}, "what day will you arrive ?",
         "we also have rooms from {v} .", {}},
        {"hotel-book_people", domain, "people", K::categorical, &kPeople,
         {"for {v} people", "for {v} guests", "for a party of {v}"}, "how many guests ?",
         "the room can also take {v} people .", {}},
    };
  }
  throw ConfigError("unknown domain for the generator: " + domain);
}

std::string fill(const std::string& tmpl, const std::string& value) {
  std::string out = tmpl;
  auto pos = out.find("{v}");
  if (pos != std::string::npos) out.replace(pos, 3, value);
  return out;
}

std::string intro(const std::string& domain, bool first) {
  if (domain == "train") return first ? "i need a train" : "i also need a train";
  if (domain == "restaurant") return first ? "i want to book a restaurant" : "i also need a restaurant";
  return first ? "i am looking for a hotel" : "i also need a hotel";
}

class Sim {
 public:
  Sim(const Schema& schema, std::uint64_t seed, std::string id)
      : schema_(schema), rng_(seed), state_(schema.size()) {
    dialogue_.id = std::move(id);
  }

  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  bool coin(double p) { return uniform() < p; }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }
  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[below(v.size())];
  }
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

  int next_turn() const { return static_cast<int>(dialogue_.turns.size()) + 1; }
  std::size_t index(const SlotSpec& s) const { return schema_.index_of(s.name); }
  const SlotValue& value(const SlotSpec& s) const { return state_.values[index(s)]; }
  void set(const SlotSpec& s, SlotValue v) { state_.values[index(s)] = std::move(v); }

  void emit(std::string agent, std::string user) {
    Turn t;
    t.agent = std::move(agent);
    t.user = std::move(user);
    t.agent_tokens = tokenize(t.agent);
    t.user_tokens = tokenize(t.user);
    t.gold = state_;
    dialogue_.turns.push_back(std::move(t));
  }

  void event(const SlotSpec& s, EventKind k, std::string source = {}) {
    events_.push_back({dialogue_.id, next_turn(), s.name, k, std::move(source)});
  }

  std::string other_value(const SlotSpec& s, const std::string& current) {
    for (;;) {
      const std::string& v = pick(*s.values);
      if (v != current) return v;
    }
  }

  Dialogue finish() {
    compute_last_updated(dialogue_);
    return std::move(dialogue_);
  }
  std::vector<PhenomenonEvent>& events() { return events_; }

 private:
  const Schema& schema_;
  Rng rng_;
  DialogueState state_;
  Dialogue dialogue_;
  std::vector<PhenomenonEvent> events_;
};

struct Statement {
  const SlotSpec* slot;
  enum Form { value, dontcare, indirect } form = value;
  std::string v;
};

struct Plan {
  enum Kind { chunk, correction, restate, filler, closing } kind = chunk;
  std::string domain;
  bool opens_domain = false;
  bool first_domain = false;
  std::vector<Statement> statements;
};

Dialogue simulate(const GeneratorConfig& cfg, const Schema& schema, std::uint64_t seed,
                  const std::string& id, std::vector<PhenomenonEvent>& events) {
  Sim sim(schema, seed, id);

  std::vector<std::string> domains = cfg.domains;
  sim.shuffle(domains);
  if (domains.size() > 2) domains.resize(2);

  const bool correction = sim.coin(cfg.correction_rate);
  const bool indirect = sim.coin(cfg.indirect_rate) && domains.size() > 1;
  const bool distractor = sim.coin(cfg.distractor_rate);
  const bool restate = sim.coin(cfg.restate_rate);
  const bool dontcare = sim.coin(cfg.dontcare_rate);
  const bool filler = sim.coin(cfg.filler_rate);

  const std::string indirect_role = indirect ? (sim.coin(0.5) ? "day" : "people") : "";

  std::map<std::string, std::vector<SlotSpec>> specs;
  for (const auto& d : domains) specs[d] = domain_slots(d);

  // Which slots each domain fills, in statement order.
  std::vector<std::vector<Statement>> per_domain;
  for (std::size_t di = 0; di < domains.size(); ++di) {
    auto& slots = specs[domains[di]];
    std::vector<const SlotSpec*> order;
    for (const auto& s : slots) order.push_back(&s);
    sim.shuffle(order);
    std::size_t k = 2 + sim.below(3);
    std::vector<const SlotSpec*> chosen(order.begin(), order.begin() + static_cast<long>(k));
    if (indirect) {
      auto it = std::find_if(slots.begin(), slots.end(),
                             [&](const SlotSpec& s) { return s.role == indirect_role; });
      if (std::find(chosen.begin(), chosen.end(), &*it) == chosen.end()) {
        chosen.back() = &*it;
      }
    }
    std::vector<Statement> st;
    for (const auto* s : chosen) st.push_back({s, Statement::value, sim.pick(*s->values)});
    if (indirect && di == 1) {
      for (auto& s : st) {
        if (s.slot->role == indirect_role) s.form = Statement::indirect;
      }
    }
    per_domain.push_back(std::move(st));
  }
  if (dontcare) {
    // Prefer a chosen dontcare-capable slot; otherwise add one.
    std::vector<Statement*> capable;
    for (auto& st : per_domain) {
      for (auto& s : st) {
        if (!s.slot->dontcare.empty() && s.form == Statement::value) capable.push_back(&s);
      }
    }
    if (!capable.empty()) {
      sim.pick(capable)->form = Statement::dontcare;
    } else {
      const std::size_t di = sim.below(per_domain.size());
      for (const auto& s : specs[domains[di]]) {
        if (!s.dontcare.empty()) {
          per_domain[di].push_back({&s, Statement::dontcare, ""});
          break;
        }
      }
    }
  }

  std::vector<Plan> plans;
  std::size_t first_domain_chunks = 0;
  for (std::size_t di = 0; di < per_domain.size(); ++di) {
    auto& st = per_domain[di];
    std::size_t i = 0;
    bool opening = true;
    while (i < st.size()) {
      const std::size_t n = std::min<std::size_t>(st.size() - i, 1 + sim.below(2));
      Plan p;
      p.kind = Plan::chunk;
      p.domain = domains[di];
      p.opens_domain = opening;
      p.first_domain = di == 0;
      p.statements.assign(st.begin() + static_cast<long>(i), st.begin() + static_cast<long>(i + n));
      plans.push_back(std::move(p));
      opening = false;
      i += n;
    }
    if (di == 0) first_domain_chunks = plans.size();
  }
  auto insert_after_first_domain = [&](Plan::Kind kind) {
    const std::size_t lo = first_domain_chunks;
    const std::size_t pos = lo + sim.below(plans.size() - lo + 1);
    Plan p;
    p.kind = kind;
    plans.insert(plans.begin() + static_cast<long>(pos), std::move(p));
  };
  if (filler) insert_after_first_domain(Plan::filler);
  if (correction) insert_after_first_domain(Plan::correction);
  if (restate) insert_after_first_domain(Plan::restate);
  plans.push_back(Plan{Plan::closing, "", false, false, {}});

  // The distractor rides on the agent side of one turn after the first.
  const std::size_t distractor_turn = distractor ? 1 + sim.below(plans.size() - 1) : plans.size();

  std::vector<const SlotSpec*> concrete;  // concrete slots set so far
  auto remember = [&](const SlotSpec* s) {
    if (std::find(concrete.begin(), concrete.end(), s) == concrete.end()) concrete.push_back(s);
  };

  for (std::size_t pi = 0; pi < plans.size(); ++pi) {
    Plan& p = plans[pi];
    std::string agent;
    std::string user;

    if (pi == 0) {
      agent = sim.pick(std::vector<std::string>{"hello , how can i help you today ?",
                                                 "welcome to the booking service . what do you need ?",
                                                 "hi , what can i do for you ?"});
    } else if (p.kind == Plan::chunk && !p.opens_domain) {
      agent = p.statements.front().slot->question;
    } else if (p.kind == Plan::closing) {
      agent = "is there anything else i can help with ?";
    } else {
      agent = sim.pick(std::vector<std::string>{"okay , anything else ?", "sure , what else do you need ?",
                                                 "alright , is there something else ?"});
    }

    if (pi == distractor_turn && !concrete.empty()) {
      const SlotSpec* s = sim.pick(concrete);
      const std::string alt = sim.other_value(*s, sim.value(*s).text());
      agent = fill(s->distractor, alt) + " " + agent;
      sim.event(*s, EventKind::distractor);
      user = "no , thank you . ";
    }

    switch (p.kind) {
      case Plan::chunk: {
        std::vector<std::string> phrases;
        std::vector<std::string> sentences;
        for (auto& st : p.statements) {
          const SlotSpec& s = *st.slot;
          if (st.form == Statement::dontcare) {
            sentences.push_back(sim.pick(s.dontcare) + " .");
            sim.set(s, SlotValue::dontcare());
            continue;
          }
          if (st.form == Statement::indirect) {
            const auto& src = specs[domains[0]];
            auto it = std::find_if(src.begin(), src.end(),
                                   [&](const SlotSpec& x) { return x.role == s.role; });
            const SlotValue& inherited = sim.value(*it);
            if (inherited.is_concrete()) {
              phrases.push_back(s.role == "day"
                                    ? sim.pick(std::vector<std::string>{
                                          "on the same day as the " + domains[0], "for the same day"})
                                    : sim.pick(std::vector<std::string>{"for the same number of people",
                                                                        "for the same group"}));
              sim.set(s, inherited);
              sim.event(s, EventKind::indirect, it->name);
              remember(&s);
              continue;
            }
            st.v = sim.pick(*s.values);  // source never set; state it directly
          }
          phrases.push_back(fill(sim.pick(s.phrases), st.v));
          sim.set(s, SlotValue::parse(st.v));
          remember(&s);
        }
        std::string text;
        if (!phrases.empty()) {
          if (p.opens_domain) {
            text = intro(p.domain, p.first_domain);
          } else {
            text = sim.pick(std::vector<std::string>{"i would like it", "make it", "it should be"});
          }
          text += " " + join(phrases, " and ") + " .";
        } else if (p.opens_domain) {
          text = intro(p.domain, p.first_domain) + " .";
        }
        for (const auto& s : sentences) text += (text.empty() ? "" : " ") + s;
        user += text;
        break;
      }
      case Plan::correction: {
        if (concrete.empty()) {
          user += "let me think .";
          break;
        }
        const SlotSpec* s = sim.pick(concrete);
        const std::string v = sim.other_value(*s, sim.value(*s).text());
        user += sim.pick(std::vector<std::string>{"actually , make it ", "sorry , i meant ",
                                                  "wait , change that to "}) +
                fill(sim.pick(s->phrases), v) + " instead .";
        sim.set(*s, SlotValue::parse(v));
        sim.event(*s, EventKind::correction);
        break;
      }
      case Plan::restate: {
        if (concrete.empty()) {
          user += "okay .";
          break;
        }
        const SlotSpec* s = sim.pick(concrete);
        const std::string phrase = fill(sim.pick(s->phrases), sim.value(*s).text());
        if (sim.coin(0.5)) {
          agent = "okay , so that is " + phrase + " .";
          user += "yes , that is right .";
        } else {
          user += "just to confirm , that is " + phrase + " , right ?";
        }
        break;
      }
      case Plan::filler:
        agent = sim.pick(std::vector<std::string>{"the journey takes about 40 minutes .",
                                                   "the reference number is 7gaweb3 .",
                                                   "it costs 12 pounds per person ."});
        user += sim.pick(std::vector<std::string>{"okay , good to know .", "great , thanks .",
                                                  "that sounds fine ."});
        break;
      case Plan::closing:
        user += sim.pick(std::vector<std::string>{"no , that is all . thanks .",
                                                  "no thank you , goodbye .",
                                                  "that is everything , thanks ."});
        break;
    }
    sim.emit(std::move(agent), std::move(user));
  }

  auto& ev = sim.events();
  events.insert(events.end(), ev.begin(), ev.end());
  return sim.finish();
}

}  // namespace

const std::vector<std::string>& known_domains() {
  static const std::vector<std::string> d = {"train", "restaurant", "hotel"};
  return d;
}

void GeneratorConfig::validate() const {
  auto rate = [](const char* name, double v) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ConfigError(std::string(name) + " must lie in [0, 1], got " + std::to_string(v));
    }
  };
  rate("correction_rate", correction_rate);
  rate("indirect_rate", indirect_rate);
  rate("distractor_rate", distractor_rate);
  rate("restate_rate", restate_rate);
  rate("dontcare_rate", dontcare_rate);
  rate("filler_rate", filler_rate);
  rate("train_fraction", train_fraction);
  rate("dev_fraction", dev_fraction);
  if (train_fraction + dev_fraction > 1.0) throw ConfigError("train_fraction + dev_fraction exceeds 1");
  if (dialogues < 1) throw ConfigError("dialogues must be positive");
  if (domains.empty()) throw ConfigError("at least one domain is required");
  for (const auto& d : domains) {
    if (std::find(known_domains().begin(), known_domains().end(), d) == known_domains().end()) {
      throw ConfigError("unknown domain for the generator: " + d);
    }
  }
}

nlohmann::json GeneratorConfig::to_json() const {
  return {{"dialogues", dialogues},         {"correction_rate", correction_rate},
          {"indirect_rate", indirect_rate}, {"distractor_rate", distractor_rate},
          {"restate_rate", restate_rate},   {"dontcare_rate", dontcare_rate},
          {"filler_rate", filler_rate},     {"train_fraction", train_fraction},
          {"dev_fraction", dev_fraction},   {"domains", domains}};
}

GeneratorConfig GeneratorConfig::from_json(const nlohmann::json& j) {
  GeneratorConfig c;
  try {
    c.dialogues = j.value("dialogues", c.dialogues);
    c.correction_rate = j.value("correction_rate", c.correction_rate);
    c.indirect_rate = j.value("indirect_rate", c.indirect_rate);
    c.distractor_rate = j.value("distractor_rate", c.distractor_rate);
    c.restate_rate = j.value("restate_rate", c.restate_rate);
    c.dontcare_rate = j.value("dontcare_rate", c.dontcare_rate);
    c.filler_rate = j.value("filler_rate", c.filler_rate);
    c.train_fraction = j.value("train_fraction", c.train_fraction);
    c.dev_fraction = j.value("dev_fraction", c.dev_fraction);
    c.domains = j.value("domains", c.domains);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed generator config: ") + e.what());
  }
  return c;
}

Schema synthetic_schema(const std::vector<std::string>& domains) {
  std::vector<SlotSpec> all;
  for (const auto& d : domains) {
    for (auto& s : domain_slots(d)) all.push_back(std::move(s));
  }
  std::vector<SlotDef> defs;
  for (const auto& s : all) {
    SlotDef def;
    def.name = s.name;
    def.domain = s.domain;
    def.kind = s.kind;
    if (s.kind == SlotKind::categorical) def.ontology = *s.values;
    if (s.role == "day" || s.role == "people") {
      for (const auto& o : all) {
        if (o.role == s.role && o.domain != s.domain && def.relevant_slots.size() < kMaxRelevantSlots) {
          def.relevant_slots.push_back(o.name);
        }
      }
    }
    defs.push_back(std::move(def));
  }
  return Schema(std::move(defs));
}

GeneratedCorpus generate_synthetic_corpus(const GeneratorConfig& config, std::uint64_t seed) {
  config.validate();
  GeneratedCorpus out;
  out.schema = synthetic_schema(config.domains);
  const int n_train = static_cast<int>(config.dialogues * config.train_fraction + 0.5);
  const int n_dev = static_cast<int>(config.dialogues * config.dev_fraction + 0.5);
  for (int i = 0; i < config.dialogues; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "syn%05d", i);
    Dialogue d = simulate(config, out.schema, mix_seed(seed, static_cast<std::uint64_t>(i)), id,
                          out.events);
    if (i < n_train) {
      out.train.push_back(std::move(d));
    } else if (i < n_train + n_dev) {
      out.dev.push_back(std::move(d));
    } else {
      out.test.push_back(std::move(d));
    }
  }
  return out;
}

void write_corpus(const GeneratedCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_schema(corpus.schema, dir / "schema.json");
  write_dialogues(corpus.train, corpus.schema, dir / "train.jsonl");
  write_dialogues(corpus.dev, corpus.schema, dir / "dev.jsonl");
  write_dialogues(corpus.test, corpus.schema, dir / "test.jsonl");
  write_events(corpus.events, dir / "events.jsonl");
}

}  // namespace msp
