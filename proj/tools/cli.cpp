#include "cli.hpp"

#include "msp_dst/common/error.hpp"
#include "msp_dst/corpus/generator.hpp"
#include "msp_dst/corpus/text.hpp"
#include "msp_dst/eval/report.hpp"
#include "msp_dst/training/checkpoint.hpp"
#include "msp_dst/training/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

namespace msp::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create directory " + dir.string() + ": " + ec.message());
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  json j = read_json_file(path);
  if (!j.is_object()) throw ConfigError("config " + path + " must be a flat JSON object");
  return j;
}

// Flags that mirror flat config fields. A flag given on the command line
// overrides the same field from --config.
class FlatFlags {
 public:
  enum class Kind { integer, number, text, boolean, list };

  void add(CLI::App* app, const std::string& field, Kind kind, const std::string& help) {
    std::string dashed = field;
    std::replace(dashed.begin(), dashed.end(), '_', '-');
    std::string names = "--" + dashed;
    if (dashed != field) names += ",--" + field;
    auto& slot = raw_[field];
    entries_.push_back({field, kind, app->add_option(names, slot, help)});
  }

  json apply(json base) const {
    for (const auto& e : entries_) {
      if (e.opt->count() == 0) continue;
      base[e.field] = convert(e, raw_.at(e.field));
    }
    return base;
  }

 private:
  struct Entry {
    std::string field;
    Kind kind;
    CLI::Option* opt;
  };

  static json convert(const Entry& e, const std::string& v) {
    const std::string flag = "--" + e.field;
    switch (e.kind) {
      case Kind::integer: {
        long long x = 0;
        auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
        if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(flag + " expects an integer, got " + v);
        return x;
      }
      case Kind::number: {
        try {
          std::size_t pos = 0;
          double x = std::stod(v, &pos);
          if (pos == v.size()) return x;
        } catch (const std::exception&) {
        }
        throw ConfigError(flag + " expects a number, got " + v);
      }
      case Kind::boolean:
        if (v == "true" || v == "1" || v == "on") return true;
        if (v == "false" || v == "0" || v == "off") return false;
        throw ConfigError(flag + " expects true or false, got " + v);
      case Kind::list: {
        json arr = json::array();
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) {
          if (!item.empty()) arr.push_back(item);
        }
        return arr;
      }
      case Kind::text:
        return v;
    }
    return v;
  }

  std::map<std::string, std::string> raw_;  // node-based, so bound references stay valid
  std::vector<Entry> entries_;
};

void setup_logging(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  sink->set_pattern("[%l] %v");
  auto logger = std::make_shared<spdlog::logger>("msp-dst", sink);
  logger->set_level(spdlog::level::info);
  if (const char* env = std::getenv("MSP_DST_LOG"); env && *env) {
    const std::string name = env;
    auto level = spdlog::level::from_str(name);
    if (level == spdlog::level::off && name != "off") {
      err << "MSP_DST_LOG: unknown level '" << name << "', using info\n";
    } else {
      logger->set_level(level);
    }
  }
  spdlog::set_default_logger(logger);
}

struct EvalSetup {
  std::optional<Model<float>> model;
  Schema schema;
  std::unique_ptr<TurnPredictor> predictor;
  Strategy strategy = Strategy::msp;
};

// --- gen-data ---------------------------------------------------------------

struct GenArgs {
  std::string config, out;
  FlatFlags flags;
};

int cmd_gen_data(const GenArgs& a, std::ostream& out) {
  json j = a.flags.apply(load_config(a.config));
  const std::uint64_t seed = j.value("seed", std::uint64_t{1});
  GeneratorConfig g = GeneratorConfig::from_json(j);
  g.validate();
  GeneratedCorpus corpus = generate_synthetic_corpus(g, seed);
  ensure_dir(a.out);
  write_corpus(corpus, a.out);
  json meta = g.to_json();
  meta["seed"] = seed;
  write_json(fs::path(a.out) / "generator.json", meta);
  out << "wrote " << corpus.train.size() << " train, " << corpus.dev.size() << " dev, " << corpus.test.size()
      << " test dialogues and " << corpus.events.size() << " events to " << a.out << "\n";
  return 0;
}

// --- train ------------------------------------------------------------------

struct TrainArgs {
  std::string config, schema, train, dev, out;
  FlatFlags flags;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  TrainConfig cfg = TrainConfig::from_json(a.flags.apply(load_config(a.config)));
  cfg.validate();
  const Schema schema = parse_schema(a.schema);
  const auto train = parse_dialogues(a.train, schema);
  std::vector<Dialogue> dev;
  if (!a.dev.empty()) dev = parse_dialogues(a.dev, schema);
  if (train.empty()) throw ConfigError("training corpus " + a.train + " has no dialogues");

  ensure_dir(a.out);
  const fs::path dir(a.out);
  write_json(dir / "config.json", cfg.to_json());
  std::ofstream history(dir / "history.jsonl", std::ios::binary | std::ios::trunc);
  if (!history) throw ConfigError("cannot write " + (dir / "history.jsonl").string());
  auto on_epoch = [&](const EpochRecord& r) { history << r.to_json().dump() << "\n" << std::flush; };

  TrainResult result = train_model(cfg, schema, train, dev, on_epoch);
  save_checkpoint(result.model, dir / "checkpoint.json", cfg.to_json());
  out << to_string(cfg.model.strategy) << ": " << result.history.size() << " epochs";
  if (!dev.empty()) out << ", best dev JGA " << result.best_dev_jga << " at epoch " << result.best_epoch;
  if (result.early_stopped) out << " (early stop)";
  out << "\ncheckpoint " << (dir / "checkpoint.json").string() << "\n";
  return 0;
}

// --- eval -------------------------------------------------------------------

struct EvalArgs {
  std::string config, checkpoint, schema, test, events, out;
  bool oracle = false;
  FlatFlags flags;  // strategy, pool_mode, noise_rate, noise_seed, seed
};

EvalSetup make_setup(const std::string& checkpoint, const std::string& schema_path, bool oracle, const json& j) {
  EvalSetup s;
  std::optional<Schema> given;
  if (!schema_path.empty()) given = parse_schema(schema_path);
  if (!checkpoint.empty()) {
    s.model = load_checkpoint(checkpoint, given ? &*given : nullptr);
    s.schema = s.model->schema();
  } else if (given) {
    s.schema = *given;
  } else {
    throw ConfigError("need --checkpoint, or --schema with --oracle");
  }
  if (!oracle && !s.model) throw ConfigError("eval needs --checkpoint unless --oracle is set");

  ModelConfig mc = s.model ? s.model->config() : ModelConfig{};
  if (j.contains("strategy")) mc.strategy = parse_strategy(j.at("strategy").get<std::string>());
  if (j.contains("pool_mode")) mc.pool_mode = parse_pool_mode(j.at("pool_mode").get<std::string>());
  s.strategy = mc.strategy;
  if (oracle) {
    s.predictor = std::make_unique<OraclePredictor>(s.schema, mc.label_options());
  } else {
    // A strategy that disagrees with the checkpoint is rejected by the tracker.
    s.predictor = std::make_unique<ModelPredictor>(*s.model);
  }
  return s;
}

TrackOptions track_options(const EvalSetup& s, const json& j, const std::vector<Dialogue>& corpus) {
  TrackOptions opts;
  opts.strategy = s.strategy;
  opts.noise.rate = j.value("noise_rate", 0.0);
  if (opts.noise.rate < 0.0 || opts.noise.rate > 1.0) throw ConfigError("--noise-rate must lie in [0, 1]");
  opts.noise.seed = j.value("noise_seed", j.value("seed", std::uint64_t{1}));
  if (opts.noise.active()) opts.noise.alternatives = noise_alternatives(s.schema, corpus);
  return opts;
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const json j = a.flags.apply(load_config(a.config));
  EvalSetup s = make_setup(a.checkpoint, a.schema, a.oracle, j);
  const auto test = parse_dialogues(a.test, s.schema);
  std::vector<PhenomenonEvent> events;
  if (!a.events.empty()) events = parse_events(a.events);
  const TrackOptions opts = track_options(s, j, test);

  const auto tracks = track_corpus(*s.predictor, test, s.schema, opts);
  const MetricsReport report = build_report(tracks, test, s.schema, s.strategy, a.events.empty() ? nullptr : &events);

  ensure_dir(a.out);
  const fs::path dir(a.out);
  write_json(dir / "report.json", report.to_json());
  write_text(dir / "report.txt", report.render_text());
  write_trace(tracks, dir / "trace.jsonl");
  out << report.render_text();
  return 0;
}

// --- compare ----------------------------------------------------------------

struct CompareArgs {
  std::vector<std::string> checkpoints;
  std::string schema, test, out;
};

int cmd_compare(const CompareArgs& a, std::ostream& out) {
  for (const auto& c : a.checkpoints) {
    if (!fs::exists(c)) throw ConfigError("missing checkpoint " + c);
  }
  std::optional<Schema> given;
  if (!a.schema.empty()) given = parse_schema(a.schema);
  std::vector<RunScore> runs;
  std::optional<std::vector<Dialogue>> test;
  for (const auto& c : a.checkpoints) {
    const json cj = read_json_file(c);
    Model<float> model = checkpoint_from_json(cj, given ? &*given : nullptr);
    if (!test) test = parse_dialogues(a.test, model.schema());
    ModelPredictor predictor(model);
    TrackOptions opts;
    opts.strategy = model.strategy();
    const auto tracks = track_corpus(predictor, *test, model.schema(), opts);
    RunScore r;
    r.strategy = model.strategy();
    r.seed = cj.contains("train_config") ? cj["train_config"].value("seed", std::uint64_t{0}) : 0;
    r.jga = build_report(tracks, *test, model.schema(), r.strategy).jga;
    spdlog::info("{} seed {}: JGA {:.4f}", to_string(r.strategy), r.seed, r.jga);
    runs.push_back(r);
  }
  const ComparisonTable table = compare_strategies(runs);
  if (!a.out.empty()) {
    ensure_dir(a.out);
    write_json(fs::path(a.out) / "comparison.json", table.to_json());
    write_text(fs::path(a.out) / "comparison.txt", table.render_text());
  }
  out << table.render_text();
  return 0;
}

// --- analyze ----------------------------------------------------------------

struct AnalyzeArgs {
  std::string trace, schema, test, events, strategy = "msp", out;
};

// Regroups a trace file into per-dialogue predicted states.
std::vector<TrackResult> tracks_from_trace(const std::vector<TraceRecord>& records, const Schema& schema) {
  std::vector<TrackResult> tracks;
  const std::size_t n = schema.size();
  std::size_t i = 0;
  while (i < records.size()) {
    TrackResult r;
    r.dialogue_id = records[i].dialogue_id;
    while (i < records.size() && records[i].dialogue_id == r.dialogue_id) {
      if (i + n > records.size()) throw ConfigError("trace ends inside a turn of " + r.dialogue_id);
      DialogueState st(n);
      for (std::size_t k = 0; k < n; ++k, ++i) {
        const TraceRecord& rec = records[i];
        if (rec.dialogue_id != r.dialogue_id || rec.slot != schema.slot(k).name) {
          throw ConfigError("trace record " + std::to_string(i + 1) + " is out of schema order");
        }
        st.values[k] = rec.value;
        r.trace.push_back(rec);
      }
      r.states.push_back(std::move(st));
    }
    tracks.push_back(std::move(r));
  }
  return tracks;
}

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
  const Schema schema = parse_schema(a.schema);
  const auto tracks = tracks_from_trace(read_trace(a.trace), schema);
  const auto corpus = parse_dialogues(a.test, schema);
  std::map<std::string, const Dialogue*> by_id;
  for (const auto& d : corpus) by_id[d.id] = &d;
  std::vector<Dialogue> golds;
  for (const auto& t : tracks) {
    auto it = by_id.find(t.dialogue_id);
    if (it == by_id.end()) throw ConfigError("trace dialogue " + t.dialogue_id + " is not in " + a.test);
    golds.push_back(*it->second);
  }
  std::vector<PhenomenonEvent> events;
  if (!a.events.empty()) events = parse_events(a.events);
  const MetricsReport report =
      build_report(tracks, golds, schema, parse_strategy(a.strategy), a.events.empty() ? nullptr : &events);
  if (!a.out.empty()) {
    ensure_dir(a.out);
    write_json(fs::path(a.out) / "analysis.json", report.to_json());
  }
  out << report.render_text();
  return 0;
}

// --- repl -------------------------------------------------------------------

struct ReplArgs {
  std::string checkpoint, schema;
};

void print_state(std::ostream& out, int turn, const std::vector<TraceRecord>& records) {
  out << "turn " << turn << "\n";
  bool any = false;
  for (const auto& r : records) {
    if (r.value.is_none() && r.disposition == Disposition::none) continue;
    out << "  " << r.slot << " = " << r.value.str() << " (" << to_string(r.disposition) << ")\n";
    any = true;
  }
  if (!any) out << "  (empty state)\n";
}

// Lines alternate agent, user; the state is printed after every user line.
int cmd_repl(const ReplArgs& a, std::istream& in, std::ostream& out) {
  std::optional<Schema> given;
  if (!a.schema.empty()) given = parse_schema(a.schema);
  const Model<float> model = load_checkpoint(a.checkpoint, given ? &*given : nullptr);
  ModelPredictor predictor(model);
  TrackOptions opts;
  opts.strategy = model.strategy();
  TrackingSession session(predictor, model.schema(), opts, "repl");

  std::optional<std::string> agent;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == ":quit") break;
    if (line == ":reset") {
      session.reset("repl");
      agent.reset();
      out << "state cleared\n";
      continue;
    }
    if (!agent) {
      agent = line;
      continue;
    }
    Turn turn;
    turn.agent = *agent;
    turn.user = line;
    turn.agent_tokens = tokenize(turn.agent);
    turn.user_tokens = tokenize(turn.user);
    turn.gold = DialogueState(model.schema().size());
    const auto records = session.step(turn);
    print_state(out, session.turns(), records);
    agent.reset();
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  using K = FlatFlags::Kind;
  CLI::App app{"Mentioned slot pool dialogue state tracker", "msp-dst"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen-data", "Generate a synthetic corpus");
  g->add_option("--config", gen.config, "Flat JSON generator config");
  g->add_option("--out", gen.out, "Output directory")->required();
  gen.flags.add(g, "seed", K::integer, "Generator seed");
  gen.flags.add(g, "dialogues", K::integer, "Number of dialogues");
  for (const char* f : {"correction_rate", "indirect_rate", "distractor_rate", "restate_rate", "dontcare_rate",
                        "filler_rate", "train_fraction", "dev_fraction"}) {
    gen.flags.add(g, f, K::number, "");
  }
  gen.flags.add(g, "domains", K::list, "Comma-separated domains");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a tracker");
  t->add_option("--config", tr.config, "Flat JSON training config");
  t->add_option("--schema", tr.schema, "Schema file")->required();
  t->add_option("--train", tr.train, "Training dialogues (JSONL)")->required();
  t->add_option("--dev", tr.dev, "Development dialogues (JSONL)");
  t->add_option("--out", tr.out, "Output directory")->required();
  for (const char* f : {"strategy", "pool_mode", "preset"}) tr.flags.add(t, f, K::text, "");
  for (const char* f : {"max_len", "pool_capacity", "dim", "heads", "layers", "ffn", "epochs", "patience", "seed"}) {
    tr.flags.add(t, f, K::integer, "");
  }
  for (const char* f : {"alpha", "beta", "gamma", "lr", "warmup"}) tr.flags.add(t, f, K::number, "");
  for (const char* f : {"categorical_heads", "zero_heads"}) tr.flags.add(t, f, K::boolean, "");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Track a corpus and report metrics");
  e->add_option("--config", ev.config, "Flat JSON eval config");
  e->add_option("--checkpoint", ev.checkpoint, "Checkpoint file");
  e->add_option("--schema", ev.schema, "Schema file (checked against the checkpoint)");
  e->add_option("--test", ev.test, "Dialogues to track (JSONL)")->required();
  e->add_option("--events", ev.events, "Phenomenon events (JSONL) for the inherit analysis");
  e->add_option("--out", ev.out, "Output directory")->required();
  e->add_flag("--oracle", ev.oracle, "Use gold labels instead of a model");
  ev.flags.add(e, "strategy", K::text, "");
  ev.flags.add(e, "pool_mode", K::text, "");
  ev.flags.add(e, "noise_rate", K::number, "Forced-noise rate");
  ev.flags.add(e, "noise_seed", K::integer, "Forced-noise seed (defaults to --seed)");
  ev.flags.add(e, "seed", K::integer, "");

  CompareArgs cmp;
  auto* c = app.add_subcommand("compare", "Compare checkpoints across strategies and seeds");
  c->add_option("--checkpoints", cmp.checkpoints, "Checkpoint files")->required();
  c->add_option("--test", cmp.test, "Dialogues to track (JSONL)")->required();
  c->add_option("--schema", cmp.schema, "Schema file");
  c->add_option("--out", cmp.out, "Output directory");

  AnalyzeArgs an;
  auto* z = app.add_subcommand("analyze", "Error and inheritance analysis of a trace");
  z->add_option("--trace", an.trace, "Trace file from eval")->required();
  z->add_option("--schema", an.schema, "Schema file")->required();
  z->add_option("--test", an.test, "Gold dialogues (JSONL)")->required();
  z->add_option("--events", an.events, "Phenomenon events (JSONL)");
  z->add_option("--strategy", an.strategy, "Strategy label of the report");
  z->add_option("--out", an.out, "Output directory");

  ReplArgs rp;
  auto* r = app.add_subcommand("repl", "Interactive tracking: agent and user lines alternate");
  r->add_option("--checkpoint", rp.checkpoint, "Checkpoint file")->required();
  r->add_option("--schema", rp.schema, "Schema file");

  setup_logging(err);
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& pe) {
    return app.exit(pe, out, err) == 0 ? 0 : 2;
  }

  try {
    if (*g) return cmd_gen_data(gen, out);
    if (*t) return cmd_train(tr, out);
    if (*e) return cmd_eval(ev, out);
    if (*c) return cmd_compare(cmp, out);
    if (*z) return cmd_analyze(an, out);
    if (*r) return cmd_repl(rp, in, out);
  } catch (const ConfigError& ex) {
    err << "error: " << ex.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace msp::cli
