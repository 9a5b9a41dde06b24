#include "statewalk/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "statewalk/coverage.hpp"
#include "statewalk/errors.hpp"
#include "statewalk/explorer.hpp"
#include "statewalk/reproducer.hpp"
#include "statewalk/server.hpp"
#include "statewalk/sim_env.hpp"

namespace statewalk {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

struct Options {
  std::string app;
  std::string output = "both";
  std::optional<std::uint64_t> seed;
  double threshold = 0.8;
  std::int64_t budget_ms = 60'000;
  std::size_t max_events = 100'000;
  std::optional<std::size_t> target;
  std::string out_dir = "out";
  std::string model_path;
  std::string ip = std::string(ApiServer::kDefaultHost);
  int port = ApiServer::kDefaultPort;
  std::string static_dir;
  std::vector<std::string> detect_tags;
  std::size_t max_paths = 64;
  bool naive = false;
  std::int64_t duration_ms = 0;
};

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

SimAppSpec load_app(const Options& o) {
  SimAppSpec spec = load_app_source(o.app);
  if (o.seed) spec.seed = *o.seed;
  return spec;
}

EngineConfig engine_config(const Options& o) {
  EngineConfig c;
  c.similarity_threshold = o.threshold;
  c.time_budget = std::chrono::milliseconds(o.budget_ms);
  c.max_events = o.max_events;
  c.tolerant_replay = !o.naive;
  return c;
}

struct ExploreRun {
  ExploreResult result;
  std::vector<std::unique_ptr<TagDetector>> hooks;
};

ExploreRun run_exploration(const SimAppSpec& spec, const Options& o, const ProgressFn& progress) {
  ExploreRun run;
  std::vector<DetectorHook*> hooks;
  for (const auto& tag : o.detect_tags) {
    run.hooks.push_back(std::make_unique<TagDetector>(tag));
    hooks.push_back(run.hooks.back().get());
  }
  SimEnvironment env(spec);
  run.result = explore(env, engine_config(o), hooks, progress);
  const SpecTotals totals = spec_totals(spec);
  run.result.coverage.totals = CoverageTotals{totals.reachable_screens, totals.reachable_transitions};
  return run;
}

json findings_json(const std::vector<Finding>& findings) {
  json arr = json::array();
  for (const auto& f : findings) {
    arr.push_back({{"hook", f.hook}, {"state", f.state.ordinal}, {"finding", f.message}});
  }
  return arr;
}

int cmd_explore(const Options& o, std::ostream& out, std::ostream& err) {
  const SimAppSpec spec = load_app(o);
  const OutputFormat format = output_format_from_string(o.output);
  ExploreRun run = run_exploration(spec, o, {});
  const auto& r = run.result;
  const fs::path dir(o.out_dir);

  write_file(dir / "model.json", r.model.to_json().dump(2) + "\n");
  ReportBundle bundle = emit_report(r.coverage, format, r.model);
  if (bundle.graph) {
    write_file(dir / "graph.json", bundle.graph->dump(2) + "\n");
    write_file(dir / "graph.dot", *bundle.dot);
    for (const auto& s : r.model.states()) {
      write_file(dir / StateModel::snapshot_ref(s.id), to_json(s.snapshot).dump(2) + "\n");
    }
  }
  if (bundle.csv) {
    write_file(dir / "coverage.csv", *bundle.csv);
    write_file(dir / "summary.json", bundle.summary->dump(2) + "\n");
  }
  if (!o.detect_tags.empty()) {
    write_file(dir / "findings.json", findings_json(r.findings).dump(2) + "\n");
    for (const auto& f : r.findings) out << "finding: " << f.message << "\n";
  }
  out << "explored " << spec.name << ": " << r.model.state_count() << " states, "
      << r.model.transition_count() << " transitions, " << r.stats.forward_events
      << " events -> " << dir.string() << "\n";
  if (r.stats.aborted) {
    err << "exploration aborted: " << r.stats.abort_reason << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_reproduce(const Options& o, std::ostream& out, std::ostream& err) {
  const SimAppSpec spec = load_app(o);
  StateModel model;
  if (!o.model_path.empty()) {
    model = StateModel::from_json(json::parse(read_file(o.model_path)));
  } else {
    model = run_exploration(spec, o, {}).result.model;
  }
  StateId target{*o.target};
  if (!model.contains(target)) {
    err << "unknown state " << to_string(target) << " (model has " << model.state_count()
        << " states)\n";
    return kExitFailure;
  }
  SimEnvironment env(spec);
  ReproduceResult result = reproduce(env, model, target, engine_config(o), o.max_paths);
  out << to_json(result).dump(2) << "\n";
  return result.success() ? kExitOk : kExitFailure;
}

int cmd_serve(const Options& o, std::ostream& out, std::ostream&) {
  const SimAppSpec spec = load_app(o);
  const EngineConfig config = engine_config(o);
  auto model = std::make_shared<Published<StateModel>>();
  auto coverage = std::make_shared<Published<CoverageLog>>();
  auto live = std::make_shared<std::atomic<bool>>(false);

  ServerSources sources;
  sources.model = model;
  sources.coverage = coverage;
  sources.live = [live] { return live->load(); };
  sources.reproduce = [spec, config, max_paths = o.max_paths](const StateModel& m, StateId t) {
    SimEnvironment env(spec);
    return reproduce(env, m, t, config, max_paths);
  };
  if (!o.static_dir.empty()) sources.static_dir = fs::path(o.static_dir);

  std::thread explorer;
  if (!o.model_path.empty()) {
    model->publish(StateModel::from_json(json::parse(read_file(o.model_path))));
  } else {
    live->store(true);
    explorer = std::thread([&, spec] {
      auto run = run_exploration(spec, o, [&](const StateModel& m, const CoverageLog& c) {
        model->publish(m);
        coverage->publish(c);
      });
      model->publish(run.result.model);
      coverage->publish(run.result.coverage);
      live->store(false);
    });
  }

  ApiServer server(sources);
  const int port = server.bind(o.ip, o.port);
  server.start();
  out << "serving on http://" << o.ip << ":" << port << std::endl;

  g_interrupted = false;
  auto previous_int = std::signal(SIGINT, on_signal);
  auto previous_term = std::signal(SIGTERM, on_signal);
  const auto start = std::chrono::steady_clock::now();
  while (!g_interrupted) {
    if (o.duration_ms > 0 && std::chrono::steady_clock::now() - start >=
                                 std::chrono::milliseconds(o.duration_ms)) {
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  std::signal(SIGINT, previous_int);
  std::signal(SIGTERM, previous_term);
  server.stop();
  if (explorer.joinable()) explorer.join();
  return kExitOk;
}

int cmd_corpus(std::ostream& out) {
  for (const auto& name : corpus_names()) {
    const SimAppSpec spec = load_corpus_app(name);
    const SpecTotals totals = spec_totals(spec);
    out << "corpus:" << name << "\t" << spec.screen_count() << " screens, "
        << totals.reachable_screens << " reachable"
        << (spec.noiseless() ? "" : ", noisy") << "\n";
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Model-based app explorer and test-case reproducer", "statewalk"};
  app.require_subcommand(1);
  Options o;

  auto add_engine = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "Override the app's noise seed");
    sub->add_option("--threshold", o.threshold, "Similarity threshold for tolerant replay")
        ->check(CLI::Range(0.0, 1.0));
    sub->add_option("--budget-ms", o.budget_ms, "Exploration time budget")
        ->check(CLI::PositiveNumber);
    sub->add_option("--max-events", o.max_events, "Exploration event budget")
        ->check(CLI::PositiveNumber);
    sub->add_option("--detect-tag", o.detect_tags, "Flag states showing a node with this tag");
  };

  auto* explore_cmd = app.add_subcommand("explore", "Explore an app and write the model");
  explore_cmd->add_option("app", o.app, "App spec path or corpus:<name>")->required();
  explore_cmd->add_option("--output", o.output, "graph, report or both")
      ->check(CLI::IsMember({"graph", "report", "both"}));
  explore_cmd->add_option("--out-dir", o.out_dir, "Output directory");
  add_engine(explore_cmd);

  auto* reproduce_cmd = app.add_subcommand("reproduce", "Reproduce a model state");
  reproduce_cmd->add_option("app", o.app, "App spec path or corpus:<name>")->required();
  reproduce_cmd->add_option("--target", o.target, "State number to reach")->required();
  reproduce_cmd->add_option("--model", o.model_path,
                            "model.json from a prior exploration (explores first if absent)");
  reproduce_cmd->add_option("--max-paths", o.max_paths, "Test cases to try")
      ->check(CLI::PositiveNumber);
  reproduce_cmd->add_flag("--naive", o.naive, "Exact-hash replay without locator re-resolution");
  add_engine(reproduce_cmd);

  auto* serve_cmd = app.add_subcommand("serve", "Serve the model, coverage and reproduce jobs");
  serve_cmd->add_option("app", o.app, "App spec path or corpus:<name>")->required();
  serve_cmd->add_option("--model", o.model_path, "Serve this model instead of exploring live");
  serve_cmd->add_option("--ip", o.ip, "Bind address");
  serve_cmd->add_option("--port", o.port, "Bind port")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--static-dir", o.static_dir, "Directory holding the web UI");
  serve_cmd->add_option("--duration-ms", o.duration_ms, "Stop after this long")->group("");
  add_engine(serve_cmd);

  app.add_subcommand("corpus", "List bundled simulated apps");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n" << (app.get_subcommands().empty()
                                      ? app.help()
                                      : app.get_subcommands().front()->help());
    return kExitUsage;
  }

  try {
    if (explore_cmd->parsed()) return cmd_explore(o, out, err);
    if (reproduce_cmd->parsed()) return cmd_reproduce(o, out, err);
    if (serve_cmd->parsed()) return cmd_serve(o, out, err);
    return cmd_corpus(out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace statewalk
