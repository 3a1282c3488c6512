#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "resalloc/liveness.hpp"
#include "resalloc/serial.hpp"
#include "resalloc/simulator.hpp"

namespace {

using nlohmann::json;
using namespace resalloc;

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitUsage = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Trace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_trace(in);
}

void apply_mutations(ScenarioConfig& cfg,
                     const std::vector<std::string>& mutations) {
  for (const std::string& m : mutations) {
    if (m == "line25") cfg.mutation.drop_line25_guard = true;
    else if (m == "prom") cfg.mutation.drop_prom_guard = true;
    else throw CLI::ValidationError("--mutate", "unknown mutation " + m);
  }
}

json stats_to_json(const RunStats& st) {
  json j;
  j["cs_entries"] = st.cs_entries;
  j["aborts"] = st.aborts;
  j["max_off21_rounds"] = st.max_off21_rounds;
  j["max_void_occupancy"] = st.max_void_occupancy;
  j["overfull_channels"] = st.overfull_channels;
  j["max_enabled_age"] = st.max_enabled_age;
  j["max_sf32_rounds"] = st.max_sf32_rounds;
  j["rounds"] = st.rounds;
  j["idle_rounds"] = st.idle_rounds;
  j["completed_passages"] = st.messages.completed_passages;
  j["settled_passages"] = st.messages.settled_passages;
  j["nonconforming_passages"] = st.messages.nonconforming;
  return j;
}

int cmd_simulate(const std::string& scenario_path,
                 std::optional<long long> seed,
                 std::optional<long long> steps, const std::string& out_path,
                 const std::string& stats_path,
                 const std::vector<std::string>& mutations, bool as_json) {
  ScenarioConfig cfg = parse_scenario(read_file(scenario_path));
  if (seed) cfg.seed = static_cast<std::uint64_t>(*seed);
  if (steps) cfg.max_steps = *steps;
  apply_mutations(cfg, mutations);

  RunResult res = run(cfg);
  {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    write_trace(out, res.trace);
  }
  if (!stats_path.empty()) {
    std::ofstream out(stats_path);
    if (!out) throw std::runtime_error("cannot write " + stats_path);
    out << stats_to_json(res.stats).dump(2) << "\n";
  }

  bool bad = res.trace.status == TerminalStatus::kViolation;
  if (as_json) {
    json j;
    j["status"] = to_string(res.trace.status);
    j["steps"] = res.trace.records.size();
    j["rounds"] = res.trace.rounds;
    j["final_hash"] = hash_to_hex(res.trace.final_hash);
    j["trace"] = out_path;
    if (res.trace.violation) j["violation"] = res.trace.violation->describe();
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "simulate: " << res.trace.records.size() << " steps, "
              << res.trace.rounds << " rounds, status "
              << to_string(res.trace.status) << ", trace " << out_path << "\n";
  }
  if (bad) {
    std::cerr << "violation: " << res.trace.violation->describe() << "\n";
    return kExitViolation;
  }
  return kExitOk;
}

int cmd_explore(const std::string& scenario_path,
                std::optional<long long> max_states,
                std::optional<long long> max_depth,
                const std::string& liveness,
                const std::vector<std::string>& mutations, bool as_json) {
  ScenarioConfig cfg = parse_scenario(read_file(scenario_path));
  if (max_states) cfg.explore_max_states = *max_states;
  if (max_depth) cfg.explore_max_depth = static_cast<int>(*max_depth);
  apply_mutations(cfg, mutations);

  ExploreOptions opts;
  if (liveness == "all") opts.liveness = ExploreOptions::Liveness::kAllStates;

  ExplorationReport rep = explore(cfg, opts);
  if (as_json) {
    json j;
    j["states"] = rep.states;
    j["transitions"] = rep.transitions;
    j["depth"] = rep.depth_reached;
    j["complete"] = rep.complete;
    j["terminal_states"] = rep.terminals.size();
    json viols = json::array();
    for (const auto& v : rep.violations) viols.push_back(v.describe());
    j["violations"] = viols;
    j["liveness_failures"] = rep.liveness_failures;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "explore: " << rep.states << " states, " << rep.transitions
              << " transitions, depth " << rep.depth_reached
              << (rep.complete ? ", complete" : ", bound exceeded")
              << ", terminals " << rep.terminals.size() << "\n";
    for (const auto& v : rep.violations)
      std::cout << "violation: " << v.describe() << "\n";
    for (const auto& f : rep.liveness_failures)
      std::cout << "liveness: " << f << "\n";
  }
  return rep.ok() ? kExitOk : kExitViolation;
}

int cmd_check_trace(const std::string& trace_path, bool as_json) {
  Trace trace = load_trace(trace_path);
  ScenarioConfig cfg = parse_scenario(trace.scenario_text);

  std::string why;
  if (!check_unless(trace, &why)) {
    std::cerr << "check-trace: unless check failed: " << why << "\n";
    return kExitViolation;
  }

  GlobalState st = initial_state(cfg.jm, cfg.process_count);
  std::int64_t expect_index = 0;
  for (const TraceRecord& rec : trace.records) {
    if (rec.index != expect_index++) {
      std::cerr << "check-trace: record indices not consecutive at "
                << rec.index << "\n";
      return kExitViolation;
    }
    if (!enabled(cfg.jm, st, rec.step, cfg.mutation)) {
      std::cerr << "check-trace: step " << rec.index
                << " not enabled during replay: " << to_string(rec.step)
                << "\n";
      return kExitViolation;
    }
    if (rec.consumed) {
      const MessageValue* expect = nullptr;
      MessageValue tmp;
      switch (rec.step.key) {
        case MessageKey::kNotify:
          tmp = *st.net.notify(rec.step.peer, rec.step.actor);
          expect = &tmp;
          break;
        case MessageKey::kWelcome:
          tmp = *st.net.welcome(rec.step.peer, rec.step.actor);
          expect = &tmp;
          break;
        case MessageKey::kAsklist:
          tmp = *st.net.asklist(rec.step.peer, rec.step.actor);
          expect = &tmp;
          break;
        case MessageKey::kLower:
          tmp = *st.net.lower(rec.step.peer, rec.step.actor);
          expect = &tmp;
          break;
        case MessageKey::kAnswer:
          tmp = *st.net.answer(rec.step.peer, rec.step.actor);
          expect = &tmp;
          break;
        default:
          break;
      }
      if (expect && !(*expect == *rec.consumed)) {
        std::cerr << "check-trace: step " << rec.index
                  << " recorded payload differs from channel content\n";
        return kExitViolation;
      }
    }
    apply(cfg.jm, st, rec.step, nullptr, cfg.mutation);
    if (rec.hash && *rec.hash != state_hash(st)) {
      std::cerr << "check-trace: state hash mismatch after step " << rec.index
                << "\n";
      return kExitViolation;
    }
  }
  if (trace.final_hash != state_hash(st)) {
    std::cerr << "check-trace: final state hash mismatch\n";
    return kExitViolation;
  }
  std::vector<Violation> vs = check_all(cfg.jm, st);
  bool claims_violation = trace.status == TerminalStatus::kViolation;
  if (claims_violation && !trace.violation) {
    std::cerr << "check-trace: violation status without violation record\n";
    return kExitViolation;
  }
  if (!claims_violation && !vs.empty()) {
    std::cerr << "check-trace: final state violates " << vs.front().describe()
              << " but trace claims " << to_string(trace.status) << "\n";
    return kExitViolation;
  }
  if (claims_violation && vs.empty() &&
      trace.violation->step_index <
          static_cast<std::int64_t>(trace.records.size())) {
    // A claimed violation at a recorded step must show in the final state;
    // only a send-precondition failure aborts before its step is recorded.
    std::cerr << "check-trace: claimed violation not reproducible\n";
    return kExitViolation;
  }
  if (as_json) {
    json j;
    j["ok"] = true;
    j["steps"] = trace.records.size();
    j["status"] = to_string(trace.status);
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "check-trace: ok (" << trace.records.size()
              << " steps, status " << to_string(trace.status) << ")\n";
  }
  return kExitOk;
}

int cmd_stats(const std::string& trace_path, bool as_json) {
  Trace trace = load_trace(trace_path);
  ScenarioConfig cfg = parse_scenario(trace.scenario_text);
  MessageStatsReport ms = message_stats(trace);

  std::vector<std::int64_t> cs(static_cast<size_t>(cfg.process_count), 0);
  std::vector<std::int64_t> aborts(static_cast<size_t>(cfg.process_count), 0);
  for (const TraceRecord& rec : trace.records) {
    if (rec.step.kind == StepKind::kForward && rec.step.line == 26)
      ++cs[static_cast<size_t>(rec.step.actor)];
    if (rec.step.kind == StepKind::kAbort)
      ++aborts[static_cast<size_t>(rec.step.actor)];
  }
  if (as_json) {
    json j;
    j["steps"] = trace.records.size();
    j["status"] = to_string(trace.status);
    j["cs_entries"] = cs;
    j["aborts"] = aborts;
    j["passages"] = ms.passages.size();
    j["completed_passages"] = ms.completed_passages;
    j["settled_passages"] = ms.settled_passages;
    j["nonconforming"] = ms.nonconforming;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "steps " << trace.records.size() << ", status "
              << to_string(trace.status) << "\n";
    for (int p = 0; p < cfg.process_count; ++p) {
      std::cout << "p" << p << ": cs_entries " << cs[static_cast<size_t>(p)]
                << ", aborts " << aborts[static_cast<size_t>(p)] << "\n";
    }
    std::cout << "passages " << ms.passages.size() << " (completed "
              << ms.completed_passages << ", settled " << ms.settled_passages
              << ")\n";
    for (const auto& line : ms.nonconforming)
      std::cout << "nonconforming: " << line << "\n";
  }
  return ms.nonconforming.empty() ? kExitOk : kExitViolation;
}

int cmd_theorem2(const std::string& trace_path,
                 std::optional<long long> state_index, bool as_json) {
  Trace trace = load_trace(trace_path);
  ScenarioConfig cfg = parse_scenario(trace.scenario_text);
  GlobalState st = replay(trace, state_index ? *state_index : -1);

  Mask silent = silent_set(cfg.jm, st);
  Mask all = cfg.process_count == 64
                 ? ~Mask{0}
                 : bits::unit(cfg.process_count) - 1;
  LockedSetReport whole = check_theorem2(cfg.jm, st, all);
  auto violating = theorem2_violating_set(cfg.jm, st);

  if (as_json) {
    json j;
    j["silent"] = mask_to_string(silent, 'p');
    j["locked"] = mask_to_string(whole.locked, 'p');
    j["whole_set_silent"] = whole.silent;
    j["ok"] = !violating.has_value();
    if (violating) j["violating_set"] = mask_to_string(*violating, 'p');
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "silent: " << mask_to_string(silent, 'p') << "\n";
    if (violating) {
      std::cout << "locked set with no outgoing conflict: "
                << mask_to_string(*violating, 'p') << "\n";
    } else {
      std::cout << "no locked set without an outgoing conflict\n";
    }
  }
  return violating ? kExitViolation : kExitOk;
}

int cmd_starve(const std::string& trace_path, long long budget, bool as_json) {
  Trace trace = load_trace(trace_path);
  StarvationReport rep = monitor_starvation(trace, budget);
  if (as_json) {
    json j;
    j["max_off21_rounds"] = rep.max_off21_rounds;
    json flags = json::array();
    for (const auto& f : rep.flags) {
      json fj;
      fj["process"] = f.p;
      fj["start_round"] = f.start_round;
      fj["end_round"] = f.end_round;
      if (f.witness) fj["witness"] = *f.witness;
      flags.push_back(fj);
    }
    j["flags"] = flags;
    j["ok"] = rep.ok();
    std::cout << j.dump(2) << "\n";
  } else {
    for (size_t p = 0; p < rep.max_off21_rounds.size(); ++p) {
      std::cout << "p" << p << ": max rounds off idle "
                << rep.max_off21_rounds[p] << "\n";
    }
    for (const auto& f : rep.flags) {
      std::cout << "flagged p" << f.p << " rounds " << f.start_round << ".."
                << f.end_round;
      if (f.witness)
        std::cout << " witness p" << *f.witness << " (eternal conflict)";
      std::cout << "\n";
    }
  }
  return rep.ok() ? kExitOk : kExitViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator and checker for a distributed multi-level "
               "resource-allocation protocol"};
  app.require_subcommand(1);

  std::string scenario_path, trace_path, out_path = "out.trace", stats_path;
  std::optional<long long> seed, steps, max_states, max_depth, state_index;
  std::vector<std::string> mutations;
  std::string liveness = "terminal";
  long long budget = 0;
  bool as_json = false;
  app.add_flag("--json", as_json, "structured output");

  auto* sim = app.add_subcommand("simulate", "run a seeded execution");
  sim->add_option("scenario", scenario_path)->required();
  sim->add_option("--seed", seed);
  sim->add_option("--steps", steps);
  sim->add_option("-o,--out", out_path, "trace output path");
  sim->add_option("--stats", stats_path, "write run statistics as JSON");
  sim->add_option("--mutate", mutations, "disable a guard: line25 | prom");

  auto* exp = app.add_subcommand("explore", "enumerate reachable states");
  exp->add_option("scenario", scenario_path)->required();
  exp->add_option("--max-states", max_states);
  exp->add_option("--max-depth", max_depth);
  exp->add_option("--liveness", liveness)
      ->check(CLI::IsMember({"terminal", "all"}));
  exp->add_option("--mutate", mutations, "disable a guard: line25 | prom");

  auto* chk = app.add_subcommand("check-trace", "replay and verify a trace");
  chk->add_option("trace", trace_path)->required();

  auto* sts = app.add_subcommand("stats", "per-passage message statistics");
  sts->add_option("trace", trace_path)->required();

  auto* th2 = app.add_subcommand("theorem2", "locked-set analysis of a state");
  th2->add_option("trace", trace_path)->required();
  th2->add_option("--state", state_index, "replay up to this step index");

  auto* stv = app.add_subcommand("starve", "starvation monitor over a trace");
  stv->add_option("trace", trace_path)->required();
  stv->add_option("--budget", budget, "rounds a process may stay off idle")
      ->required();

  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (sim->parsed())
      return cmd_simulate(scenario_path, seed, steps, out_path, stats_path,
                          mutations, as_json);
    if (exp->parsed())
      return cmd_explore(scenario_path, max_states, max_depth, liveness,
                         mutations, as_json);
    if (chk->parsed()) return cmd_check_trace(trace_path, as_json);
    if (sts->parsed()) return cmd_stats(trace_path, as_json);
    if (th2->parsed()) return cmd_theorem2(trace_path, state_index, as_json);
    if (stv->parsed()) return cmd_starve(trace_path, budget, as_json);
  } catch (const ScenarioParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const TraceParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
