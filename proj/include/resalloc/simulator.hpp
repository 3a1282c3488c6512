#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "resalloc/invariants.hpp"
#include "resalloc/scenario.hpp"
#include "resalloc/trace.hpp"

namespace resalloc {

struct NeighbourCounts {
  int notify = 0;
  int withdraw = 0;
  int ack = 0;
  int gra = 0;
  int total() const { return notify + withdraw + ack + gra; }
};

// One traversal of the main loop, from the job arrival to the return to the
// idle line (or to an abort). The per-neighbour counts cover the members of
// the line-25 neighbourhood snapshot only; a passage is settled once all
// withdrawals it sent have been acknowledged.
struct Passage {
  ProcessId p = 0;
  std::int64_t started_step = -1;
  std::int64_t entered_cs_step = -1;
  std::int64_t completed_step = -1;
  bool completed = false;
  bool aborted = false;
  bool settled = false;
  Mask nbh0 = 0;
  std::map<ProcessId, NeighbourCounts> counts;
};

struct MessageStatsReport {
  std::vector<Passage> passages;
  std::int64_t completed_passages = 0;
  std::int64_t settled_passages = 0;
  // Settled completed passages with a count differing from the expected
  // 3 messages per lower neighbour and 4 per higher neighbour.
  std::vector<std::string> nonconforming;
};

MessageStatsReport message_stats(const Trace& trace);

struct RunStats {
  std::vector<std::int64_t> cs_entries;            // per process
  std::vector<std::int64_t> aborts;                // per process
  std::vector<std::int64_t> max_off21_rounds;      // per process
  std::int64_t max_void_occupancy = 0;             // across all channels
  std::vector<std::string> overfull_channels;      // any that exceeded 1
  std::int64_t max_enabled_age = 0;   // weak-fairness audit, must stay <= F
  std::int64_t max_sf32_rounds = 0;   // strong-fairness audit for line 32
  std::int64_t rounds = 0;
  std::int64_t idle_rounds = 0;
  MessageStatsReport messages;
};

struct RunResult {
  Trace trace;
  RunStats stats;
};

/// Seeded, deterministic execution: weakly fair scheduling with explicit
/// bound F for the forward/lowering/triggered classes, strong fairness for
/// the lowering step at line 32 when configured, environment steps offered
/// per workload policy, invariants checked per check_every.
RunResult run(const ScenarioConfig& cfg);

struct TerminalReport {
  std::uint64_t hash = 0;
  Mask locked = 0;  // silent processes off the idle line; must be empty
  bool theorem2_ok = true;
  std::string detail;
};

struct ExploreOptions {
  enum class Liveness { kTerminalOnly, kAllStates };
  Liveness liveness = Liveness::kTerminalOnly;
  bool stop_on_violation = true;
  std::function<void(const GlobalState&)> on_state;  // every distinct state
};

struct ExplorationReport {
  std::int64_t states = 0;
  std::int64_t transitions = 0;
  int depth_reached = 0;
  bool complete = true;  // false when a state or depth bound was hit
  std::vector<Violation> violations;
  std::vector<TerminalReport> terminals;
  std::vector<std::string> liveness_failures;  // theorem or waiting-fact breaks
  bool ok() const {
    return violations.empty() && liveness_failures.empty();
  }
};

/// Bounded breadth-first enumeration of every reachable state under the
/// scenario's finite environment choices (candidate jobs, optionally aborts
/// and lower-to-zero). Checks the invariant catalogue on every new state and
/// analyses terminal states for locked sets.
ExplorationReport explore(const ScenarioConfig& cfg,
                          const ExploreOptions& opts = {});

/// State after applying the first `upto` records (all of them when -1) from
/// the initial state of the trace's embedded scenario.
GlobalState replay(const Trace& trace, std::int64_t upto = -1);

}  // namespace resalloc
