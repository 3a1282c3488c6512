#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "resalloc/protocol.hpp"
#include "resalloc/trace.hpp"

namespace resalloc {

/// A process is silent when it cannot make progress and nothing can reach
/// it: its forward, lowering and delayed-answer steps are disabled, no
/// message involving it is in transit in either direction, and no other
/// process holds an enabled delayed answer towards it.
bool is_silent(const JobModelConfig& cfg, const GlobalState& st, ProcessId p);

/// Silent and not at the idle line.
bool is_locked(const JobModelConfig& cfg, const GlobalState& st, ProcessId p);

/// Silent processes of the state, as a mask.
Mask silent_set(const JobModelConfig& cfg, const GlobalState& st);

struct LockedSetReport {
  Mask w = 0;
  bool silent = false;
  Mask locked = 0;
  // Pairs (q in W, r outside W) whose jobs conflict in this state.
  std::vector<std::pair<ProcessId, ProcessId>> conflict_edges;
  // False only when W is silent, contains a locked process, and no conflict
  // edge leaves it.
  bool theorem_ok = true;
};

/// Evaluates the locked-set assertion for one candidate set W.
LockedSetReport check_theorem2(const JobModelConfig& cfg,
                               const GlobalState& st, Mask w);

/// Searches every nonempty W at once: a violating W exists iff some locked
/// silent process has its whole conflict-graph component silent. Returns a
/// violating W when found.
std::optional<Mask> theorem2_violating_set(const JobModelConfig& cfg,
                                           const GlobalState& st);

/// Simplified waiting facts that must hold for a silent process q: empty
/// wack, and every prio/need member pinned in the protocol and in conflict.
/// Returns a description of the first failure.
std::optional<std::string> check_wax(const JobModelConfig& cfg,
                                     const GlobalState& st, ProcessId q);

struct StarvationFlag {
  ProcessId p = 0;
  std::int64_t start_round = 0;   // round the process left the idle line
  std::int64_t over_round = 0;    // round the budget was exceeded
  std::int64_t end_round = 0;
  // A peer whose conflict with p holds at every recorded state from
  // over_round to the end of the stretch, when one exists.
  std::optional<ProcessId> witness;
};

struct StarvationReport {
  std::vector<std::int64_t> max_off21_rounds;  // per process
  std::vector<StarvationFlag> flags;
  // Under fair scheduling with no aborts, a flag without a witness is a
  // genuine failure.
  bool ok() const {
    for (const auto& f : flags)
      if (!f.witness) return false;
    return true;
  }
};

/// Flags processes that stay off the idle line longer than budget_rounds
/// scheduler rounds and, for each flag, looks for an eternal-conflict
/// witness over the flagged suffix of the trace.
StarvationReport monitor_starvation(const Trace& trace,
                                    std::int64_t budget_rounds);

/// Control-flow containment: the main loop advances 21..28 cyclically with
/// abort edges 24/25/26 -> 21, and the lowering thread cycles 31..33. Checks
/// the recorded step lines alone, without replay, so spliced traces fail.
bool check_unless(const Trace& trace, std::string* diagnostic = nullptr);

}  // namespace resalloc
