#pragma once

#include <compare>
#include <vector>

#include "resalloc/bits.hpp"
#include "resalloc/jobs.hpp"
#include "resalloc/network.hpp"

namespace resalloc {

// Private state of one process. The main loop runs lines 21..28 (21 = idle,
// 27 = critical section); the lowering thread runs lines 31..33. nbh0 is the
// neighbourhood snapshot taken at line 25.
struct ProcessState {
  int pc = 21;
  int pcr = 31;
  Job job;
  Mask nbh = 0, nbh0 = 0, prio = 0, wack = 0, after = 0, away = 0, need = 0,
       prom = 0, pack = 0;
  std::vector<Job> copy;  // per peer; empty job = nothing recorded
  LevelFn fun, news;      // per site registration levels
  Mask reglist = 0, curlist = 0;  // site sets

  auto operator<=>(const ProcessState&) const = default;
};

// A site only keeps the registration level of each client (0 = unregistered)
// and answers queries.
struct SiteState {
  std::vector<Level> list;  // per process
  auto operator<=>(const SiteState&) const = default;
};

struct GlobalState {
  std::vector<ProcessState> procs;
  std::vector<SiteState> sites;
  NetworkState net;

  int process_count() const { return static_cast<int>(procs.size()); }
  int site_count() const { return static_cast<int>(sites.size()); }
};

GlobalState initial_state(const JobModelConfig& cfg, int process_count);

enum class StepKind : int {
  kNewJob = 0,  // environment, line 21
  kNewNews,     // environment, line 31
  kAbort,       // environment, lines 24/25/26
  kForward,     // lines 22..28
  kLower,       // lines 32/33
  kRecv,        // actor receives notify/withdraw/ack/gra/hello/welcome
  kAfter,       // delayed ack from actor to peer
  kProm,        // delayed grant from actor to peer
  kListen,      // actor receives answer/done from site peer
  kSiteRecv,    // site actor receives asklist/lower from process peer
};

enum class StepClass { kEnv, kFwd, kTrig, kLow };

// One atomic transition. All message sends inside a body happen within the
// same transition.
struct StepId {
  StepKind kind = StepKind::kForward;
  int actor = 0;  // process id, or site id for kSiteRecv
  int peer = -1;  // sender for message steps, target for after/prom
  int line = 0;   // kForward 22..28, kAbort 24..26, kLower 32..33
  MessageKey key = MessageKey::kNotify;
  Job job;        // kNewJob payload
  LevelFn news;   // kNewNews payload

  auto operator<=>(const StepId&) const = default;
  bool is_environment() const {
    return kind == StepKind::kNewJob || kind == StepKind::kNewNews ||
           kind == StepKind::kAbort;
  }
};

StepClass step_class(const StepId& step);

StepId new_job_step(ProcessId p, Job j);
StepId new_news_step(ProcessId p, LevelFn news);
StepId abort_step(ProcessId p, int line);
StepId forward_step(ProcessId p, int line);
StepId lower_step(ProcessId p, int line);
StepId recv_step(ProcessId p, ProcessId from, MessageKey key);
StepId after_step(ProcessId p, ProcessId q);
StepId prom_step(ProcessId p, ProcessId q);
StepId listen_step(ProcessId p, SiteId from, MessageKey key);
StepId site_recv_step(SiteId s, ProcessId from, MessageKey key);

struct StepNotEnabled : std::runtime_error {
  explicit StepNotEnabled(const std::string& what);
};

// Fault-injection hooks for sensitivity checks: each one weakens a guard the
// protocol relies on, so explorations under a mutation must surface a safety
// violation.
struct Mutation {
  bool drop_line25_guard = false;  // line 25 proceeds with prio nonempty
  bool drop_prom_guard = false;    // grant whenever the peer is in prom

  bool any() const { return drop_line25_guard || drop_prom_guard; }
};

struct SendEvent {
  MessageKey key;
  int from;
  int to;
};
using SendLog = std::vector<SendEvent>;

/// Guard of one step, per the transition tables.
bool enabled(const JobModelConfig& cfg, const GlobalState& st,
             const StepId& step, const Mutation& mut = {});

/// Executes the step body atomically, in place. Requires enabled(); throws
/// StepNotEnabled otherwise and propagates OverwriteInTransit from sends.
/// A pure function of (state, step): identical inputs give identical results.
void apply(const JobModelConfig& cfg, GlobalState& st, const StepId& step,
           SendLog* log = nullptr, const Mutation& mut = {});

/// All enabled non-environment steps, in a fixed deterministic order.
std::vector<StepId> enabled_steps(const JobModelConfig& cfg,
                                  const GlobalState& st,
                                  const Mutation& mut = {});

inline bool conflict(const JobModelConfig& cfg, const GlobalState& st,
                     ProcessId q, ProcessId r) {
  return conflicting(st.procs[q].job, st.procs[r].job, cfg.K);
}

}  // namespace resalloc
