#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "resalloc/protocol.hpp"

namespace resalloc {

struct ScenarioParseError : std::runtime_error {
  ScenarioParseError(int line, const std::string& msg)
      : std::runtime_error("scenario line " + std::to_string(line) + ": " +
                           msg),
        line(line) {}
  int line;
};

// Everything a run or an exploration needs, parsed from a scenario file.
// All randomness in a run flows from the single seed.
struct ScenarioConfig {
  JobModelConfig jm;
  int process_count = 0;

  // Workload policy: how the environment offers jobs, aborts and lowering.
  double arrival_prob = 0.25;      // per idle process per round
  double abort_prob24 = 0.0;
  double abort_prob25 = 0.0;
  double abort_prob26 = 0.0;
  double lower_prob = 0.0;         // per process with idle lowering thread
  double random_job_resource_prob = 0.5;
  std::vector<std::vector<Job>> candidate_jobs;  // per process; empty = random

  // Scheduler contract.
  int fairness = 8;                // bound F
  bool strong_fairness_32 = true;
  std::int64_t max_steps = 10000;
  std::uint64_t seed = 1;
  int check_every = 1;             // invariant check period; 1 = every state
  int hash_every = 1000;           // state-hash period in the trace

  // Exploration bounds and bounded environment choices.
  std::int64_t explore_max_states = 1000000;
  int explore_max_depth = 0;       // 0 = unlimited
  bool explore_aborts = false;
  bool explore_lower_to_zero = false;

  // Scheduler test hooks.
  Mask freeze_at_27 = 0;           // processes never scheduled out of the CS
  Mutation mutation;

  const std::vector<Job>& jobs_for(ProcessId p) const {
    return candidate_jobs[static_cast<size_t>(p)];
  }
  bool has_fixed_jobs() const {
    for (const auto& v : candidate_jobs)
      if (!v.empty()) return true;
    return false;
  }
};

/// Parses the versioned flat text format. Throws ScenarioParseError with the
/// offending line number.
ScenarioConfig parse_scenario(const std::string& text);

/// Canonical text form; parse(serialize(c)) == c. Traces embed this.
std::string serialize_scenario(const ScenarioConfig& cfg);

}  // namespace resalloc
