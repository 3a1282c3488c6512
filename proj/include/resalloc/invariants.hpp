#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "resalloc/protocol.hpp"

namespace resalloc {

// The constituent invariants and derived safety predicates checked after
// every transition. Rq* are the resource-allocation requirements, Iq* the
// outer protocol, Jq* the inner protocol, Kq*/Lq*/Mq* the registration
// machinery, Nq* the progress support facts, Waq* the waiting invariants.
enum class InvariantId : int {
  kRq0 = 0, kRq1, kRq2, kRq1a, kRq2a,
  kIq0, kIq1, kIq2, kIq3, kIq4, kIq5, kIq6, kIq7, kIq8, kIq2a, kIq7a,
  kJq0, kJq1, kJq2, kJq3, kJq4, kJq5, kJq6, kJq7,
  kKq0, kKq1, kKq2, kKq3, kKq4, kKq5, kKq6, kKq7, kKq0a,
  kLq0, kLq1, kLq2, kLq3, kLq4, kLq5, kLq6, kLq7, kLq8,
  kMq0, kMq1, kMq2, kMq3, kMq0a,
  kNq0, kNq1, kNq2, kNq3, kNq4,
  kWaq0, kWaq1, kWaq2, kWaq3,
};
constexpr int kInvariantCount = 56;

const char* invariant_name(InvariantId id);
bool parse_invariant_id(const std::string& text, InvariantId* out);
std::span<const InvariantId> all_invariants();

struct Violation {
  InvariantId id = InvariantId::kRq0;
  // Witness bindings; -1 where the formula has no such free variable.
  int q = -1;
  int r = -1;
  int s = -1;
  std::int64_t step_index = -1;

  std::string describe() const;
};

/// Evaluates one invariant over the whole finite universe; returns the first
/// violating witness in (q, r, s) order, or nothing.
std::optional<Violation> check(const JobModelConfig& cfg,
                               const GlobalState& st, InvariantId id);

/// Evaluates the whole catalogue; an empty result means the constituent
/// invariant conjunction holds in this state.
std::vector<Violation> check_all(const JobModelConfig& cfg,
                                 const GlobalState& st);

// Disabledness of the delayed answers for the pair (q, r): sending ack
// respectively gra from q to r cannot happen in this state.
bool disabled_after(const GlobalState& st, ProcessId q, ProcessId r);
bool disabled_prom(const JobModelConfig& cfg, const GlobalState& st,
                   ProcessId q, ProcessId r);

}  // namespace resalloc
