#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "resalloc/bits.hpp"
#include "resalloc/jobs.hpp"

namespace resalloc {

// All in-transit messages. Void keys are modelled as per-channel counters,
// valued keys as single optional slots; a channel is one (key, from, to)
// triple and delivery order between channels is unconstrained.
enum class MessageKey : int {
  kNotify = 0,  // process -> process, carries a Job
  kWithdraw,    // process -> process, void
  kAck,         // process -> process, void
  kGra,         // process -> process, void
  kHello,       // process -> process, void
  kWelcome,     // process -> process, carries a Job (possibly the empty job)
  kAsklist,     // process -> site, carries a level
  kAnswer,      // site -> process, carries a process set
  kLower,       // process -> site, carries a level
  kDone,        // site -> process, void
};
constexpr int kMessageKeyCount = 10;

bool is_valued(MessageKey k);
const char* to_string(MessageKey k);
bool parse_message_key(const std::string& text, MessageKey* out);

// Payload of a valued message: Job for notify/welcome, Level for
// asklist/lower, Mask (process set) for answer.
using MessageValue = std::variant<Job, Level, Mask>;

struct OverwriteInTransit : std::runtime_error {
  OverwriteInTransit(MessageKey k, int from, int to);
  MessageKey key;
  int from, to;
};

struct NothingInTransit : std::runtime_error {
  NothingInTransit(MessageKey k, int from, int to);
  MessageKey key;
  int from, to;
};

class NetworkState {
 public:
  struct Channel {
    MessageKey key;
    int from;
    int to;
    auto operator<=>(const Channel&) const = default;
  };

  NetworkState() = default;
  NetworkState(int process_count, int site_count);

  /// Increments the channel counter. Counts above 1 are representable; the
  /// invariant checker flags them, sending never rejects.
  void send_void(MessageKey k, int from, int to);

  /// Fills the channel slot. Throws OverwriteInTransit when the slot is
  /// occupied; the protocol guarantees this cannot happen, so an occupied
  /// slot signals an implementation bug and is treated as fatal.
  void send_valued(MessageKey k, int from, int to, MessageValue v);

  /// All channels with a message in transit, sorted by (key, from, to).
  std::vector<Channel> deliverable() const;

  /// Removes one message: decrements a void counter, or empties a valued
  /// slot and returns its payload. Throws NothingInTransit when empty.
  std::optional<MessageValue> consume(MessageKey k, int from, int to);

  bool empty() const;
  bool any_touching_process(ProcessId p) const;

  int void_count(MessageKey k, int from, int to) const;
  bool occupied(MessageKey k, int from, int to) const;

  // Typed slot accessors used by the invariant formulas; null/empty when
  // nothing is in transit.
  const Job* notify(ProcessId q, ProcessId r) const;
  const Job* welcome(ProcessId q, ProcessId r) const;
  std::optional<Level> asklist(ProcessId q, SiteId s) const;
  std::optional<Level> lower(ProcessId q, SiteId s) const;
  const Mask* answer(SiteId s, ProcessId q) const;
  int withdraw_count(ProcessId q, ProcessId r) const;
  int ack_count(ProcessId q, ProcessId r) const;
  int gra_count(ProcessId q, ProcessId r) const;
  int hello_count(ProcessId q, ProcessId r) const;
  int done_count(SiteId s, ProcessId q) const;

  int process_count() const { return pc_; }
  int site_count() const { return sc_; }

 private:
  int pp(int f, int t) const { return f * pc_ + t; }
  int ps(int p, int s) const { return p * sc_ + s; }
  int sp(int s, int p) const { return s * pc_ + p; }

  int pc_ = 0, sc_ = 0;
  std::vector<std::uint8_t> withdraw_, ack_, gra_, hello_;  // P*P counters
  std::vector<std::uint8_t> done_;                          // S*P counters
  std::vector<std::optional<Job>> notify_, welcome_;        // P*P slots
  std::vector<Level> asklist_, lower_;                      // P*S, -1 empty
  std::vector<std::optional<Mask>> answer_;                 // S*P slots
};

}  // namespace resalloc
