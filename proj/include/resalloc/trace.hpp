#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "resalloc/invariants.hpp"
#include "resalloc/protocol.hpp"

namespace resalloc {

enum class TerminalStatus { kCompleted, kViolation, kStepLimit };
const char* to_string(TerminalStatus s);
bool parse_terminal_status(const std::string& text, TerminalStatus* out);

// One applied step. `consumed` holds the payload taken off a valued channel,
// recorded for readability and cross-checking; replay re-derives it.
struct TraceRecord {
  std::int64_t index = 0;
  std::int64_t round = 0;
  StepId step;
  std::optional<MessageValue> consumed;
  std::optional<std::uint64_t> hash;  // state hash after this step
};

struct Trace {
  std::string scenario_text;  // canonical scenario of the run
  std::vector<TraceRecord> records;
  TerminalStatus status = TerminalStatus::kCompleted;
  std::int64_t rounds = 0;
  std::uint64_t final_hash = 0;
  std::optional<Violation> violation;
};

struct TraceParseError : std::runtime_error {
  TraceParseError(int line, const std::string& msg)
      : std::runtime_error("trace line " + std::to_string(line) + ": " + msg),
        line(line) {}
  int line;
};

void write_trace(std::ostream& out, const Trace& trace);
std::string trace_to_string(const Trace& trace);
Trace read_trace(std::istream& in);
Trace trace_from_string(const std::string& text);

}  // namespace resalloc
