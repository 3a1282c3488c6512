#include "resalloc/trace.hpp"

#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include "resalloc/serial.hpp"

namespace resalloc {

namespace {
constexpr const char* kHeader = "resalloc-trace v1";
}

const char* to_string(TerminalStatus s) {
  switch (s) {
    case TerminalStatus::kCompleted: return "completed";
    case TerminalStatus::kViolation: return "violation";
    case TerminalStatus::kStepLimit: return "step-limit";
  }
  return "?";
}

bool parse_terminal_status(const std::string& text, TerminalStatus* out) {
  if (text == "completed") *out = TerminalStatus::kCompleted;
  else if (text == "violation") *out = TerminalStatus::kViolation;
  else if (text == "step-limit") *out = TerminalStatus::kStepLimit;
  else return false;
  return true;
}

void write_trace(std::ostream& out, const Trace& trace) {
  out << kHeader << "\n";
  out << "scenario {\n" << trace.scenario_text;
  if (!trace.scenario_text.empty() && trace.scenario_text.back() != '\n')
    out << "\n";
  out << "}\n";
  for (const TraceRecord& rec : trace.records) {
    out << "step " << rec.index << " " << rec.round << " "
        << to_string(rec.step);
    if (rec.consumed) out << " v=" << to_string(*rec.consumed);
    if (rec.hash) out << " h=" << hash_to_hex(*rec.hash);
    out << "\n";
  }
  if (trace.violation) {
    const Violation& v = *trace.violation;
    out << "violation " << invariant_name(v.id) << " q=" << v.q
        << " r=" << v.r << " s=" << v.s << " step=" << v.step_index << "\n";
  }
  out << "end " << to_string(trace.status) << " steps=" << trace.records.size()
      << " rounds=" << trace.rounds << " h=" << hash_to_hex(trace.final_hash)
      << "\n";
}

std::string trace_to_string(const Trace& trace) {
  std::ostringstream ss;
  write_trace(ss, trace);
  return ss.str();
}

namespace {

bool parse_kv_int(const std::string& tok, const std::string& key,
                  long long* out) {
  if (tok.rfind(key, 0) != 0) return false;
  char* end = nullptr;
  long long v = std::strtoll(tok.c_str() + key.size(), &end, 10);
  if (*end != '\0') return false;
  *out = v;
  return true;
}

}  // namespace

Trace read_trace(std::istream& in) {
  Trace trace;
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line) || line != kHeader)
    throw TraceParseError(1, "missing or unsupported trace header");
  ++lineno;
  if (!std::getline(in, line) || line != "scenario {")
    throw TraceParseError(2, "missing scenario block");
  ++lineno;
  std::string scenario;
  while (std::getline(in, line)) {
    ++lineno;
    if (line == "}") break;
    scenario += line;
    scenario += '\n';
  }
  trace.scenario_text = scenario;

  bool saw_end = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "step") {
      TraceRecord rec;
      std::string tok;
      if (!(ls >> rec.index >> rec.round))
        throw TraceParseError(lineno, "bad step indices");
      std::vector<std::string> toks;
      while (ls >> tok) toks.push_back(tok);
      std::string vstr, hstr;
      while (!toks.empty()) {
        const std::string& last = toks.back();
        if (last.rfind("h=", 0) == 0) {
          hstr = last.substr(2);
          toks.pop_back();
        } else if (last.rfind("v=", 0) == 0) {
          vstr = last.substr(2);
          toks.pop_back();
        } else {
          break;
        }
      }
      std::string stepstr;
      for (size_t i = 0; i < toks.size(); ++i) {
        if (i) stepstr += ' ';
        stepstr += toks[i];
      }
      if (!parse_step(stepstr, &rec.step))
        throw TraceParseError(lineno, "bad step: " + stepstr);
      if (!vstr.empty()) {
        MessageValue v;
        if (!parse_message_value(vstr, rec.step.key, &v))
          throw TraceParseError(lineno, "bad payload: " + vstr);
        rec.consumed = std::move(v);
      }
      if (!hstr.empty()) {
        std::uint64_t h;
        if (!parse_hex64(hstr, &h))
          throw TraceParseError(lineno, "bad hash: " + hstr);
        rec.hash = h;
      }
      trace.records.push_back(std::move(rec));
    } else if (kind == "violation") {
      Violation v;
      std::string name, tok;
      ls >> name;
      if (!parse_invariant_id(name, &v.id))
        throw TraceParseError(lineno, "unknown invariant " + name);
      long long x;
      while (ls >> tok) {
        if (parse_kv_int(tok, "q=", &x)) v.q = static_cast<int>(x);
        else if (parse_kv_int(tok, "r=", &x)) v.r = static_cast<int>(x);
        else if (parse_kv_int(tok, "s=", &x)) v.s = static_cast<int>(x);
        else if (parse_kv_int(tok, "step=", &x)) v.step_index = x;
        else throw TraceParseError(lineno, "bad violation field " + tok);
      }
      trace.violation = v;
    } else if (kind == "end") {
      std::string status, tok;
      ls >> status;
      if (!parse_terminal_status(status, &trace.status))
        throw TraceParseError(lineno, "bad terminal status " + status);
      long long x;
      while (ls >> tok) {
        if (parse_kv_int(tok, "steps=", &x)) {
          if (x != static_cast<long long>(trace.records.size()))
            throw TraceParseError(lineno, "step count mismatch");
        } else if (parse_kv_int(tok, "rounds=", &x)) {
          trace.rounds = x;
        } else if (tok.rfind("h=", 0) == 0) {
          if (!parse_hex64(tok.substr(2), &trace.final_hash))
            throw TraceParseError(lineno, "bad final hash");
        } else {
          throw TraceParseError(lineno, "bad end field " + tok);
        }
      }
      saw_end = true;
    } else {
      throw TraceParseError(lineno, "unknown record " + kind);
    }
  }
  if (!saw_end) throw TraceParseError(lineno, "missing end record");
  return trace;
}

Trace trace_from_string(const std::string& text) {
  std::istringstream ss(text);
  return read_trace(ss);
}

}  // namespace resalloc
