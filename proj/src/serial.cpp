#include "resalloc/serial.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>
#include <vector>

namespace resalloc {

namespace {

void put_u64(std::string& out, std::uint64_t v) {
  char buf[24];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, end);
  out.push_back('|');
}

void put_i(std::string& out, long long v) {
  char buf[24];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, end);
  out.push_back('|');
}

void put_job(std::string& out, const Job& j) {
  for (const auto& [c, k] : j.entries()) {
    put_i(out, c);
    put_i(out, k);
  }
  out.push_back(';');
}

}  // namespace

std::string canonical_bytes(const GlobalState& st) {
  std::string out;
  out.reserve(256);
  int n = st.process_count();
  for (int p = 0; p < n; ++p) {
    const ProcessState& ps = st.procs[static_cast<size_t>(p)];
    put_i(out, ps.pc);
    put_i(out, ps.pcr);
    put_job(out, ps.job);
    put_u64(out, ps.nbh);
    put_u64(out, ps.nbh0);
    put_u64(out, ps.prio);
    put_u64(out, ps.wack);
    put_u64(out, ps.after);
    put_u64(out, ps.away);
    put_u64(out, ps.need);
    put_u64(out, ps.prom);
    put_u64(out, ps.pack);
    for (const Job& c : ps.copy) put_job(out, c);
    for (Level l : ps.fun) put_i(out, l);
    for (Level l : ps.news) put_i(out, l);
    put_u64(out, ps.reglist);
    put_u64(out, ps.curlist);
    out.push_back('#');
  }
  for (const auto& site : st.sites) {
    for (Level l : site.list) put_i(out, l);
    out.push_back('#');
  }
  for (const auto& ch : st.net.deliverable()) {
    put_i(out, static_cast<int>(ch.key));
    put_i(out, ch.from);
    put_i(out, ch.to);
    if (is_valued(ch.key)) {
      switch (ch.key) {
        case MessageKey::kNotify:
          put_job(out, *st.net.notify(ch.from, ch.to));
          break;
        case MessageKey::kWelcome:
          put_job(out, *st.net.welcome(ch.from, ch.to));
          break;
        case MessageKey::kAsklist:
          put_i(out, *st.net.asklist(ch.from, ch.to));
          break;
        case MessageKey::kLower:
          put_i(out, *st.net.lower(ch.from, ch.to));
          break;
        case MessageKey::kAnswer:
          put_u64(out, *st.net.answer(ch.from, ch.to));
          break;
        default:
          break;
      }
    } else {
      put_i(out, st.net.void_count(ch.key, ch.from, ch.to));
    }
  }
  return out;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t state_hash(const GlobalState& st) {
  return fnv1a64(canonical_bytes(st));
}

std::string mask_to_string(Mask m, char prefix) {
  std::string out = "{";
  bool first = true;
  bits::for_each(m, [&](int i) {
    if (!first) out += ',';
    first = false;
    out += prefix;
    out += std::to_string(i);
  });
  out += '}';
  return out;
}

bool parse_mask(const std::string& text, Mask* out) {
  if (text.size() < 2 || text.front() != '{' || text.back() != '}')
    return false;
  *out = 0;
  std::string body = text.substr(1, text.size() - 2);
  if (body.empty()) return true;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty() && (item[0] == 'p' || item[0] == 's'))
      item = item.substr(1);
    if (item.empty()) return false;
    char* end = nullptr;
    long v = std::strtol(item.c_str(), &end, 10);
    if (*end != '\0' || v < 0 || v >= 64) return false;
    bits::add(*out, static_cast<int>(v));
  }
  return true;
}

std::string hash_to_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

bool parse_hex64(const std::string& text, std::uint64_t* out) {
  if (text.empty() || text.size() > 16) return false;
  std::uint64_t v = 0;
  for (char c : text) {
    v <<= 4;
    if (c >= '0' && c <= '9')
      v |= static_cast<std::uint64_t>(c - '0');
    else if (c >= 'a' && c <= 'f')
      v |= static_cast<std::uint64_t>(c - 'a' + 10);
    else
      return false;
  }
  *out = v;
  return true;
}

std::string to_string(const StepId& step) {
  std::string out;
  auto proc = [](int i) { return "p" + std::to_string(i); };
  auto site = [](int i) { return "s" + std::to_string(i); };
  switch (step.kind) {
    case StepKind::kNewJob:
      out = "newjob " + proc(step.actor) + " " + to_string(step.job);
      break;
    case StepKind::kNewNews:
      out = "newnews " + proc(step.actor) + " " + to_string(step.news);
      break;
    case StepKind::kAbort:
      out = "abort " + proc(step.actor) + " " + std::to_string(step.line);
      break;
    case StepKind::kForward:
      out = "fwd " + proc(step.actor) + " " + std::to_string(step.line);
      break;
    case StepKind::kLower:
      out = "low " + proc(step.actor) + " " + std::to_string(step.line);
      break;
    case StepKind::kRecv:
      out = "recv " + proc(step.actor) + " " + proc(step.peer) + " " +
            to_string(step.key);
      break;
    case StepKind::kAfter:
      out = "after " + proc(step.actor) + " " + proc(step.peer);
      break;
    case StepKind::kProm:
      out = "prom " + proc(step.actor) + " " + proc(step.peer);
      break;
    case StepKind::kListen:
      out = "listen " + proc(step.actor) + " " + site(step.peer) + " " +
            to_string(step.key);
      break;
    case StepKind::kSiteRecv:
      out = "site " + site(step.actor) + " " + proc(step.peer) + " " +
            to_string(step.key);
      break;
  }
  return out;
}

namespace {

bool parse_id(const std::string& tok, char prefix, int* out) {
  if (tok.size() < 2 || tok[0] != prefix) return false;
  char* end = nullptr;
  long v = std::strtol(tok.c_str() + 1, &end, 10);
  if (*end != '\0' || v < 0 || v >= 64) return false;
  *out = static_cast<int>(v);
  return true;
}

bool parse_int(const std::string& tok, int* out) {
  char* end = nullptr;
  long v = std::strtol(tok.c_str(), &end, 10);
  if (tok.empty() || *end != '\0') return false;
  *out = static_cast<int>(v);
  return true;
}

}  // namespace

bool parse_step(const std::string& text, StepId* out) {
  std::istringstream ss(text);
  std::string kind, a, b, c;
  if (!(ss >> kind >> a)) return false;
  *out = StepId{};
  if (kind == "newjob") {
    out->kind = StepKind::kNewJob;
    out->line = 21;
    if (!parse_id(a, 'p', &out->actor)) return false;
    if (!(ss >> b)) return false;
    return parse_job(b, &out->job);
  }
  if (kind == "newnews") {
    out->kind = StepKind::kNewNews;
    out->line = 31;
    if (!parse_id(a, 'p', &out->actor)) return false;
    if (!(ss >> b)) return false;
    return parse_level_fn(b, &out->news);
  }
  if (kind == "abort" || kind == "fwd" || kind == "low") {
    out->kind = kind == "abort"  ? StepKind::kAbort
                : kind == "fwd" ? StepKind::kForward
                                 : StepKind::kLower;
    if (!parse_id(a, 'p', &out->actor)) return false;
    if (!(ss >> b)) return false;
    return parse_int(b, &out->line);
  }
  if (kind == "recv" || kind == "after" || kind == "prom") {
    if (!parse_id(a, 'p', &out->actor)) return false;
    if (!(ss >> b)) return false;
    if (!parse_id(b, 'p', &out->peer)) return false;
    if (kind == "after") {
      out->kind = StepKind::kAfter;
      return true;
    }
    if (kind == "prom") {
      out->kind = StepKind::kProm;
      return true;
    }
    out->kind = StepKind::kRecv;
    if (!(ss >> c)) return false;
    return parse_message_key(c, &out->key);
  }
  if (kind == "listen") {
    out->kind = StepKind::kListen;
    if (!parse_id(a, 'p', &out->actor)) return false;
    if (!(ss >> b >> c)) return false;
    if (!parse_id(b, 's', &out->peer)) return false;
    return parse_message_key(c, &out->key);
  }
  if (kind == "site") {
    out->kind = StepKind::kSiteRecv;
    if (!parse_id(a, 's', &out->actor)) return false;
    if (!(ss >> b >> c)) return false;
    if (!parse_id(b, 'p', &out->peer)) return false;
    return parse_message_key(c, &out->key);
  }
  return false;
}

std::string to_string(const MessageValue& v) {
  if (const Job* j = std::get_if<Job>(&v)) return to_string(*j);
  if (const Level* l = std::get_if<Level>(&v)) return std::to_string(*l);
  return mask_to_string(std::get<Mask>(v), 'p');
}

bool parse_message_value(const std::string& text, MessageKey key,
                         MessageValue* out) {
  switch (key) {
    case MessageKey::kNotify:
    case MessageKey::kWelcome: {
      Job j;
      if (!parse_job(text, &j)) return false;
      *out = std::move(j);
      return true;
    }
    case MessageKey::kAsklist:
    case MessageKey::kLower: {
      int v = 0;
      if (!parse_int(text, &v) || v < 0) return false;
      *out = static_cast<Level>(v);
      return true;
    }
    case MessageKey::kAnswer: {
      Mask m = 0;
      if (!parse_mask(text, &m)) return false;
      *out = m;
      return true;
    }
    default:
      return false;
  }
}

}  // namespace resalloc
