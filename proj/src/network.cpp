#include "resalloc/network.hpp"

#include <algorithm>
#include <cassert>

namespace resalloc {

bool is_valued(MessageKey k) {
  switch (k) {
    case MessageKey::kNotify:
    case MessageKey::kWelcome:
    case MessageKey::kAsklist:
    case MessageKey::kAnswer:
    case MessageKey::kLower:
      return true;
    default:
      return false;
  }
}

const char* to_string(MessageKey k) {
  switch (k) {
    case MessageKey::kNotify: return "notify";
    case MessageKey::kWithdraw: return "withdraw";
    case MessageKey::kAck: return "ack";
    case MessageKey::kGra: return "gra";
    case MessageKey::kHello: return "hello";
    case MessageKey::kWelcome: return "welcome";
    case MessageKey::kAsklist: return "asklist";
    case MessageKey::kAnswer: return "answer";
    case MessageKey::kLower: return "lower";
    case MessageKey::kDone: return "done";
  }
  return "?";
}

bool parse_message_key(const std::string& text, MessageKey* out) {
  for (int i = 0; i < kMessageKeyCount; ++i) {
    MessageKey k = static_cast<MessageKey>(i);
    if (text == to_string(k)) {
      *out = k;
      return true;
    }
  }
  return false;
}

static std::string channel_text(const char* what, MessageKey k, int from,
                                int to) {
  std::string s = what;
  s += ": ";
  s += to_string(k);
  s += " from ";
  s += std::to_string(from);
  s += " to ";
  s += std::to_string(to);
  return s;
}

OverwriteInTransit::OverwriteInTransit(MessageKey k, int f, int t)
    : std::runtime_error(channel_text("send on occupied channel", k, f, t)),
      key(k),
      from(f),
      to(t) {}

NothingInTransit::NothingInTransit(MessageKey k, int f, int t)
    : std::runtime_error(channel_text("consume on empty channel", k, f, t)),
      key(k),
      from(f),
      to(t) {}

NetworkState::NetworkState(int process_count, int site_count)
    : pc_(process_count), sc_(site_count) {
  size_t npp = static_cast<size_t>(pc_) * static_cast<size_t>(pc_);
  size_t nps = static_cast<size_t>(pc_) * static_cast<size_t>(sc_);
  size_t nsp = static_cast<size_t>(sc_) * static_cast<size_t>(pc_);
  withdraw_.assign(npp, 0);
  ack_.assign(npp, 0);
  gra_.assign(npp, 0);
  hello_.assign(npp, 0);
  done_.assign(nsp, 0);
  notify_.assign(npp, std::nullopt);
  welcome_.assign(npp, std::nullopt);
  asklist_.assign(nps, -1);
  lower_.assign(nps, -1);
  answer_.assign(nsp, std::nullopt);
}

void NetworkState::send_void(MessageKey k, int from, int to) {
  switch (k) {
    case MessageKey::kWithdraw: ++withdraw_[pp(from, to)]; return;
    case MessageKey::kAck: ++ack_[pp(from, to)]; return;
    case MessageKey::kGra: ++gra_[pp(from, to)]; return;
    case MessageKey::kHello: ++hello_[pp(from, to)]; return;
    case MessageKey::kDone: ++done_[sp(from, to)]; return;
    default: assert(false && "not a void key");
  }
}

void NetworkState::send_valued(MessageKey k, int from, int to,
                               MessageValue v) {
  switch (k) {
    case MessageKey::kNotify: {
      auto& slot = notify_[pp(from, to)];
      if (slot) throw OverwriteInTransit(k, from, to);
      slot = std::get<Job>(std::move(v));
      return;
    }
    case MessageKey::kWelcome: {
      auto& slot = welcome_[pp(from, to)];
      if (slot) throw OverwriteInTransit(k, from, to);
      slot = std::get<Job>(std::move(v));
      return;
    }
    case MessageKey::kAsklist: {
      Level& slot = asklist_[ps(from, to)];
      if (slot >= 0) throw OverwriteInTransit(k, from, to);
      slot = std::get<Level>(v);
      return;
    }
    case MessageKey::kLower: {
      Level& slot = lower_[ps(from, to)];
      if (slot >= 0) throw OverwriteInTransit(k, from, to);
      slot = std::get<Level>(v);
      return;
    }
    case MessageKey::kAnswer: {
      auto& slot = answer_[sp(from, to)];
      if (slot) throw OverwriteInTransit(k, from, to);
      slot = std::get<Mask>(v);
      return;
    }
    default: assert(false && "not a valued key");
  }
}

int NetworkState::void_count(MessageKey k, int from, int to) const {
  switch (k) {
    case MessageKey::kWithdraw: return withdraw_[pp(from, to)];
    case MessageKey::kAck: return ack_[pp(from, to)];
    case MessageKey::kGra: return gra_[pp(from, to)];
    case MessageKey::kHello: return hello_[pp(from, to)];
    case MessageKey::kDone: return done_[sp(from, to)];
    default: return 0;
  }
}

bool NetworkState::occupied(MessageKey k, int from, int to) const {
  switch (k) {
    case MessageKey::kNotify: return notify_[pp(from, to)].has_value();
    case MessageKey::kWelcome: return welcome_[pp(from, to)].has_value();
    case MessageKey::kAsklist: return asklist_[ps(from, to)] >= 0;
    case MessageKey::kLower: return lower_[ps(from, to)] >= 0;
    case MessageKey::kAnswer: return answer_[sp(from, to)].has_value();
    default: return void_count(k, from, to) > 0;
  }
}

std::vector<NetworkState::Channel> NetworkState::deliverable() const {
  std::vector<Channel> out;
  for (int ki = 0; ki < kMessageKeyCount; ++ki) {
    MessageKey k = static_cast<MessageKey>(ki);
    bool from_proc = k != MessageKey::kAnswer && k != MessageKey::kDone;
    bool to_proc = k != MessageKey::kAsklist && k != MessageKey::kLower;
    int nf = from_proc ? pc_ : sc_;
    int nt = to_proc ? pc_ : sc_;
    for (int f = 0; f < nf; ++f) {
      for (int t = 0; t < nt; ++t) {
        if (occupied(k, f, t)) out.push_back({k, f, t});
      }
    }
  }
  return out;
}

std::optional<MessageValue> NetworkState::consume(MessageKey k, int from,
                                                  int to) {
  if (!occupied(k, from, to)) throw NothingInTransit(k, from, to);
  switch (k) {
    case MessageKey::kNotify: {
      MessageValue v = std::move(*notify_[pp(from, to)]);
      notify_[pp(from, to)].reset();
      return v;
    }
    case MessageKey::kWelcome: {
      MessageValue v = std::move(*welcome_[pp(from, to)]);
      welcome_[pp(from, to)].reset();
      return v;
    }
    case MessageKey::kAsklist: {
      MessageValue v = asklist_[ps(from, to)];
      asklist_[ps(from, to)] = -1;
      return v;
    }
    case MessageKey::kLower: {
      MessageValue v = lower_[ps(from, to)];
      lower_[ps(from, to)] = -1;
      return v;
    }
    case MessageKey::kAnswer: {
      MessageValue v = *answer_[sp(from, to)];
      answer_[sp(from, to)].reset();
      return v;
    }
    case MessageKey::kWithdraw: --withdraw_[pp(from, to)]; return std::nullopt;
    case MessageKey::kAck: --ack_[pp(from, to)]; return std::nullopt;
    case MessageKey::kGra: --gra_[pp(from, to)]; return std::nullopt;
    case MessageKey::kHello: --hello_[pp(from, to)]; return std::nullopt;
    case MessageKey::kDone: --done_[sp(from, to)]; return std::nullopt;
  }
  return std::nullopt;
}

bool NetworkState::empty() const {
  auto all_zero = [](const std::vector<std::uint8_t>& v) {
    return std::all_of(v.begin(), v.end(), [](std::uint8_t c) { return !c; });
  };
  if (!all_zero(withdraw_) || !all_zero(ack_) || !all_zero(gra_) ||
      !all_zero(hello_) || !all_zero(done_))
    return false;
  for (const auto& s : notify_)
    if (s) return false;
  for (const auto& s : welcome_)
    if (s) return false;
  for (Level s : asklist_)
    if (s >= 0) return false;
  for (Level s : lower_)
    if (s >= 0) return false;
  for (const auto& s : answer_)
    if (s) return false;
  return true;
}

bool NetworkState::any_touching_process(ProcessId p) const {
  for (int r = 0; r < pc_; ++r) {
    if (withdraw_[pp(p, r)] || withdraw_[pp(r, p)]) return true;
    if (ack_[pp(p, r)] || ack_[pp(r, p)]) return true;
    if (gra_[pp(p, r)] || gra_[pp(r, p)]) return true;
    if (hello_[pp(p, r)] || hello_[pp(r, p)]) return true;
    if (notify_[pp(p, r)] || notify_[pp(r, p)]) return true;
    if (welcome_[pp(p, r)] || welcome_[pp(r, p)]) return true;
  }
  for (int s = 0; s < sc_; ++s) {
    if (asklist_[ps(p, s)] >= 0 || lower_[ps(p, s)] >= 0) return true;
    if (answer_[sp(s, p)] || done_[sp(s, p)]) return true;
  }
  return false;
}

const Job* NetworkState::notify(ProcessId q, ProcessId r) const {
  const auto& s = notify_[pp(q, r)];
  return s ? &*s : nullptr;
}
const Job* NetworkState::welcome(ProcessId q, ProcessId r) const {
  const auto& s = welcome_[pp(q, r)];
  return s ? &*s : nullptr;
}
std::optional<Level> NetworkState::asklist(ProcessId q, SiteId s) const {
  Level v = asklist_[ps(q, s)];
  return v >= 0 ? std::optional<Level>(v) : std::nullopt;
}
std::optional<Level> NetworkState::lower(ProcessId q, SiteId s) const {
  Level v = lower_[ps(q, s)];
  return v >= 0 ? std::optional<Level>(v) : std::nullopt;
}
const Mask* NetworkState::answer(SiteId s, ProcessId q) const {
  const auto& v = answer_[sp(s, q)];
  return v ? &*v : nullptr;
}
int NetworkState::withdraw_count(ProcessId q, ProcessId r) const {
  return withdraw_[pp(q, r)];
}
int NetworkState::ack_count(ProcessId q, ProcessId r) const {
  return ack_[pp(q, r)];
}
int NetworkState::gra_count(ProcessId q, ProcessId r) const {
  return gra_[pp(q, r)];
}
int NetworkState::hello_count(ProcessId q, ProcessId r) const {
  return hello_[pp(q, r)];
}
int NetworkState::done_count(SiteId s, ProcessId q) const {
  return done_[sp(s, q)];
}

}  // namespace resalloc
