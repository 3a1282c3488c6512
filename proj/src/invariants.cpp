#include "resalloc/invariants.hpp"

#include <array>

namespace resalloc {

namespace {

constexpr std::array<InvariantId, kInvariantCount> kCatalogue = [] {
  std::array<InvariantId, kInvariantCount> a{};
  for (int i = 0; i < kInvariantCount; ++i) a[static_cast<size_t>(i)] = static_cast<InvariantId>(i);
  return a;
}();

constexpr const char* kNames[kInvariantCount] = {
    "Rq0", "Rq1", "Rq2", "Rq1a", "Rq2a",
    "Iq0", "Iq1", "Iq2", "Iq3", "Iq4", "Iq5", "Iq6", "Iq7", "Iq8", "Iq2a",
    "Iq7a",
    "Jq0", "Jq1", "Jq2", "Jq3", "Jq4", "Jq5", "Jq6", "Jq7",
    "Kq0", "Kq1", "Kq2", "Kq3", "Kq4", "Kq5", "Kq6", "Kq7", "Kq0a",
    "Lq0", "Lq1", "Lq2", "Lq3", "Lq4", "Lq5", "Lq6", "Lq7", "Lq8",
    "Mq0", "Mq1", "Mq2", "Mq3", "Mq0a",
    "Nq0", "Nq1", "Nq2", "Nq3", "Nq4",
    "Waq0", "Waq1", "Waq2", "Waq3",
};

// |b| in {0,1}, the boolean-to-number convention of the accounting formulas.
inline int B(bool b) { return b ? 1 : 0; }

struct Ctx {
  const JobModelConfig& cfg;
  const GlobalState& st;

  int P() const { return st.process_count(); }
  int S() const { return st.site_count(); }
  const ProcessState& pr(int q) const {
    return st.procs[static_cast<size_t>(q)];
  }
  int pc(int q) const { return pr(q).pc; }
  bool at(int q, int l) const { return pc(q) == l; }
  bool in_ge(int q, int l) const { return pc(q) >= l; }
  const Job& job(int q) const { return pr(q).job; }
  const Job& copy(int r, int q) const {
    return pr(r).copy[static_cast<size_t>(q)];
  }
  bool compat(const Job& u, const Job& v) const {
    return compatible(u, v, cfg.K);
  }
  Level L(int q, int s) const {
    return level_requirement(job(q), s, cfg.loc);
  }
  Level fun(int q, int s) const { return pr(q).fun[static_cast<size_t>(s)]; }
  Level list(int s, int q) const {
    return st.sites[static_cast<size_t>(s)].list[static_cast<size_t>(q)];
  }
  const NetworkState& net() const { return st.net; }
  bool welcome_bot_or_none(int q, int r) const {
    const Job* w = net().welcome(q, r);
    return w == nullptr || w->is_none();
  }
};

// Every per-pair formula is evaluated for all (q, r), including q == r; the
// self instances hold trivially because self channels stay empty and the
// protocol never puts a process in its own sets.
template <typename F>
std::optional<Violation> forall_q(const Ctx& c, InvariantId id, F f) {
  for (int q = 0; q < c.P(); ++q) {
    if (!f(q)) return Violation{id, q, -1, -1};
  }
  return std::nullopt;
}

template <typename F>
std::optional<Violation> forall_qr(const Ctx& c, InvariantId id, F f) {
  for (int q = 0; q < c.P(); ++q) {
    for (int r = 0; r < c.P(); ++r) {
      if (!f(q, r)) return Violation{id, q, r, -1};
    }
  }
  return std::nullopt;
}

template <typename F>
std::optional<Violation> forall_qs(const Ctx& c, InvariantId id, F f) {
  for (int q = 0; q < c.P(); ++q) {
    for (int s = 0; s < c.S(); ++s) {
      if (!f(q, s)) return Violation{id, q, -1, s};
    }
  }
  return std::nullopt;
}

template <typename F>
std::optional<Violation> forall_qrs(const Ctx& c, InvariantId id, F f) {
  for (int q = 0; q < c.P(); ++q) {
    for (int r = 0; r < c.P(); ++r) {
      for (int s = 0; s < c.S(); ++s) {
        if (!f(q, r, s)) return Violation{id, q, r, s};
      }
    }
  }
  return std::nullopt;
}

std::optional<Violation> check_one(const Ctx& c, InvariantId id) {
  const NetworkState& net = c.net();
  switch (id) {
    case InvariantId::kRq0:
      return forall_qr(c, id, [&](int q, int r) {
        return !(c.at(q, 27) && c.at(r, 27)) || q == r ||
               c.compat(c.job(q), c.job(r));
      });
    case InvariantId::kRq1:
      return forall_qr(c, id, [&](int q, int r) {
        return !(c.at(q, 27) && c.at(r, 27)) || q == r ||
               bits::has(c.pr(q).nbh0, r) || c.compat(c.job(q), c.job(r));
      });
    case InvariantId::kRq2:
      return forall_qr(c, id, [&](int q, int r) {
        return !(c.at(q, 27) && c.at(r, 27) && bits::has(c.pr(q).nbh0, r) &&
                 bits::has(c.pr(r).nbh0, q)) ||
               c.compat(c.job(q), c.job(r));
      });
    case InvariantId::kRq1a:
      return forall_qr(c, id, [&](int q, int r) {
        return !(c.in_ge(q, 26) && c.in_ge(r, 26)) || q == r ||
               bits::has(c.pr(q).nbh0, r) || c.compat(c.job(q), c.job(r));
      });
    case InvariantId::kRq2a:
      return forall_qr(c, id, [&](int q, int r) {
        return !(bits::has(c.pr(q).nbh0, r) && bits::has(c.pr(r).nbh0, q)) ||
               bits::has(c.pr(q).need, r) || bits::has(c.pr(r).need, q) ||
               c.compat(c.job(q), c.job(r));
      });

    case InvariantId::kIq0:
      return forall_q(c, id, [&](int q) { return !bits::has(c.pr(q).nbh, q); });
    case InvariantId::kIq1:
      return forall_qr(c, id, [&](int q, int r) {
        return !bits::has(c.pr(q).nbh0, r) ||
               (c.in_ge(q, 26) && bits::has(c.pr(q).nbh, r));
      });
    case InvariantId::kIq2:
      return forall_qr(c, id, [&](int q, int r) {
        return net.withdraw_count(q, r) + B(bits::has(c.pr(r).after, q)) +
                   net.ack_count(r, q) ==
               B(bits::has(c.pr(q).wack, r));
      });
    case InvariantId::kIq3:
      return forall_q(c, id, [&](int q) {
        return !c.in_ge(q, 25) || c.pr(q).wack == 0;
      });
    case InvariantId::kIq4:
      return forall_qr(c, id, [&](int q, int r) {
        return !(bits::has(c.pr(q).nbh0, r) && net.notify(q, r) == nullptr) ||
               c.copy(r, q) == c.job(q);
      });
    case InvariantId::kIq5:
      return forall_q(c, id,
                      [&](int q) { return c.job(q).is_none() == c.at(q, 21); });
    case InvariantId::kIq6:
      return forall_qr(c, id, [&](int q, int r) {
        const Job* n = net.notify(q, r);
        return !(c.in_ge(q, 26) && n != nullptr) || *n == c.job(q);
      });
    case InvariantId::kIq7:
      return forall_qr(c, id, [&](int q, int r) {
        return (net.notify(q, r) == nullptr && c.copy(r, q).is_none()) ||
               (c.in_ge(q, 26) && bits::has(c.pr(q).nbh, r)) ||
               net.withdraw_count(q, r) > 0 || bits::has(c.pr(r).after, q);
      });
    case InvariantId::kIq8:
      return forall_qr(c, id, [&](int q, int r) {
        return net.notify(q, r) == nullptr || c.copy(r, q).is_none();
      });
    case InvariantId::kIq2a:
      return forall_qr(c, id, [&](int q, int r) {
        return !c.in_ge(q, 25) || (net.withdraw_count(q, r) == 0 &&
                                   !bits::has(c.pr(r).after, q));
      });
    case InvariantId::kIq7a:
      return forall_qr(c, id, [&](int q, int r) {
        return !c.at(q, 25) ||
               (net.notify(q, r) == nullptr && c.copy(r, q).is_none());
      });

    case InvariantId::kJq0:
      return forall_qr(c, id, [&](int q, int r) {
        return !bits::has(c.pr(q).need, r) ||
               (c.at(q, 26) && bits::has(c.pr(q).nbh0, r));
      });
    case InvariantId::kJq1:
      return forall_qr(c, id, [&](int q, int r) {
        return !bits::has(c.pr(r).prom, q) || q < r;
      });
    case InvariantId::kJq2:
      return forall_qr(c, id, [&](int q, int r) {
        if (!(q < r)) return true;
        return B(net.notify(q, r) != nullptr) +
                   B(bits::has(c.pr(r).prom, q)) + net.gra_count(r, q) ==
               B(bits::has(c.pr(q).need, r));
      });
    case InvariantId::kJq3:
      return forall_qr(c, id, [&](int q, int r) {
        if (!(q < r && bits::has(c.pr(q).nbh0, r))) return true;
        return bits::has(c.pr(q).need, r) || bits::has(c.pr(r).away, q);
      });
    case InvariantId::kJq4:
      return forall_qr(c, id, [&](int q, int r) {
        if (!(bits::has(c.pr(r).away, q) && bits::has(c.pr(r).nbh0, q) &&
              net.withdraw_count(q, r) == 0))
          return true;
        return bits::has(c.pr(r).need, q) || c.compat(c.job(q), c.job(r));
      });
    case InvariantId::kJq5:
      return forall_qr(c, id, [&](int q, int r) {
        return net.gra_count(r, q) == 0 || bits::has(c.pr(r).away, q);
      });
    case InvariantId::kJq6:
      return forall_qr(c, id, [&](int q, int r) {
        return !bits::has(c.pr(r).away, q) ||
               (q < r && net.notify(q, r) == nullptr);
      });
    case InvariantId::kJq7:
      return forall_qr(c, id, [&](int q, int r) {
        return !(bits::has(c.pr(r).away, q) &&
                 net.withdraw_count(q, r) == 0) ||
               bits::has(c.pr(q).nbh0, r);
      });

    case InvariantId::kKq0:
      return forall_qs(c, id, [&](int q, int s) {
        return B(net.asklist(q, s).has_value()) +
                   B(net.answer(s, q) != nullptr) ==
               B(bits::has(c.pr(q).curlist, s));
      });
    case InvariantId::kKq1:
      return forall_qr(c, id, [&](int q, int r) {
        return net.hello_count(q, r) + B(net.welcome(r, q) != nullptr) ==
               B(c.at(q, 24) && bits::has(c.pr(q).pack, r));
      });
    case InvariantId::kKq2:
      return forall_qs(c, id, [&](int q, int s) {
        return B(net.lower(q, s).has_value()) + net.done_count(s, q) ==
               B(c.pr(q).pcr == 33 && bits::has(c.pr(q).reglist, s));
      });
    case InvariantId::kKq3:
      return forall_q(c, id, [&](int q) {
        return c.at(q, 23) || c.pr(q).curlist == 0;
      });
    case InvariantId::kKq4:
      return forall_q(c, id,
                      [&](int q) { return !bits::has(c.pr(q).pack, q); });
    case InvariantId::kKq5:
      return forall_qr(c, id, [&](int q, int r) {
        const Job* w = net.welcome(q, r);
        if (!(c.in_ge(q, 26) && w != nullptr)) return true;
        return w->is_none() || *w == c.job(q);
      });
    case InvariantId::kKq6:
      return forall_qr(c, id, [&](int q, int r) {
        return c.welcome_bot_or_none(q, r) || net.withdraw_count(q, r) > 0 ||
               bits::has(c.pr(r).after, q) ||
               (c.in_ge(q, 26) && bits::has(c.pr(q).nbh, r));
      });
    case InvariantId::kKq7:
      return forall_qr(c, id, [&](int q, int r) {
        return c.welcome_bot_or_none(q, r) ||
               (net.notify(q, r) == nullptr && c.copy(r, q).is_none());
      });
    case InvariantId::kKq0a:
      return forall_qs(c, id, [&](int q, int s) {
        return net.answer(s, q) == nullptr || c.at(q, 23);
      });

    case InvariantId::kLq0:
      return forall_q(c, id, [&](int q) {
        return !(c.pc(q) == 23 || c.pc(q) == 24) ||
               (c.pr(q).pcr == 31 || c.pr(q).pcr == 32);
      });
    case InvariantId::kLq1:
      return forall_q(c, id,
                      [&](int q) { return level_fn_leq(c.pr(q).news, c.pr(q).fun); });
    case InvariantId::kLq2:
      return forall_qr(c, id, [&](int q, int r) {
        return !bits::has(c.pr(r).prio, q) ||
               (c.at(r, 25) && !bits::has(c.pr(r).after, q));
      });
    case InvariantId::kLq3:
      return forall_q(c, id, [&](int q) {
        return c.pc(q) == 23 || c.pc(q) == 24 || c.pr(q).pack == 0;
      });
    case InvariantId::kLq4:
      return forall_qs(c, id, [&](int q, int s) {
        auto a = net.asklist(q, s);
        return !a.has_value() || *a == c.L(q, s);
      });
    case InvariantId::kLq5:
      return forall_qs(c, id, [&](int q, int s) {
        auto l = net.lower(q, s);
        return !l.has_value() || *l == c.fun(q, s);
      });
    case InvariantId::kLq6:
      return forall_qs(c, id, [&](int q, int s) {
        return c.at(q, 22) || bits::has(c.pr(q).curlist, s) ||
               c.L(q, s) <= c.fun(q, s);
      });
    case InvariantId::kLq7:
      // Written with the asklist channel from q to s, the only direction the
      // key flows.
      return forall_qs(c, id, [&](int q, int s) {
        return !(c.in_ge(q, 23) && !net.asklist(q, s).has_value()) ||
               c.L(q, s) <= c.list(s, q);
      });
    case InvariantId::kLq8:
      return forall_qs(c, id, [&](int q, int s) {
        return c.fun(q, s) <= c.list(s, q);
      });

    case InvariantId::kMq0:
      return forall_qrs(c, id, [&](int q, int r, int s) {
        if (!c.in_ge(q, 23)) return true;
        if (q == r || bits::has(c.pr(q).nbh, r)) return true;
        if (net.hello_count(r, q) > 0) return true;
        if (c.at(r, 23) && bits::has(c.pr(r).pack, q)) return true;
        if (c.L(q, s) + c.fun(r, s) <= c.cfg.K) return true;
        const Mask* aq = net.answer(s, q);
        return bits::has(c.pr(q).curlist, s) &&
               (aq == nullptr || bits::has(*aq, r));
      });
    case InvariantId::kMq1:
      return forall_qrs(c, id, [&](int q, int r, int s) {
        const Mask* ar = net.answer(s, r);
        if (!(c.in_ge(q, 23) && ar != nullptr)) return true;
        if (q == r || bits::has(c.pr(q).nbh, r)) return true;
        if (bits::has(*ar, q)) return true;
        if (c.L(q, s) + c.L(r, s) <= c.cfg.K) return true;
        const Mask* aq = net.answer(s, q);
        return bits::has(c.pr(q).curlist, s) &&
               (aq == nullptr || bits::has(*aq, r));
      });
    case InvariantId::kMq2:
      return forall_qr(c, id, [&](int q, int r) {
        if (!(c.in_ge(q, 26) && bits::has(c.pr(q).nbh, r))) return true;
        if (bits::has(c.pr(q).nbh0, r)) return true;
        const Job* w = net.welcome(q, r);
        if (w != nullptr && *w == c.job(q)) return true;
        return c.copy(r, q) == c.job(q);
      });
    case InvariantId::kMq3:
      return forall_qr(c, id, [&](int q, int r) {
        if (!(c.in_ge(q, 26) && c.in_ge(r, 25))) return true;
        return q == r || bits::has(c.pr(q).nbh0, r) ||
               bits::has(c.pr(r).prio, q) || c.compat(c.job(q), c.job(r));
      });
    case InvariantId::kMq0a:
      return forall_qr(c, id, [&](int q, int r) {
        if (!(c.in_ge(q, 24) && c.in_ge(r, 24) && c.pr(r).pack == 0))
          return true;
        return q == r || bits::has(c.pr(q).nbh, r) ||
               c.compat(c.job(q), c.job(r));
      });

    case InvariantId::kNq0:
      return forall_qr(c, id, [&](int q, int r) {
        if (!(q < r && bits::has(c.pr(r).need, q))) return true;
        return bits::has(c.pr(r).away, q);
      });
    case InvariantId::kNq1:
      return forall_qr(c, id, [&](int q, int r) {
        if (!(q < r && bits::has(c.pr(r).need, q) &&
              c.compat(c.job(q), c.job(r))))
          return true;
        return net.withdraw_count(q, r) > 0;
      });
    case InvariantId::kNq2:
      return forall_qr(c, id, [&](int q, int r) {
        if (!(net.notify(q, r) == nullptr && c.copy(r, q).is_none() &&
              c.welcome_bot_or_none(q, r)))
          return true;
        return !bits::has(c.pr(r).after, q) && net.withdraw_count(q, r) == 0;
      });
    case InvariantId::kNq3:
      return forall_qr(c, id, [&](int q, int r) {
        const Job* n = net.notify(q, r);
        return n == nullptr || !n->is_none();
      });
    case InvariantId::kNq4:
      return forall_qr(c, id, [&](int q, int r) {
        return !bits::has(c.pr(r).prio, q) ||
               !c.compat(c.copy(r, q), c.job(r));
      });

    case InvariantId::kWaq0:
      return forall_qr(c, id, [&](int q, int r) {
        if (!(net.withdraw_count(q, r) == 0 && net.ack_count(r, q) == 0 &&
              net.notify(q, r) == nullptr && c.welcome_bot_or_none(q, r) &&
              disabled_after(c.st, r, q)))
          return true;
        return !bits::has(c.pr(q).wack, r);
      });
    case InvariantId::kWaq1:
      return forall_qr(c, id, [&](int q, int r) {
        if (!(bits::has(c.pr(q).prio, r) && net.withdraw_count(r, q) == 0 &&
              c.welcome_bot_or_none(q, r)))
          return true;
        return c.in_ge(r, 26) && !c.compat(c.job(q), c.job(r));
      });
    case InvariantId::kWaq2:
      return forall_qr(c, id, [&](int q, int r) {
        if (!(r < q && bits::has(c.pr(q).need, r) &&
              net.withdraw_count(r, q) == 0))
          return true;
        return c.in_ge(r, 26) && !c.compat(c.job(q), c.job(r));
      });
    case InvariantId::kWaq3:
      return forall_qr(c, id, [&](int q, int r) {
        if (!(q < r && bits::has(c.pr(q).need, r) &&
              net.gra_count(r, q) == 0 && net.notify(q, r) == nullptr &&
              disabled_prom(c.cfg, c.st, r, q)))
          return true;
        return c.in_ge(r, 27) && !c.compat(c.job(q), c.job(r));
      });
  }
  return std::nullopt;
}

}  // namespace

const char* invariant_name(InvariantId id) {
  return kNames[static_cast<size_t>(id)];
}

bool parse_invariant_id(const std::string& text, InvariantId* out) {
  for (int i = 0; i < kInvariantCount; ++i) {
    if (text == kNames[i]) {
      *out = static_cast<InvariantId>(i);
      return true;
    }
  }
  return false;
}

std::span<const InvariantId> all_invariants() { return kCatalogue; }

std::string Violation::describe() const {
  std::string out = invariant_name(id);
  if (q >= 0) out += " q=" + std::to_string(q);
  if (r >= 0) out += " r=" + std::to_string(r);
  if (s >= 0) out += " s=" + std::to_string(s);
  if (step_index >= 0) out += " step=" + std::to_string(step_index);
  return out;
}

std::optional<Violation> check(const JobModelConfig& cfg,
                               const GlobalState& st, InvariantId id) {
  Ctx c{cfg, st};
  return check_one(c, id);
}

std::vector<Violation> check_all(const JobModelConfig& cfg,
                                 const GlobalState& st) {
  std::vector<Violation> out;
  Ctx c{cfg, st};
  for (InvariantId id : kCatalogue) {
    if (auto v = check_one(c, id)) out.push_back(*v);
  }
  return out;
}

bool disabled_after(const GlobalState& st, ProcessId q, ProcessId r) {
  const ProcessState& pq = st.procs[static_cast<size_t>(q)];
  return !bits::has(pq.after, r) || pq.copy[static_cast<size_t>(r)].is_none();
}

bool disabled_prom(const JobModelConfig& cfg, const GlobalState& st,
                   ProcessId q, ProcessId r) {
  const ProcessState& pq = st.procs[static_cast<size_t>(q)];
  if (!bits::has(pq.prom, r)) return true;
  return pq.pc >= 27 &&
         !compatible(pq.job, pq.copy[static_cast<size_t>(r)], cfg.K);
}

}  // namespace resalloc
