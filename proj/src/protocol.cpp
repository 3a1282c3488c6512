#include "resalloc/protocol.hpp"

#include <algorithm>

namespace resalloc {

GlobalState initial_state(const JobModelConfig& cfg, int process_count) {
  GlobalState st;
  st.procs.resize(static_cast<size_t>(process_count));
  for (auto& p : st.procs) {
    p.copy.assign(static_cast<size_t>(process_count), Job{});
    p.fun.assign(static_cast<size_t>(cfg.site_count), 0);
    p.news.assign(static_cast<size_t>(cfg.site_count), 0);
  }
  st.sites.resize(static_cast<size_t>(cfg.site_count));
  for (auto& s : st.sites)
    s.list.assign(static_cast<size_t>(process_count), 0);
  st.net = NetworkState(process_count, cfg.site_count);
  return st;
}

StepClass step_class(const StepId& step) {
  switch (step.kind) {
    case StepKind::kNewJob:
    case StepKind::kNewNews:
    case StepKind::kAbort:
      return StepClass::kEnv;
    case StepKind::kForward:
      return StepClass::kFwd;
    case StepKind::kLower:
      return StepClass::kLow;
    default:
      return StepClass::kTrig;
  }
}

StepId new_job_step(ProcessId p, Job j) {
  StepId s;
  s.kind = StepKind::kNewJob;
  s.actor = p;
  s.line = 21;
  s.job = std::move(j);
  return s;
}
StepId new_news_step(ProcessId p, LevelFn news) {
  StepId s;
  s.kind = StepKind::kNewNews;
  s.actor = p;
  s.line = 31;
  s.news = std::move(news);
  return s;
}
StepId abort_step(ProcessId p, int line) {
  StepId s;
  s.kind = StepKind::kAbort;
  s.actor = p;
  s.line = line;
  return s;
}
StepId forward_step(ProcessId p, int line) {
  StepId s;
  s.kind = StepKind::kForward;
  s.actor = p;
  s.line = line;
  return s;
}
StepId lower_step(ProcessId p, int line) {
  StepId s;
  s.kind = StepKind::kLower;
  s.actor = p;
  s.line = line;
  return s;
}
StepId recv_step(ProcessId p, ProcessId from, MessageKey key) {
  StepId s;
  s.kind = StepKind::kRecv;
  s.actor = p;
  s.peer = from;
  s.key = key;
  return s;
}
StepId after_step(ProcessId p, ProcessId q) {
  StepId s;
  s.kind = StepKind::kAfter;
  s.actor = p;
  s.peer = q;
  return s;
}
StepId prom_step(ProcessId p, ProcessId q) {
  StepId s;
  s.kind = StepKind::kProm;
  s.actor = p;
  s.peer = q;
  return s;
}
StepId listen_step(ProcessId p, SiteId from, MessageKey key) {
  StepId s;
  s.kind = StepKind::kListen;
  s.actor = p;
  s.peer = from;
  s.key = key;
  return s;
}
StepId site_recv_step(SiteId site, ProcessId from, MessageKey key) {
  StepId s;
  s.kind = StepKind::kSiteRecv;
  s.actor = site;
  s.peer = from;
  s.key = key;
  return s;
}

StepNotEnabled::StepNotEnabled(const std::string& what)
    : std::runtime_error(what) {}

namespace {

// Higher part of need: members above the process itself.
Mask higher_than(Mask m, ProcessId p) {
  return m & ~(bits::unit(p) | (bits::unit(p) - 1));
}

bool prom_guard(const JobModelConfig& cfg, const ProcessState& ps,
                ProcessId peer, const Mutation& mut) {
  if (!bits::has(ps.prom, peer)) return false;
  if (mut.drop_prom_guard) return true;
  return ps.pc <= 26 ||
         compatible(ps.job, ps.copy[static_cast<size_t>(peer)], cfg.K);
}

}  // namespace

bool enabled(const JobModelConfig& cfg, const GlobalState& st,
             const StepId& step, const Mutation& mut) {
  switch (step.kind) {
    case StepKind::kNewJob: {
      const ProcessState& p = st.procs[static_cast<size_t>(step.actor)];
      return p.pc == 21 && !step.job.is_none();
    }
    case StepKind::kNewNews: {
      const ProcessState& p = st.procs[static_cast<size_t>(step.actor)];
      return p.pcr == 31 && step.news.size() == p.fun.size() &&
             level_fn_leq(step.news, p.fun);
    }
    case StepKind::kAbort: {
      const ProcessState& p = st.procs[static_cast<size_t>(step.actor)];
      switch (step.line) {
        case 24: return p.pc == 24 && p.pack == 0;
        case 25: return p.pc == 25;
        case 26: return p.pc == 26 && higher_than(p.need, step.actor) == 0;
        default: return false;
      }
    }
    case StepKind::kForward: {
      const ProcessState& p = st.procs[static_cast<size_t>(step.actor)];
      if (p.pc != step.line) return false;
      switch (step.line) {
        case 22: return p.pcr <= 32;
        case 23: return p.curlist == 0;
        case 24: return (p.pack | p.wack) == 0;
        case 25: return mut.drop_line25_guard || p.prio == 0;
        case 26: return p.need == 0;
        case 27: return true;
        case 28: return true;
        default: return false;
      }
    }
    case StepKind::kLower: {
      const ProcessState& p = st.procs[static_cast<size_t>(step.actor)];
      if (step.line == 32) {
        if (p.pcr != 32) return false;
        return p.pc == 21 ||
               (p.pc >= 25 &&
                level_fn_leq(level_requirements(p.job, cfg), p.news));
      }
      if (step.line == 33) return p.pcr == 33 && p.reglist == 0;
      return false;
    }
    case StepKind::kRecv:
      return st.net.occupied(step.key, step.peer, step.actor);
    case StepKind::kAfter: {
      const ProcessState& p = st.procs[static_cast<size_t>(step.actor)];
      return bits::has(p.after, step.peer) &&
             !p.copy[static_cast<size_t>(step.peer)].is_none();
    }
    case StepKind::kProm:
      return prom_guard(cfg, st.procs[static_cast<size_t>(step.actor)],
                        step.peer, mut);
    case StepKind::kListen:
      return st.net.occupied(step.key, step.peer, step.actor);
    case StepKind::kSiteRecv:
      return st.net.occupied(step.key, step.peer, step.actor);
  }
  return false;
}

namespace {

void send_void_logged(GlobalState& st, SendLog* log, MessageKey k, int from,
                      int to) {
  st.net.send_void(k, from, to);
  if (log) log->push_back({k, from, to});
}

void send_valued_logged(GlobalState& st, SendLog* log, MessageKey k, int from,
                        int to, MessageValue v) {
  st.net.send_valued(k, from, to, std::move(v));
  if (log) log->push_back({k, from, to});
}

}  // namespace

void apply(const JobModelConfig& cfg, GlobalState& st, const StepId& step,
           SendLog* log, const Mutation& mut) {
  if (!enabled(cfg, st, step, mut)) {
    throw StepNotEnabled("step not enabled in this state");
  }
  ProcessId self = step.actor;
  switch (step.kind) {
    case StepKind::kNewJob: {
      ProcessState& p = st.procs[static_cast<size_t>(self)];
      p.job = step.job;
      p.pc = 22;
      return;
    }
    case StepKind::kNewNews: {
      ProcessState& p = st.procs[static_cast<size_t>(self)];
      p.news = step.news;
      p.pcr = 32;
      return;
    }
    case StepKind::kAbort: {
      ProcessState& p = st.procs[static_cast<size_t>(self)];
      switch (step.line) {
        case 24:
          p.job = Job{};
          p.nbh = 0;
          p.pc = 21;
          return;
        case 25:
          p.job = Job{};
          p.nbh = 0;
          p.prio = 0;
          p.pc = 21;
          return;
        case 26:
          bits::for_each(p.nbh, [&](int q) {
            send_void_logged(st, log, MessageKey::kWithdraw, self, q);
          });
          p.wack = p.nbh;
          p.need = 0;
          p.job = Job{};
          p.nbh = 0;
          p.nbh0 = 0;
          p.pc = 21;
          return;
      }
      return;
    }
    case StepKind::kForward: {
      ProcessState& p = st.procs[static_cast<size_t>(self)];
      switch (step.line) {
        case 22: {
          LevelFn req = level_requirements(p.job, cfg);
          p.curlist = 0;
          for (SiteId s = 0; s < cfg.site_count; ++s) {
            if (req[static_cast<size_t>(s)] > 0) bits::add(p.curlist, s);
          }
          bits::for_each(p.curlist, [&](int s) {
            send_valued_logged(st, log, MessageKey::kAsklist, self, s,
                               req[static_cast<size_t>(s)]);
          });
          p.pc = 23;
          return;
        }
        case 23: {
          bits::for_each(p.pack, [&](int q) {
            send_void_logged(st, log, MessageKey::kHello, self, q);
          });
          p.pc = 24;
          return;
        }
        case 24: {
          // Known incompatible jobs. Peers without a recorded copy are
          // compatible by definition, so the set is finite.
          p.prio = 0;
          for (ProcessId q = 0; q < st.process_count(); ++q) {
            const Job& c = p.copy[static_cast<size_t>(q)];
            if (c.is_none()) continue;
            if (bits::has(p.after, q)) continue;
            if (!compatible(p.job, c, cfg.K)) bits::add(p.prio, q);
          }
          p.pc = 25;
          return;
        }
        case 25: {
          p.nbh0 = p.nbh;
          bits::for_each(p.nbh, [&](int q) {
            send_valued_logged(st, log, MessageKey::kNotify, self, q, p.job);
          });
          p.need = 0;
          bits::for_each(p.nbh, [&](int q) {
            if (self < q ||
                (bits::has(p.away, q) &&
                 !compatible(p.job, p.copy[static_cast<size_t>(q)], cfg.K))) {
              bits::add(p.need, q);
            }
          });
          p.pc = 26;
          return;
        }
        case 26:
          p.pc = 27;
          return;
        case 27:
          p.pc = 28;
          return;
        case 28: {
          bits::for_each(p.nbh, [&](int q) {
            send_void_logged(st, log, MessageKey::kWithdraw, self, q);
          });
          p.wack = p.nbh;
          p.job = Job{};
          p.nbh = 0;
          p.nbh0 = 0;
          p.pc = 21;
          return;
        }
      }
      return;
    }
    case StepKind::kLower: {
      ProcessState& p = st.procs[static_cast<size_t>(self)];
      if (step.line == 32) {
        p.reglist = 0;
        for (SiteId s = 0; s < cfg.site_count; ++s) {
          if (p.news[static_cast<size_t>(s)] != p.fun[static_cast<size_t>(s)])
            bits::add(p.reglist, s);
        }
        p.fun = p.news;
        bits::for_each(p.reglist, [&](int s) {
          send_valued_logged(st, log, MessageKey::kLower, self, s,
                             p.news[static_cast<size_t>(s)]);
        });
        p.pcr = 33;
      } else {
        p.pcr = 31;
      }
      return;
    }
    case StepKind::kRecv: {
      ProcessState& p = st.procs[static_cast<size_t>(self)];
      ProcessId q = step.peer;
      auto v = st.net.consume(step.key, q, self);
      switch (step.key) {
        case MessageKey::kNotify: {
          p.copy[static_cast<size_t>(q)] = std::get<Job>(*v);
          if (q < self) bits::add(p.prom, q);
          return;
        }
        case MessageKey::kWithdraw: {
          bits::add(p.after, q);
          bits::remove(p.prio, q);
          if (q < self) {
            bits::remove(p.away, q);
            bits::remove(p.need, q);
          }
          return;
        }
        case MessageKey::kAck:
          bits::remove(p.wack, q);
          return;
        case MessageKey::kGra:
          bits::remove(p.need, q);
          return;
        case MessageKey::kHello: {
          // The welcome payload is decided before q joins nbh.
          Job payload;
          if (p.pc >= 26 && !bits::has(p.nbh, q)) payload = p.job;
          send_valued_logged(st, log, MessageKey::kWelcome, self, q,
                             std::move(payload));
          if (p.pc >= 23) bits::add(p.nbh, q);
          return;
        }
        case MessageKey::kWelcome: {
          bits::remove(p.pack, q);
          const Job& j = std::get<Job>(*v);
          if (!j.is_none()) p.copy[static_cast<size_t>(q)] = j;
          return;
        }
        default:
          return;
      }
    }
    case StepKind::kAfter: {
      ProcessState& p = st.procs[static_cast<size_t>(self)];
      ProcessId q = step.peer;
      send_void_logged(st, log, MessageKey::kAck, self, q);
      bits::remove(p.after, q);
      p.copy[static_cast<size_t>(q)] = Job{};
      return;
    }
    case StepKind::kProm: {
      ProcessState& p = st.procs[static_cast<size_t>(self)];
      ProcessId q = step.peer;
      send_void_logged(st, log, MessageKey::kGra, self, q);
      bits::add(p.away, q);
      bits::remove(p.prom, q);
      if (p.pc == 26 &&
          !compatible(p.job, p.copy[static_cast<size_t>(q)], cfg.K)) {
        bits::add(p.need, q);
      }
      return;
    }
    case StepKind::kListen: {
      ProcessState& p = st.procs[static_cast<size_t>(self)];
      SiteId s = step.peer;
      auto v = st.net.consume(step.key, s, self);
      if (step.key == MessageKey::kAnswer) {
        Mask others = std::get<Mask>(*v) & ~bits::unit(self);
        p.nbh |= others;
        Level want = level_requirement(p.job, s, cfg.loc);
        if (p.fun[static_cast<size_t>(s)] < want) {
          p.pack |= others;
          p.fun[static_cast<size_t>(s)] = want;
        }
        bits::remove(p.curlist, s);
      } else {  // done
        bits::remove(p.reglist, s);
      }
      return;
    }
    case StepKind::kSiteRecv: {
      SiteId s = step.actor;
      ProcessId q = step.peer;
      SiteState& site = st.sites[static_cast<size_t>(s)];
      auto v = st.net.consume(step.key, q, s);
      Level k = std::get<Level>(*v);
      if (step.key == MessageKey::kAsklist) {
        site.list[static_cast<size_t>(q)] =
            std::max(site.list[static_cast<size_t>(q)], k);
        Mask competitors = 0;
        for (ProcessId r = 0; r < st.process_count(); ++r) {
          if (site.list[static_cast<size_t>(r)] > cfg.K - k)
            bits::add(competitors, r);
        }
        send_valued_logged(st, log, MessageKey::kAnswer, s, q, competitors);
      } else {  // lower
        site.list[static_cast<size_t>(q)] = k;
        send_void_logged(st, log, MessageKey::kDone, s, q);
      }
      return;
    }
  }
}

std::vector<StepId> enabled_steps(const JobModelConfig& cfg,
                                  const GlobalState& st, const Mutation& mut) {
  std::vector<StepId> out;
  int n = st.process_count();
  for (ProcessId p = 0; p < n; ++p) {
    const ProcessState& ps = st.procs[static_cast<size_t>(p)];
    if (ps.pc >= 22 && ps.pc <= 28) {
      StepId s = forward_step(p, ps.pc);
      if (enabled(cfg, st, s, mut)) out.push_back(std::move(s));
    }
    if (ps.pcr == 32 || ps.pcr == 33) {
      StepId s = lower_step(p, ps.pcr);
      if (enabled(cfg, st, s, mut)) out.push_back(std::move(s));
    }
    bits::for_each(ps.after, [&](int q) {
      if (!ps.copy[static_cast<size_t>(q)].is_none())
        out.push_back(after_step(p, q));
    });
    bits::for_each(ps.prom, [&](int q) {
      if (prom_guard(cfg, ps, q, mut)) out.push_back(prom_step(p, q));
    });
  }
  for (const auto& ch : st.net.deliverable()) {
    switch (ch.key) {
      case MessageKey::kNotify:
      case MessageKey::kWithdraw:
      case MessageKey::kAck:
      case MessageKey::kGra:
      case MessageKey::kHello:
      case MessageKey::kWelcome:
        out.push_back(recv_step(ch.to, ch.from, ch.key));
        break;
      case MessageKey::kAnswer:
      case MessageKey::kDone:
        out.push_back(listen_step(ch.to, ch.from, ch.key));
        break;
      case MessageKey::kAsklist:
      case MessageKey::kLower:
        out.push_back(site_recv_step(ch.to, ch.from, ch.key));
        break;
    }
  }
  return out;
}

}  // namespace resalloc
