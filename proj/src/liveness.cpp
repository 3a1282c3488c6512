#include "resalloc/liveness.hpp"

#include <algorithm>

#include "resalloc/invariants.hpp"
#include "resalloc/scenario.hpp"

namespace resalloc {

namespace {

bool own_steps_disabled(const JobModelConfig& cfg, const GlobalState& st,
                        ProcessId p) {
  const ProcessState& ps = st.procs[static_cast<size_t>(p)];
  if (ps.pc >= 22 && ps.pc <= 28 &&
      enabled(cfg, st, forward_step(p, ps.pc)))
    return false;
  if ((ps.pcr == 32 || ps.pcr == 33) &&
      enabled(cfg, st, lower_step(p, ps.pcr)))
    return false;
  for (int r = 0; r < st.process_count(); ++r) {
    if (!disabled_after(st, p, r)) return false;
    if (!disabled_prom(cfg, st, p, r)) return false;
  }
  return true;
}

bool incoming_answers_disabled(const JobModelConfig& cfg,
                               const GlobalState& st, ProcessId p) {
  for (int r = 0; r < st.process_count(); ++r) {
    if (r == p) continue;
    if (!disabled_after(st, r, p)) return false;
    if (!disabled_prom(cfg, st, r, p)) return false;
  }
  return true;
}

}  // namespace

bool is_silent(const JobModelConfig& cfg, const GlobalState& st,
               ProcessId p) {
  // Any message in transit from or to p keeps p active: receptions by p are
  // p's own triggered steps, and messages from p either trigger a reply to p
  // (hello, asklist, lower) or are receptions within p's fairness scope.
  if (st.net.any_touching_process(p)) return false;
  if (!own_steps_disabled(cfg, st, p)) return false;
  return incoming_answers_disabled(cfg, st, p);
}

bool is_locked(const JobModelConfig& cfg, const GlobalState& st,
               ProcessId p) {
  return st.procs[static_cast<size_t>(p)].pc != 21 && is_silent(cfg, st, p);
}

Mask silent_set(const JobModelConfig& cfg, const GlobalState& st) {
  Mask m = 0;
  for (int p = 0; p < st.process_count(); ++p) {
    if (is_silent(cfg, st, p)) bits::add(m, p);
  }
  return m;
}

LockedSetReport check_theorem2(const JobModelConfig& cfg,
                               const GlobalState& st, Mask w) {
  LockedSetReport rep;
  rep.w = w;
  rep.silent = true;
  bits::for_each(w, [&](int q) {
    if (!is_silent(cfg, st, q)) rep.silent = false;
  });
  bits::for_each(w, [&](int q) {
    if (st.procs[static_cast<size_t>(q)].pc != 21 && rep.silent)
      bits::add(rep.locked, q);
  });
  bits::for_each(w, [&](int q) {
    for (int r = 0; r < st.process_count(); ++r) {
      if (bits::has(w, r)) continue;
      if (conflict(cfg, st, q, r)) rep.conflict_edges.emplace_back(q, r);
    }
  });
  rep.theorem_ok =
      !(rep.silent && rep.locked != 0) || !rep.conflict_edges.empty();
  return rep;
}

std::optional<Mask> theorem2_violating_set(const JobModelConfig& cfg,
                                           const GlobalState& st) {
  // A violating W must contain, with each member, all its conflict
  // partners (otherwise a partner outside W is the required edge). So a
  // violation exists iff some locked process has its whole conflict
  // component inside the silent set; that component is then itself a
  // violating W. Equivalent to enumerating every nonempty subset.
  Mask silent = silent_set(cfg, st);
  int n = st.process_count();
  for (int q = 0; q < n; ++q) {
    if (!bits::has(silent, q)) continue;
    if (st.procs[static_cast<size_t>(q)].pc == 21) continue;
    Mask component = bits::unit(q);
    Mask frontier = component;
    while (frontier != 0) {
      Mask next = 0;
      bits::for_each(frontier, [&](int x) {
        for (int y = 0; y < n; ++y) {
          if (!bits::has(component, y) && conflict(cfg, st, x, y))
            bits::add(next, y);
        }
      });
      component |= next;
      frontier = next;
    }
    if ((component & ~silent) == 0) return component;
  }
  return std::nullopt;
}

std::optional<std::string> check_wax(const JobModelConfig& cfg,
                                     const GlobalState& st, ProcessId q) {
  const ProcessState& pq = st.procs[static_cast<size_t>(q)];
  if (pq.wack != 0) {
    return std::string("silent process p") + std::to_string(q) +
           " has nonempty wack";
  }
  std::optional<std::string> fail;
  bits::for_each(pq.prio, [&](int r) {
    if (fail) return;
    if (!(st.procs[static_cast<size_t>(r)].pc >= 26 &&
          conflict(cfg, st, q, r))) {
      fail = "silent p" + std::to_string(q) + ": prio member p" +
             std::to_string(r) + " not pinned in conflict";
    }
  });
  if (fail) return fail;
  bits::for_each(pq.need, [&](int r) {
    if (fail) return;
    int pc_r = st.procs[static_cast<size_t>(r)].pc;
    bool ok = r < q ? (pc_r >= 26 && conflict(cfg, st, q, r))
                    : (pc_r >= 27 && conflict(cfg, st, q, r));
    if (!ok) {
      fail = "silent p" + std::to_string(q) + ": need member p" +
             std::to_string(r) + " not pinned in conflict";
    }
  });
  return fail;
}

namespace {

struct ControlWalk {
  std::vector<int> pc;
  std::vector<int> pcr;

  explicit ControlWalk(int n) : pc(static_cast<size_t>(n), 21),
                                pcr(static_cast<size_t>(n), 31) {}

  bool feed(const StepId& s, std::string* why) {
    auto complain = [&](const std::string& m) {
      if (why) *why = m;
      return false;
    };
    int p = s.actor;
    switch (s.kind) {
      case StepKind::kNewJob:
        if (pc[static_cast<size_t>(p)] != 21)
          return complain("job arrival while p" + std::to_string(p) +
                          " is off the idle line");
        pc[static_cast<size_t>(p)] = 22;
        return true;
      case StepKind::kForward: {
        if (s.line < 22 || s.line > 28 ||
            pc[static_cast<size_t>(p)] != s.line)
          return complain("forward step at line " + std::to_string(s.line) +
                          " but p" + std::to_string(p) + " is at " +
                          std::to_string(pc[static_cast<size_t>(p)]));
        pc[static_cast<size_t>(p)] = s.line == 28 ? 21 : s.line + 1;
        return true;
      }
      case StepKind::kAbort:
        if (s.line < 24 || s.line > 26 ||
            pc[static_cast<size_t>(p)] != s.line)
          return complain("abort at line " + std::to_string(s.line) +
                          " but p" + std::to_string(p) + " is at " +
                          std::to_string(pc[static_cast<size_t>(p)]));
        pc[static_cast<size_t>(p)] = 21;
        return true;
      case StepKind::kNewNews:
        if (pcr[static_cast<size_t>(p)] != 31)
          return complain("news arrival while lowering thread busy");
        pcr[static_cast<size_t>(p)] = 32;
        return true;
      case StepKind::kLower:
        if (s.line != pcr[static_cast<size_t>(p)] ||
            (s.line != 32 && s.line != 33))
          return complain("lowering step at line " + std::to_string(s.line) +
                          " but thread is at " +
                          std::to_string(pcr[static_cast<size_t>(p)]));
        pcr[static_cast<size_t>(p)] = s.line == 32 ? 33 : 31;
        return true;
      default:
        return true;  // triggered steps do not move control
    }
  }
};

}  // namespace

bool check_unless(const Trace& trace, std::string* diagnostic) {
  ScenarioConfig cfg = parse_scenario(trace.scenario_text);
  ControlWalk walk(cfg.process_count);
  for (const TraceRecord& rec : trace.records) {
    std::string why;
    if (rec.step.actor < 0 || rec.step.actor >= cfg.process_count) {
      if (rec.step.kind != StepKind::kSiteRecv) {
        if (diagnostic) *diagnostic = "actor out of range";
        return false;
      }
    }
    if (!walk.feed(rec.step, &why)) {
      if (diagnostic)
        *diagnostic = "step " + std::to_string(rec.index) + ": " + why;
      return false;
    }
  }
  return true;
}

StarvationReport monitor_starvation(const Trace& trace,
                                    std::int64_t budget_rounds) {
  ScenarioConfig cfg = parse_scenario(trace.scenario_text);
  int n = cfg.process_count;
  StarvationReport rep;
  rep.max_off21_rounds.assign(static_cast<size_t>(n), 0);

  // Pass 1: replay, find per-process stretches off line 21 that exceed the
  // budget. The final state of an unfinished stretch is the trace end.
  struct Stretch {
    ProcessId p;
    std::int64_t start_round, end_round;
    std::int64_t start_index, end_index;  // record index range
  };
  std::vector<Stretch> over_budget;
  {
    GlobalState st = initial_state(cfg.jm, n);
    std::vector<std::int64_t> start_round(static_cast<size_t>(n), -1);
    std::vector<std::int64_t> start_index(static_cast<size_t>(n), -1);
    for (const TraceRecord& rec : trace.records) {
      apply(cfg.jm, st, rec.step, nullptr, cfg.mutation);
      for (int p = 0; p < n; ++p) {
        bool off = st.procs[static_cast<size_t>(p)].pc != 21;
        if (off && start_round[static_cast<size_t>(p)] < 0) {
          start_round[static_cast<size_t>(p)] = rec.round;
          start_index[static_cast<size_t>(p)] = rec.index;
        } else if (!off && start_round[static_cast<size_t>(p)] >= 0) {
          std::int64_t len = rec.round - start_round[static_cast<size_t>(p)];
          rep.max_off21_rounds[static_cast<size_t>(p)] =
              std::max(rep.max_off21_rounds[static_cast<size_t>(p)], len);
          if (len > budget_rounds) {
            over_budget.push_back({p, start_round[static_cast<size_t>(p)],
                                   rec.round,
                                   start_index[static_cast<size_t>(p)],
                                   rec.index});
          }
          start_round[static_cast<size_t>(p)] = -1;
        }
      }
    }
    for (int p = 0; p < n; ++p) {
      if (start_round[static_cast<size_t>(p)] < 0) continue;
      std::int64_t len = trace.rounds - start_round[static_cast<size_t>(p)];
      rep.max_off21_rounds[static_cast<size_t>(p)] =
          std::max(rep.max_off21_rounds[static_cast<size_t>(p)], len);
      if (len > budget_rounds) {
        over_budget.push_back({p, start_round[static_cast<size_t>(p)],
                               trace.rounds,
                               start_index[static_cast<size_t>(p)],
                               static_cast<std::int64_t>(
                                   trace.records.size())});
      }
    }
  }
  if (over_budget.empty()) return rep;

  // Pass 2: for each flagged stretch, a witness r must be in conflict with p
  // at every recorded state from the round the budget was exceeded to the
  // stretch end.
  Mask everyone = n == 64 ? ~Mask{0} : bits::unit(n) - 1;
  std::vector<Mask> candidates(over_budget.size(), everyone);
  std::vector<bool> observed(over_budget.size(), false);
  {
    GlobalState st = initial_state(cfg.jm, n);
    for (const TraceRecord& rec : trace.records) {
      apply(cfg.jm, st, rec.step, nullptr, cfg.mutation);
      for (size_t i = 0; i < over_budget.size(); ++i) {
        const Stretch& f = over_budget[i];
        if (rec.index < f.start_index || rec.index >= f.end_index) continue;
        if (rec.round < f.start_round + budget_rounds) continue;
        observed[i] = true;
        Mask still = 0;
        for (int r = 0; r < n; ++r) {
          if (r != f.p && bits::has(candidates[i], r) &&
              conflict(cfg.jm, st, f.p, r))
            bits::add(still, r);
        }
        candidates[i] = still;
      }
    }
  }
  for (size_t i = 0; i < over_budget.size(); ++i) {
    const Stretch& f = over_budget[i];
    StarvationFlag flag;
    flag.p = f.p;
    flag.start_round = f.start_round;
    flag.over_round = f.start_round + budget_rounds;
    flag.end_round = f.end_round;
    if (observed[i] && candidates[i] != 0)
      flag.witness = std::countr_zero(candidates[i]);
    rep.flags.push_back(flag);
  }
  return rep;
}

}  // namespace resalloc
