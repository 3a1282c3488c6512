#include "resalloc/simulator.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <unordered_map>

#include "resalloc/liveness.hpp"
#include "resalloc/rng.hpp"
#include "resalloc/serial.hpp"

namespace resalloc {

namespace {

// Environment offers for one scheduler round, drawn in process order so the
// rng stream is a deterministic function of (state, seed).
std::vector<StepId> workload_offers(const ScenarioConfig& cfg,
                                    const GlobalState& st, Rng& rng) {
  std::vector<StepId> out;
  for (int p = 0; p < cfg.process_count; ++p) {
    const ProcessState& ps = st.procs[static_cast<size_t>(p)];
    if (ps.pc == 21 && rng.chance(cfg.arrival_prob)) {
      const auto& fixed = cfg.jobs_for(p);
      Job j;
      if (!fixed.empty()) {
        j = fixed[rng.below(fixed.size())];
      } else {
        for (int c = 0; c < cfg.jm.resource_count; ++c) {
          if (rng.chance(cfg.random_job_resource_prob))
            j.set_level(c, rng.range(1, cfg.jm.K));
        }
        if (j.is_none())
          j.set_level(rng.range(0, cfg.jm.resource_count - 1),
                      rng.range(1, cfg.jm.K));
      }
      out.push_back(new_job_step(p, std::move(j)));
    }
    if (ps.pc == 24 && ps.pack == 0 && rng.chance(cfg.abort_prob24))
      out.push_back(abort_step(p, 24));
    if (ps.pc == 25 && rng.chance(cfg.abort_prob25))
      out.push_back(abort_step(p, 25));
    if (ps.pc == 26 && rng.chance(cfg.abort_prob26)) {
      StepId s = abort_step(p, 26);
      if (enabled(cfg.jm, st, s, cfg.mutation)) out.push_back(std::move(s));
    }
    if (ps.pcr == 31 && rng.chance(cfg.lower_prob)) {
      LevelFn news(ps.fun.size());
      for (size_t s = 0; s < ps.fun.size(); ++s)
        news[s] = rng.range(0, ps.fun[s]);
      out.push_back(new_news_step(p, std::move(news)));
    }
  }
  return out;
}

// Whether the workload could ever offer anything from here; when not, and no
// protocol step is enabled, the run has quiesced for good.
bool offers_possible(const ScenarioConfig& cfg, const GlobalState& st) {
  for (int p = 0; p < cfg.process_count; ++p) {
    const ProcessState& ps = st.procs[static_cast<size_t>(p)];
    if (ps.pc == 21 && cfg.arrival_prob > 0.0) return true;
    if (ps.pc == 24 && ps.pack == 0 && cfg.abort_prob24 > 0.0) return true;
    if (ps.pc == 25 && cfg.abort_prob25 > 0.0) return true;
    if (ps.pc == 26 && cfg.abort_prob26 > 0.0 &&
        enabled(cfg.jm, st, abort_step(p, 26), cfg.mutation))
      return true;
    if (ps.pcr == 31 && cfg.lower_prob > 0.0) return true;
  }
  return false;
}

struct ChannelOccupancy {
  std::int64_t max_seen = 0;
  std::vector<std::string> overfull;

  void observe(const GlobalState& st, const SendLog& sends) {
    for (const SendEvent& e : sends) {
      if (is_valued(e.key)) continue;
      int c = st.net.void_count(e.key, e.from, e.to);
      if (c > max_seen) max_seen = c;
      if (c > 1) {
        overfull.push_back(std::string(to_string(e.key)) + " " +
                           std::to_string(e.from) + "->" +
                           std::to_string(e.to));
      }
    }
  }
};

}  // namespace

RunResult run(const ScenarioConfig& cfg) {
  RunResult res;
  res.trace.scenario_text = serialize_scenario(cfg);
  RunStats& stats = res.stats;
  stats.cs_entries.assign(static_cast<size_t>(cfg.process_count), 0);
  stats.aborts.assign(static_cast<size_t>(cfg.process_count), 0);
  stats.max_off21_rounds.assign(static_cast<size_t>(cfg.process_count), 0);

  GlobalState st = initial_state(cfg.jm, cfg.process_count);
  Rng rng(cfg.seed);
  std::map<StepId, std::int64_t> ages;
  std::vector<std::int64_t> sf32(static_cast<size_t>(cfg.process_count), 0);
  std::vector<std::int64_t> off21_since(
      static_cast<size_t>(cfg.process_count), -1);
  ChannelOccupancy occupancy;
  std::int64_t steps = 0;
  std::int64_t round = 0;
  std::int64_t consecutive_idle = 0;
  constexpr std::int64_t kIdleLimit = 1000000;
  TerminalStatus status = TerminalStatus::kCompleted;

  auto enumerate = [&] {
    std::vector<StepId> v = enabled_steps(cfg.jm, st, cfg.mutation);
    if (cfg.freeze_at_27 != 0) {
      std::erase_if(v, [&](const StepId& s) {
        return s.kind == StepKind::kForward && s.line == 27 &&
               bits::has(cfg.freeze_at_27, s.actor);
      });
    }
    return v;
  };

  std::vector<StepId> enabled_now = enumerate();

  auto take = [&](const StepId& step) {
    SendLog sends;
    std::optional<MessageValue> consumed;
    bool valued_recv =
        (step.kind == StepKind::kRecv || step.kind == StepKind::kListen ||
         step.kind == StepKind::kSiteRecv) &&
        is_valued(step.key);
    if (valued_recv) {
      // Peek before the step body consumes the slot, for the trace record.
      switch (step.key) {
        case MessageKey::kNotify:
          consumed = *st.net.notify(step.peer, step.actor);
          break;
        case MessageKey::kWelcome:
          consumed = *st.net.welcome(step.peer, step.actor);
          break;
        case MessageKey::kAsklist:
          consumed = *st.net.asklist(step.peer, step.actor);
          break;
        case MessageKey::kLower:
          consumed = *st.net.lower(step.peer, step.actor);
          break;
        case MessageKey::kAnswer:
          consumed = *st.net.answer(step.peer, step.actor);
          break;
        default:
          break;
      }
    }
    apply(cfg.jm, st, step, &sends, cfg.mutation);
    occupancy.observe(st, sends);
    if (step.kind == StepKind::kForward && step.line == 26)
      ++stats.cs_entries[static_cast<size_t>(step.actor)];
    if (step.kind == StepKind::kAbort)
      ++stats.aborts[static_cast<size_t>(step.actor)];
    if (step.kind == StepKind::kLower && step.line == 32)
      sf32[static_cast<size_t>(step.actor)] = 0;

    TraceRecord rec;
    rec.index = steps;
    rec.round = round;
    rec.step = step;
    rec.consumed = std::move(consumed);
    ++steps;
    bool last = steps >= cfg.max_steps;
    if (steps % cfg.hash_every == 0 || last) rec.hash = state_hash(st);
    res.trace.records.push_back(std::move(rec));
    ages.erase(step);

    if (steps % cfg.check_every == 0 || last) {
      std::vector<Violation> vs = check_all(cfg.jm, st);
      if (!vs.empty()) {
        Violation v = vs.front();
        v.step_index = steps - 1;
        res.trace.violation = v;
        status = TerminalStatus::kViolation;
        return false;
      }
    }
    enabled_now = enumerate();
    return true;
  };

  bool running = true;
  try {
    while (running && steps < cfg.max_steps) {
      ++round;
      for (int p = 0; p < cfg.process_count; ++p) {
        bool off = st.procs[static_cast<size_t>(p)].pc != 21;
        auto& since = off21_since[static_cast<size_t>(p)];
        if (off && since < 0) since = round;
        if (!off && since >= 0) {
          stats.max_off21_rounds[static_cast<size_t>(p)] = std::max(
              stats.max_off21_rounds[static_cast<size_t>(p)], round - since);
          since = -1;
        }
      }
      // Round boundary: age every continuously enabled non-environment step,
      // and count enabled rounds of the lowering step at 32 for strong
      // fairness.
      {
        std::map<StepId, std::int64_t> next;
        for (const StepId& s : enabled_now) {
          auto it = ages.find(s);
          std::int64_t a = (it == ages.end() ? 0 : it->second) + 1;
          next[s] = a;
          stats.max_enabled_age = std::max(stats.max_enabled_age, a);
          if (cfg.strong_fairness_32 && s.kind == StepKind::kLower &&
              s.line == 32) {
            auto& c = sf32[static_cast<size_t>(s.actor)];
            ++c;
            stats.max_sf32_rounds = std::max(stats.max_sf32_rounds, c);
          }
        }
        ages = std::move(next);
      }
      // Serve every overdue step before any free choice.
      while (steps < cfg.max_steps) {
        const StepId* forced = nullptr;
        std::int64_t best = 0;
        for (const StepId& s : enabled_now) {
          std::int64_t a = 0;
          auto it = ages.find(s);
          if (it != ages.end()) a = it->second;
          if (cfg.strong_fairness_32 && s.kind == StepKind::kLower &&
              s.line == 32)
            a = std::max(a, sf32[static_cast<size_t>(s.actor)]);
          if (a >= cfg.fairness && (forced == nullptr || a > best)) {
            forced = &s;
            best = a;
          }
        }
        if (forced == nullptr) break;
        StepId chosen = *forced;
        if (!take(chosen)) {
          running = false;
          break;
        }
      }
      if (!running || steps >= cfg.max_steps) break;
      // Free choice: one enabled step or offered environment step, uniform.
      std::vector<StepId> pool = enabled_now;
      std::vector<StepId> offers = workload_offers(cfg, st, rng);
      for (StepId& o : offers) {
        if (enabled(cfg.jm, st, o, cfg.mutation)) pool.push_back(std::move(o));
      }
      if (pool.empty()) {
        if (!offers_possible(cfg, st)) break;  // quiesced for good
        if (++consecutive_idle > kIdleLimit) {
          status = TerminalStatus::kStepLimit;  // offers remained possible
          break;
        }
        ++stats.idle_rounds;
        continue;
      }
      consecutive_idle = 0;
      StepId chosen = pool[rng.below(pool.size())];
      if (!take(chosen)) break;
    }
  } catch (const OverwriteInTransit&) {
    status = TerminalStatus::kViolation;
    // Recorded as an Iq7a-shaped failure: a send precondition did not hold.
    // The interrupted body may have left the working state half applied, so
    // rebuild it from the recorded steps.
    if (!res.trace.violation) {
      Violation v;
      v.id = InvariantId::kIq7a;
      v.step_index = steps;
      res.trace.violation = v;
    }
    st = initial_state(cfg.jm, cfg.process_count);
    for (const TraceRecord& rec : res.trace.records)
      apply(cfg.jm, st, rec.step, nullptr, cfg.mutation);
  }

  if (status == TerminalStatus::kCompleted &&
      steps % cfg.check_every != 0 && steps > 0) {
    // Sampled checking may have skipped the state the run stopped in.
    std::vector<Violation> vs = check_all(cfg.jm, st);
    if (!vs.empty()) {
      Violation v = vs.front();
      v.step_index = steps - 1;
      res.trace.violation = v;
      status = TerminalStatus::kViolation;
    }
  }

  for (int p = 0; p < cfg.process_count; ++p) {
    auto& since = off21_since[static_cast<size_t>(p)];
    if (since >= 0) {
      stats.max_off21_rounds[static_cast<size_t>(p)] = std::max(
          stats.max_off21_rounds[static_cast<size_t>(p)], round - since);
    }
  }
  stats.rounds = round;
  stats.max_void_occupancy = occupancy.max_seen;
  stats.overfull_channels = std::move(occupancy.overfull);
  res.trace.status = status;
  res.trace.rounds = round;
  res.trace.final_hash = state_hash(st);
  res.stats.messages = message_stats(res.trace);
  return res;
}

ExplorationReport explore(const ScenarioConfig& cfg,
                          const ExploreOptions& opts) {
  ExplorationReport rep;
  GlobalState init = initial_state(cfg.jm, cfg.process_count);

  // Exhaustive runs verify hash collisions against the full encoding, so
  // distinct states are never merged.
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> index;
  std::vector<std::string> canon;
  auto seen = [&](const GlobalState& st) {
    std::string bytes = canonical_bytes(st);
    std::uint64_t h = fnv1a64(bytes);
    auto& bucket = index[h];
    for (std::uint32_t i : bucket) {
      if (canon[i] == bytes) return true;
    }
    bucket.push_back(static_cast<std::uint32_t>(canon.size()));
    canon.push_back(std::move(bytes));
    return false;
  };

  LevelFn zeros(static_cast<size_t>(cfg.jm.site_count), 0);
  auto env_offers = [&](const GlobalState& st) {
    std::vector<StepId> out;
    for (int p = 0; p < cfg.process_count; ++p) {
      const ProcessState& ps = st.procs[static_cast<size_t>(p)];
      if (ps.pc == 21) {
        for (const Job& j : cfg.jobs_for(p)) out.push_back(new_job_step(p, j));
      }
      if (cfg.explore_aborts) {
        for (int line : {24, 25, 26}) {
          StepId s = abort_step(p, line);
          if (enabled(cfg.jm, st, s, cfg.mutation)) out.push_back(std::move(s));
        }
      }
      if (cfg.explore_lower_to_zero && ps.pcr == 31 &&
          !level_fn_leq(ps.fun, zeros)) {
        out.push_back(new_news_step(p, zeros));
      }
    }
    return out;
  };

  bool seen_id[kInvariantCount] = {};
  auto note_violations = [&](const GlobalState& st) {
    std::vector<Violation> vs = check_all(cfg.jm, st);
    for (Violation& v : vs) {
      // First witness per invariant id; later states add nothing new.
      if (!seen_id[static_cast<size_t>(v.id)]) {
        seen_id[static_cast<size_t>(v.id)] = true;
        rep.violations.push_back(v);
      }
    }
    return vs.empty();
  };

  auto analyse = [&](const GlobalState& st, bool terminal) {
    if (!terminal && opts.liveness != ExploreOptions::Liveness::kAllStates)
      return;
    Mask silent = silent_set(cfg.jm, st);
    bits::for_each(silent, [&](int q) {
      if (auto fail = check_wax(cfg.jm, st, q))
        rep.liveness_failures.push_back(*fail);
    });
    auto w = theorem2_violating_set(cfg.jm, st);
    if (w) {
      rep.liveness_failures.push_back(
          "locked set with no outgoing conflict: " + mask_to_string(*w, 'p'));
    }
    if (terminal) {
      TerminalReport tr;
      tr.hash = state_hash(st);
      for (int p = 0; p < cfg.process_count; ++p) {
        if (st.procs[static_cast<size_t>(p)].pc != 21 &&
            bits::has(silent, p))
          bits::add(tr.locked, p);
      }
      tr.theorem2_ok = !w.has_value();
      if (w) tr.detail = rep.liveness_failures.back();
      rep.terminals.push_back(tr);
    }
  };

  std::deque<std::pair<GlobalState, int>> queue;
  seen(init);
  rep.states = 1;
  if (opts.on_state) opts.on_state(init);
  if (!note_violations(init) && opts.stop_on_violation) return rep;
  queue.emplace_back(init, 0);

  while (!queue.empty()) {
    auto [st, depth] = std::move(queue.front());
    queue.pop_front();
    rep.depth_reached = std::max(rep.depth_reached, depth);

    std::vector<StepId> protocol_steps =
        enabled_steps(cfg.jm, st, cfg.mutation);
    bool terminal = protocol_steps.empty();
    analyse(st, terminal);

    std::vector<StepId> all = std::move(protocol_steps);
    for (StepId& s : env_offers(st)) all.push_back(std::move(s));
    if (cfg.explore_max_depth > 0 && depth >= cfg.explore_max_depth) {
      if (!all.empty()) rep.complete = false;
      continue;
    }
    for (const StepId& s : all) {
      GlobalState succ = st;
      try {
        apply(cfg.jm, succ, s, nullptr, cfg.mutation);
      } catch (const OverwriteInTransit&) {
        Violation v;
        v.id = InvariantId::kIq7a;
        rep.violations.push_back(v);
        if (opts.stop_on_violation) return rep;
        continue;
      }
      ++rep.transitions;
      if (seen(succ)) continue;
      ++rep.states;
      if (opts.on_state) opts.on_state(succ);
      if (!note_violations(succ) && opts.stop_on_violation) return rep;
      if (rep.states > cfg.explore_max_states) {
        rep.complete = false;
        return rep;
      }
      queue.emplace_back(std::move(succ), depth + 1);
    }
  }
  return rep;
}

GlobalState replay(const Trace& trace, std::int64_t upto) {
  ScenarioConfig cfg = parse_scenario(trace.scenario_text);
  GlobalState st = initial_state(cfg.jm, cfg.process_count);
  std::int64_t n = upto < 0 ? static_cast<std::int64_t>(trace.records.size())
                            : upto;
  for (std::int64_t i = 0; i < n && i < static_cast<std::int64_t>(
                                            trace.records.size());
       ++i) {
    apply(cfg.jm, st, trace.records[static_cast<size_t>(i)].step, nullptr,
          cfg.mutation);
  }
  return st;
}

MessageStatsReport message_stats(const Trace& trace) {
  ScenarioConfig cfg = parse_scenario(trace.scenario_text);
  int n = cfg.process_count;
  MessageStatsReport rep;

  GlobalState st = initial_state(cfg.jm, n);
  std::vector<int> open(static_cast<size_t>(n), -1);  // passage index per p
  // Outstanding withdraw acknowledgments: (p, q) -> passage index.
  std::map<std::pair<int, int>, int> pending_ack;
  std::vector<int> outstanding(0);

  auto ensure_counts = [&](Passage& pa) {
    if (!pa.counts.empty() || pa.nbh0 == 0) return;
    bits::for_each(pa.nbh0, [&](int q) { pa.counts.emplace(q, NeighbourCounts{}); });
  };

  for (const TraceRecord& rec : trace.records) {
    const StepId& s = rec.step;
    SendLog sends;
    apply(cfg.jm, st, s, &sends, cfg.mutation);

    if (s.kind == StepKind::kNewJob) {
      rep.passages.push_back({});
      Passage& pa = rep.passages.back();
      pa.p = s.actor;
      pa.started_step = rec.index;
      open[static_cast<size_t>(s.actor)] =
          static_cast<int>(rep.passages.size()) - 1;
      outstanding.push_back(0);
    }
    int cur = s.actor < n ? open[static_cast<size_t>(s.actor)] : -1;

    if (s.kind == StepKind::kForward && cur >= 0) {
      Passage& pa = rep.passages[static_cast<size_t>(cur)];
      if (s.line == 25) {
        pa.nbh0 = st.procs[static_cast<size_t>(s.actor)].nbh0;
        ensure_counts(pa);
        for (const SendEvent& e : sends) {
          if (e.key == MessageKey::kNotify && bits::has(pa.nbh0, e.to))
            ++pa.counts[e.to].notify;
        }
      } else if (s.line == 26) {
        pa.entered_cs_step = rec.index;
      } else if (s.line == 28) {
        pa.completed = true;
        pa.completed_step = rec.index;
        for (const SendEvent& e : sends) {
          if (e.key != MessageKey::kWithdraw) continue;
          pending_ack[{s.actor, e.to}] = cur;
          ++outstanding[static_cast<size_t>(cur)];
          if (bits::has(pa.nbh0, e.to)) ++pa.counts[e.to].withdraw;
        }
        if (outstanding[static_cast<size_t>(cur)] == 0) pa.settled = true;
        open[static_cast<size_t>(s.actor)] = -1;
      }
    } else if (s.kind == StepKind::kAbort && cur >= 0) {
      Passage& pa = rep.passages[static_cast<size_t>(cur)];
      pa.aborted = true;
      pa.completed_step = rec.index;
      for (const SendEvent& e : sends) {
        if (e.key != MessageKey::kWithdraw) continue;
        pending_ack[{s.actor, e.to}] = cur;
        ++outstanding[static_cast<size_t>(cur)];
      }
      if (outstanding[static_cast<size_t>(cur)] == 0) pa.settled = true;
      open[static_cast<size_t>(s.actor)] = -1;
    } else if (s.kind == StepKind::kRecv) {
      if (s.key == MessageKey::kAck) {
        auto it = pending_ack.find({s.actor, s.peer});
        if (it != pending_ack.end()) {
          Passage& pa = rep.passages[static_cast<size_t>(it->second)];
          if (bits::has(pa.nbh0, s.peer)) ++pa.counts[s.peer].ack;
          if (--outstanding[static_cast<size_t>(it->second)] == 0)
            pa.settled = true;
          pending_ack.erase(it);
        }
      } else if (s.key == MessageKey::kGra && cur >= 0) {
        Passage& pa = rep.passages[static_cast<size_t>(cur)];
        if (bits::has(pa.nbh0, s.peer)) ++pa.counts[s.peer].gra;
      }
    }
  }

  for (const Passage& pa : rep.passages) {
    if (!pa.completed) continue;
    ++rep.completed_passages;
    if (!pa.settled) continue;
    ++rep.settled_passages;
    for (const auto& [q, c] : pa.counts) {
      int expect_gra = q > pa.p ? 1 : 0;
      if (c.notify != 1 || c.withdraw != 1 || c.ack != 1 ||
          c.gra != expect_gra) {
        rep.nonconforming.push_back(
            "p" + std::to_string(pa.p) + " passage at step " +
            std::to_string(pa.started_step) + " neighbour p" +
            std::to_string(q) + ": notify=" + std::to_string(c.notify) +
            " withdraw=" + std::to_string(c.withdraw) +
            " ack=" + std::to_string(c.ack) + " gra=" + std::to_string(c.gra));
      }
    }
  }
  return rep;
}

}  // namespace resalloc
