#include <algorithm>

#include "doctest.h"
#include "resalloc/protocol.hpp"
#include "resalloc/serial.hpp"
#include "resalloc/simulator.hpp"

using namespace resalloc;

namespace {

JobModelConfig tiny_cfg() {
  JobModelConfig cfg;
  cfg.K = 1;
  cfg.resource_count = 1;
  cfg.site_count = 1;
  cfg.loc = {0};
  return cfg;
}

JobModelConfig rw_cfg() {
  JobModelConfig cfg;
  cfg.K = 2;
  cfg.resource_count = 1;
  cfg.site_count = 1;
  cfg.loc = {0};
  return cfg;
}

}  // namespace

TEST_CASE("initially only environment steps are enabled") {
  JobModelConfig cfg = tiny_cfg();
  GlobalState st = initial_state(cfg, 2);
  CHECK(enabled_steps(cfg, st).empty());
  CHECK(enabled(cfg, st, new_job_step(0, Job{{0, 1}})));
  CHECK_FALSE(enabled(cfg, st, new_job_step(0, Job{})));  // a job is not none
  CHECK(enabled(cfg, st, new_news_step(0, LevelFn{0})));
  CHECK_FALSE(enabled(cfg, st, new_news_step(0, LevelFn{1})));  // news <= fun
  CHECK_FALSE(enabled(cfg, st, forward_step(0, 22)));
}

TEST_CASE("waiting guards") {
  JobModelConfig cfg = tiny_cfg();
  GlobalState st = initial_state(cfg, 2);

  SUBCASE("a process at 26 with a need entry cannot move") {
    st.procs[0].pc = 26;
    bits::add(st.procs[0].need, 1);
    CHECK_FALSE(enabled(cfg, st, forward_step(0, 26)));
    st.procs[0].need = 0;
    CHECK(enabled(cfg, st, forward_step(0, 26)));
  }
  SUBCASE("abort at 24 only needs pack empty, forward needs wack too") {
    st.procs[0].pc = 24;
    bits::add(st.procs[0].wack, 1);
    CHECK(enabled(cfg, st, abort_step(0, 24)));
    CHECK_FALSE(enabled(cfg, st, forward_step(0, 24)));
  }
  SUBCASE("abort at 26 waits for the higher part of need") {
    st.procs[0].pc = 26;
    st.procs[1].pc = 26;
    bits::add(st.procs[0].need, 1);  // higher neighbour: blocked
    CHECK_FALSE(enabled(cfg, st, abort_step(0, 26)));
    bits::add(st.procs[1].need, 0);  // lower neighbour: allowed
    CHECK(enabled(cfg, st, abort_step(1, 26)));
  }
  SUBCASE("line 22 waits for the lowering thread") {
    st.procs[0].pc = 22;
    st.procs[0].job = Job{{0, 1}};
    CHECK(enabled(cfg, st, forward_step(0, 22)));
    st.procs[0].pcr = 33;
    CHECK_FALSE(enabled(cfg, st, forward_step(0, 22)));
  }
  SUBCASE("forward at 27 is always enabled") {
    st.procs[0].pc = 27;
    st.procs[0].job = Job{{0, 1}};
    auto steps = enabled_steps(cfg, st);
    CHECK(std::find(steps.begin(), steps.end(), forward_step(0, 27)) !=
          steps.end());
  }
}

TEST_CASE("passing 26 changes only the line") {
  JobModelConfig cfg = tiny_cfg();
  GlobalState st = initial_state(cfg, 2);
  st.procs[0].pc = 26;
  st.procs[0].job = Job{{0, 1}};
  GlobalState before = st;
  apply(cfg, st, forward_step(0, 26));
  CHECK(st.procs[0].pc == 27);
  st.procs[0].pc = before.procs[0].pc;
  CHECK(canonical_bytes(st) == canonical_bytes(before));
}

TEST_CASE("receiving withdraw moves the sender to after and unblocks") {
  JobModelConfig cfg = tiny_cfg();
  GlobalState st = initial_state(cfg, 2);
  // q = p0 is lower than p = p1
  st.procs[1].pc = 26;
  st.procs[1].job = Job{{0, 1}};
  bits::add(st.procs[1].away, 0);
  bits::add(st.procs[1].need, 0);
  bits::add(st.procs[1].prio, 0);
  st.net.send_void(MessageKey::kWithdraw, 0, 1);

  apply(cfg, st, recv_step(1, 0, MessageKey::kWithdraw));
  CHECK(bits::has(st.procs[1].after, 0));
  CHECK(st.procs[1].prio == 0);
  CHECK(st.procs[1].away == 0);
  CHECK(st.procs[1].need == 0);

  SUBCASE("a higher sender is not removed from away or need") {
    GlobalState st2 = initial_state(cfg, 3);
    bits::add(st2.procs[1].away, 2);
    bits::add(st2.procs[1].need, 2);
    st2.net.send_void(MessageKey::kWithdraw, 2, 1);
    apply(cfg, st2, recv_step(1, 2, MessageKey::kWithdraw));
    CHECK(bits::has(st2.procs[1].after, 2));
    CHECK(bits::has(st2.procs[1].away, 2));
    CHECK(bits::has(st2.procs[1].need, 2));
  }
}

TEST_CASE("site answers the potential competitors at the asked level") {
  // K=2, registered p1 at level 2; p2 asks level 1. Hand evaluation of the
  // site rule: list(p2) becomes 1, the answer is {r | list(r) > 1} = {p1}.
  JobModelConfig cfg = rw_cfg();
  GlobalState st = initial_state(cfg, 3);
  st.sites[0].list[1] = 2;
  st.net.send_valued(MessageKey::kAsklist, 2, 0, Level{1});

  apply(cfg, st, site_recv_step(0, 2, MessageKey::kAsklist));
  CHECK(st.sites[0].list[2] == 1);
  REQUIRE(st.net.answer(0, 2) != nullptr);
  CHECK(*st.net.answer(0, 2) == bits::unit(1));

  SUBCASE("lowering resets the stored level and acknowledges") {
    GlobalState st2 = initial_state(cfg, 2);
    st2.sites[0].list[1] = 2;
    st2.net.send_valued(MessageKey::kLower, 1, 0, Level{0});
    apply(cfg, st2, site_recv_step(0, 1, MessageKey::kLower));
    CHECK(st2.sites[0].list[1] == 0);
    CHECK(st2.net.done_count(0, 1) == 1);
  }
}

TEST_CASE("hello answered with the job only from the critical region") {
  JobModelConfig cfg = tiny_cfg();
  GlobalState st = initial_state(cfg, 2);
  st.procs[1].pc = 27;
  st.procs[1].job = Job{{0, 1}};
  st.net.send_void(MessageKey::kHello, 0, 1);
  apply(cfg, st, recv_step(1, 0, MessageKey::kHello));
  REQUIRE(st.net.welcome(1, 0) != nullptr);
  CHECK(*st.net.welcome(1, 0) == st.procs[1].job);
  CHECK(bits::has(st.procs[1].nbh, 0));

  SUBCASE("an idle receiver acknowledges with an empty payload") {
    GlobalState st2 = initial_state(cfg, 2);
    st2.net.send_void(MessageKey::kHello, 0, 1);
    apply(cfg, st2, recv_step(1, 0, MessageKey::kHello));
    REQUIRE(st2.net.welcome(1, 0) != nullptr);
    CHECK(st2.net.welcome(1, 0)->is_none());
    CHECK_FALSE(bits::has(st2.procs[1].nbh, 0));  // only from line 23 on
  }
  SUBCASE("a known neighbour gets an empty payload even from the CS") {
    GlobalState st3 = initial_state(cfg, 2);
    st3.procs[1].pc = 27;
    st3.procs[1].job = Job{{0, 1}};
    bits::add(st3.procs[1].nbh, 0);
    st3.net.send_void(MessageKey::kHello, 0, 1);
    apply(cfg, st3, recv_step(1, 0, MessageKey::kHello));
    REQUIRE(st3.net.welcome(1, 0) != nullptr);
    CHECK(st3.net.welcome(1, 0)->is_none());
  }
}

TEST_CASE("apply is a pure function of state and step") {
  JobModelConfig cfg = tiny_cfg();
  GlobalState st = initial_state(cfg, 2);
  st.procs[0].pc = 25;
  st.procs[0].job = Job{{0, 1}};
  bits::add(st.procs[0].nbh, 1);

  GlobalState a = st, b = st;
  apply(cfg, a, forward_step(0, 25));
  apply(cfg, b, forward_step(0, 25));
  CHECK(canonical_bytes(a) == canonical_bytes(b));
  CHECK(a.procs[0].nbh0 == bits::unit(1));
  CHECK(a.procs[0].need == bits::unit(1));  // p0 < p1
  REQUIRE(a.net.notify(0, 1) != nullptr);
  CHECK(*a.net.notify(0, 1) == a.procs[0].job);
}

TEST_CASE("apply rejects disabled steps") {
  JobModelConfig cfg = tiny_cfg();
  GlobalState st = initial_state(cfg, 2);
  CHECK_THROWS_AS(apply(cfg, st, forward_step(0, 25)), StepNotEnabled);
  CHECK_THROWS_AS(apply(cfg, st, recv_step(0, 1, MessageKey::kAck)),
                  StepNotEnabled);
}

TEST_CASE("enabled step enumeration matches the network content") {
  JobModelConfig cfg = tiny_cfg();
  GlobalState st = initial_state(cfg, 2);
  st.net.send_void(MessageKey::kAck, 1, 0);
  auto steps = enabled_steps(cfg, st);
  REQUIRE(steps.size() == 1);
  CHECK(steps[0] == recv_step(0, 1, MessageKey::kAck));
}

TEST_CASE("step ids round-trip through text") {
  std::vector<StepId> samples = {
      new_job_step(3, Job{{0, 1}, {2, 2}}),
      new_news_step(1, LevelFn{0, 2}),
      abort_step(2, 25),
      forward_step(0, 28),
      lower_step(5, 32),
      recv_step(1, 0, MessageKey::kNotify),
      after_step(4, 2),
      prom_step(0, 3),
      listen_step(2, 1, MessageKey::kAnswer),
      site_recv_step(0, 7, MessageKey::kAsklist),
  };
  for (const StepId& s : samples) {
    StepId parsed;
    CAPTURE(to_string(s));
    REQUIRE(parse_step(to_string(s), &parsed));
    CHECK(parsed == s);
  }
}

TEST_CASE("steps only touch their actor, their site, and the network") {
  // Frame property over reachable states: sampled along a run, every enabled
  // step leaves all other processes' private state untouched.
  ScenarioConfig scfg = parse_scenario(
      "resalloc-scenario v1\n"
      "processes 3\nsites 2\nresources 2\nlevels 2\n"
      "loc c0 s0\nloc c1 s1\narrival_prob 0.5\nlower_prob 0.1\n"
      "abort_prob25 0.05\nmax_steps 4000\nseed 23\ncheck_every 64\n");
  RunResult res = run(scfg);
  REQUIRE(res.trace.status == TerminalStatus::kCompleted);

  GlobalState st = initial_state(scfg.jm, scfg.process_count);
  std::int64_t n = 0;
  int examined = 0;
  for (const TraceRecord& rec : res.trace.records) {
    apply(scfg.jm, st, rec.step);
    if (++n % 100 != 0) continue;
    for (const StepId& step : enabled_steps(scfg.jm, st)) {
      GlobalState succ = st;
      apply(scfg.jm, succ, step);
      ++examined;
      for (int p = 0; p < scfg.process_count; ++p) {
        if (step.kind != StepKind::kSiteRecv && p == step.actor) continue;
        CHECK(succ.procs[static_cast<size_t>(p)] ==
              st.procs[static_cast<size_t>(p)]);
      }
      for (int s = 0; s < scfg.jm.site_count; ++s) {
        if (step.kind == StepKind::kSiteRecv && s == step.actor) continue;
        CHECK(succ.sites[static_cast<size_t>(s)] ==
              st.sites[static_cast<size_t>(s)]);
      }
    }
  }
  CHECK(examined > 100);
}

TEST_CASE("only a job arrival sets the job, only exits clear it") {
  ScenarioConfig scfg = parse_scenario(
      "resalloc-scenario v1\n"
      "processes 3\nsites 1\nresources 2\nlevels 1\n"
      "arrival_prob 0.5\nabort_prob24 0.1\nabort_prob25 0.1\n"
      "abort_prob26 0.1\nmax_steps 6000\nseed 29\ncheck_every 64\n");
  RunResult res = run(scfg);
  REQUIRE(res.trace.status == TerminalStatus::kCompleted);

  GlobalState st = initial_state(scfg.jm, scfg.process_count);
  for (const TraceRecord& rec : res.trace.records) {
    std::vector<Job> before;
    for (const auto& p : st.procs) before.push_back(p.job);
    apply(scfg.jm, st, rec.step);
    for (int p = 0; p < scfg.process_count; ++p) {
      const Job& now = st.procs[static_cast<size_t>(p)].job;
      const Job& was = before[static_cast<size_t>(p)];
      if (was.is_none() && !now.is_none()) {
        CHECK(rec.step.kind == StepKind::kNewJob);
        CHECK(rec.step.actor == p);
      } else if (!was.is_none() && now.is_none()) {
        bool exit28 =
            rec.step.kind == StepKind::kForward && rec.step.line == 28;
        CHECK((exit28 || rec.step.kind == StepKind::kAbort));
        CHECK(rec.step.actor == p);
      } else {
        CHECK(was == now);
      }
    }
  }
}

TEST_CASE("mutations widen exactly the targeted guards") {
  JobModelConfig cfg = tiny_cfg();
  GlobalState st = initial_state(cfg, 2);
  st.procs[0].pc = 25;
  st.procs[0].job = Job{{0, 1}};
  bits::add(st.procs[0].prio, 1);
  Mutation weaken25{.drop_line25_guard = true, .drop_prom_guard = false};
  CHECK_FALSE(enabled(cfg, st, forward_step(0, 25)));
  CHECK(enabled(cfg, st, forward_step(0, 25), weaken25));

  st.procs[1].pc = 27;
  st.procs[1].job = Job{{0, 1}};
  bits::add(st.procs[1].prom, 0);
  st.procs[1].copy[0] = Job{{0, 1}};  // conflicting
  Mutation weaken_prom{.drop_line25_guard = false, .drop_prom_guard = true};
  CHECK_FALSE(enabled(cfg, st, prom_step(1, 0)));
  CHECK(enabled(cfg, st, prom_step(1, 0), weaken_prom));
}
