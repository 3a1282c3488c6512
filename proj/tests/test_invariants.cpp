#include "doctest.h"
#include "resalloc/invariants.hpp"
#include "resalloc/serial.hpp"

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

}  // namespace

TEST_CASE("the whole catalogue holds initially") {
  JobModelConfig cfg = tiny_cfg();
  GlobalState st = initial_state(cfg, 3);
  CHECK(check_all(cfg, st).empty());
  for (InvariantId id : all_invariants()) {
    CAPTURE(invariant_name(id));
    CHECK_FALSE(check(cfg, st, id).has_value());
  }
}

TEST_CASE("two conflicting processes in the CS violate the allocation rule") {
  JobModelConfig cfg = tiny_cfg();
  GlobalState st = initial_state(cfg, 2);
  st.procs[0].pc = 27;
  st.procs[1].pc = 27;
  st.procs[0].job = Job{{0, 1}};
  st.procs[1].job = Job{{0, 1}};
  auto v = check(cfg, st, InvariantId::kRq0);
  REQUIRE(v.has_value());
  CHECK(v->q == 0);
  CHECK(v->r == 1);
  CHECK(std::string(invariant_name(v->id)) == "Rq0");
}

TEST_CASE("a phantom grant breaks the inner accounting") {
  // Inject one spurious gra from the higher p1 to the lower p0 into the
  // initial state; the counting relation for the pair gives 1 = 0.
  JobModelConfig cfg = tiny_cfg();
  GlobalState st = initial_state(cfg, 2);
  st.net.send_void(MessageKey::kGra, 1, 0);
  auto violations = check_all(cfg, st);
  REQUIRE_FALSE(violations.empty());
  bool saw_jq2 = false;
  for (const auto& v : violations)
    if (v.id == InvariantId::kJq2) saw_jq2 = true;
  CHECK(saw_jq2);
}

TEST_CASE("invariant ids parse back from their names") {
  for (InvariantId id : all_invariants()) {
    InvariantId parsed;
    REQUIRE(parse_invariant_id(invariant_name(id), &parsed));
    CHECK(parsed == id);
  }
  InvariantId dummy;
  CHECK_FALSE(parse_invariant_id("Zq9", &dummy));
}

TEST_CASE("delayed-answer disabledness") {
  JobModelConfig cfg = tiny_cfg();
  GlobalState st = initial_state(cfg, 2);
  SUBCASE("initially both hold for all pairs") {
    for (int q = 0; q < 2; ++q)
      for (int r = 0; r < 2; ++r) {
        CHECK(disabled_after(st, q, r));
        CHECK(disabled_prom(cfg, st, q, r));
      }
  }
  SUBCASE("a pending copy enables the after answer") {
    bits::add(st.procs[0].after, 1);
    st.procs[0].copy[1] = Job{{0, 1}};
    CHECK_FALSE(disabled_after(st, 0, 1));
    st.procs[0].copy[1] = Job{};
    CHECK(disabled_after(st, 0, 1));
  }
  SUBCASE("a grant is disabled past the entry competition on conflict") {
    bits::add(st.procs[0].prom, 1);
    st.procs[0].pc = 27;
    st.procs[0].job = Job{{0, 1}};
    st.procs[0].copy[1] = Job{{0, 1}};
    CHECK(disabled_prom(cfg, st, 0, 1));
    st.procs[0].pc = 26;
    CHECK_FALSE(disabled_prom(cfg, st, 0, 1));
  }
}

TEST_CASE("derived invariants follow from their constituents") {
  // On arbitrary states (not only reachable ones): whenever the antecedent
  // family members hold, the derived ones do too.
  JobModelConfig cfg = tiny_cfg();
  GlobalState st = initial_state(cfg, 2);

  auto holds = [&](InvariantId id) { return !check(cfg, st, id).has_value(); };

  // A state where Iq2/Iq3 hold and Iq2a is implied.
  st.procs[0].pc = 25;
  st.procs[0].job = Job{{0, 1}};
  CHECK(holds(InvariantId::kIq2));
  CHECK(holds(InvariantId::kIq3));
  CHECK(holds(InvariantId::kIq2a));

  // Break Iq2 by a stray withdraw and watch Iq2a go with it; the
  // implication only promises Iq2a where Iq2 and Iq3 hold.
  st.net.send_void(MessageKey::kWithdraw, 0, 1);
  CHECK_FALSE(holds(InvariantId::kIq2));
  CHECK_FALSE(holds(InvariantId::kIq2a));
}
