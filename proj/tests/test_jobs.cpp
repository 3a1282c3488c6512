#include <set>

#include "doctest.h"
#include "resalloc/jobs.hpp"
#include "resalloc/rng.hpp"

using namespace resalloc;

namespace {

Job random_job(Rng& rng, int resources, int K, double density = 0.5) {
  Job j;
  for (int c = 0; c < resources; ++c) {
    if (rng.chance(density)) j.set_level(c, rng.range(1, K));
  }
  return j;
}

}  // namespace

TEST_CASE("compatibility on the simple exclusive model") {
  Job u{{0, 1}};
  Job v{{0, 1}};
  CHECK_FALSE(compatible(u, v, 1));
  CHECK(compatible(u, Job{}, 1));
  CHECK(compatible(Job{}, Job{}, 1));
}

TEST_CASE("two readers share, a writer excludes") {
  Job reader{{0, 1}};
  Job writer{{0, 2}};
  CHECK(compatible(reader, reader, 2));
  CHECK_FALSE(compatible(writer, reader, 2));
  CHECK_FALSE(compatible(writer, writer, 2));
}

TEST_CASE("self conflict is possible by the formula") {
  // Callers guard with q != r; the relation itself flags u against itself.
  Job u{{0, 1}};
  CHECK(conflicting(u, u, 1));
  CHECK_FALSE(conflicting(Job{}, Job{}, 1));
}

TEST_CASE("level requirement is a max over the site's resources") {
  std::vector<SiteId> loc{0, 0, 1};
  Job u{{1, 2}, {2, 1}};
  SUBCASE("resources on one site take the max") {
    Job both{{0, 2}, {1, 1}};
    CHECK(level_requirement(both, 0, loc) == 2);
  }
  CHECK(level_requirement(u, 0, loc) == 2);
  CHECK(level_requirement(u, 1, loc) == 1);
  CHECK(level_requirement(Job{}, 0, loc) == 0);
  // a site hosting no required resource has an empty max
  Job only_s0{{0, 1}};
  CHECK(level_requirement(only_s0, 1, loc) == 0);
}

TEST_CASE("pointwise comparison of level functions") {
  CHECK(level_fn_leq({1, 2}, {1, 2}));
  CHECK(level_fn_leq({0, 0}, {2, 1}));
  CHECK_FALSE(level_fn_leq({2}, {1}));
}

TEST_CASE("compatibility is symmetric and has the empty job as unit") {
  Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    int K = rng.range(1, 4);
    Job u = random_job(rng, 6, K);
    Job v = random_job(rng, 6, K);
    CAPTURE(to_string(u));
    CAPTURE(to_string(v));
    CHECK(compatible(u, v, K) == compatible(v, u, K));
    CHECK(compatible(u, Job{}, K));
  }
}

TEST_CASE("K=1 compatibility is exactly support disjointness") {
  Rng rng(12);
  for (int i = 0; i < 500; ++i) {
    Job u = random_job(rng, 8, 1);
    Job v = random_job(rng, 8, 1);
    std::set<ResourceId> su, sv;
    for (auto& [c, k] : u.entries()) su.insert(c);
    for (auto& [c, k] : v.entries()) sv.insert(c);
    bool disjoint = true;
    for (ResourceId c : su)
      if (sv.count(c)) disjoint = false;
    CHECK(compatible(u, v, 1) == disjoint);
  }
}

TEST_CASE("level requirement never exceeds the bound") {
  Rng rng(13);
  JobModelConfig cfg;
  cfg.K = 3;
  cfg.resource_count = 5;
  cfg.site_count = 2;
  cfg.loc = {0, 1, 0, 1, 0};
  for (int i = 0; i < 200; ++i) {
    Job u = random_job(rng, cfg.resource_count, cfg.K);
    LevelFn f = level_requirements(u, cfg);
    for (Level l : f) CHECK(l <= cfg.K);
  }
}

TEST_CASE("job equality is extensional and text form round-trips") {
  Job a;
  a.set_level(3, 2);
  a.set_level(1, 1);
  a.set_level(3, 0);  // erased again
  Job b;
  b.set_level(1, 1);
  CHECK(a == b);
  CHECK(to_string(a) == "{c1:1}");
  Job parsed;
  REQUIRE(parse_job("{c1:1}", &parsed));
  CHECK(parsed == a);
  REQUIRE(parse_job("{}", &parsed));
  CHECK(parsed.is_none());
  CHECK_FALSE(parse_job("{c1}", &parsed));
}
