#pragma once

#include <compare>
#include <string>
#include <utility>
#include <vector>

namespace resalloc {

using ProcessId = int;
using SiteId = int;
using ResourceId = int;
using Level = int;

// Per-site level function, dense, indexed by site id.
using LevelFn = std::vector<Level>;

/// Resource requirements for one critical-section execution: a total map
/// from resources to levels in 0..K. Only positive levels are stored, sorted
/// by resource id, so two representations of the same function compare equal.
/// The empty job is the distinguished "no requirements" value.
class Job {
 public:
  Job() = default;
  Job(std::initializer_list<std::pair<ResourceId, Level>> init) {
    for (const auto& [c, k] : init) set_level(c, k);
  }

  Level level(ResourceId c) const;
  void set_level(ResourceId c, Level k);  // k == 0 erases the entry
  bool is_none() const { return levels_.empty(); }

  const std::vector<std::pair<ResourceId, Level>>& entries() const {
    return levels_;
  }

  auto operator<=>(const Job&) const = default;

 private:
  std::vector<std::pair<ResourceId, Level>> levels_;
};

/// Universe parameters for the job model: the level bound K and the
/// assignment of resources to sites.
struct JobModelConfig {
  int K = 1;
  int resource_count = 0;
  int site_count = 0;
  std::vector<SiteId> loc;  // resource -> site, size resource_count
};

/// True iff u and v may hold the critical section concurrently: on every
/// resource the levels sum to at most K. Symmetric, and the empty job is
/// compatible with everything.
bool compatible(const Job& u, const Job& v, int K);

inline bool conflicting(const Job& u, const Job& v, int K) {
  return !compatible(u, v, K);
}

/// Level the job needs at site s: the maximum level over resources located
/// at s, and 0 when no resource at s is required (empty max is 0).
Level level_requirement(const Job& u, SiteId s, const std::vector<SiteId>& loc);

/// The whole per-site requirement function of a job.
LevelFn level_requirements(const Job& u, const JobModelConfig& cfg);

/// Pointwise f(s) <= g(s) over all sites.
bool level_fn_leq(const LevelFn& f, const LevelFn& g);

std::string to_string(const Job& u);  // "{}" or "{c0:1,c2:2}"
bool parse_job(const std::string& text, Job* out);
std::string to_string(const LevelFn& f);  // "[0,1]"
bool parse_level_fn(const std::string& text, LevelFn* out);

}  // namespace resalloc
