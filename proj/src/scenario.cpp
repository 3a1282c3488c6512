#include "resalloc/scenario.hpp"

#include <cstdlib>
#include <sstream>

#include "resalloc/serial.hpp"

namespace resalloc {

namespace {

constexpr const char* kHeader = "resalloc-scenario v1";

bool to_long(const std::string& tok, long long* out) {
  char* end = nullptr;
  long long v = std::strtoll(tok.c_str(), &end, 10);
  if (tok.empty() || *end != '\0') return false;
  *out = v;
  return true;
}

bool to_double(const std::string& tok, double* out) {
  char* end = nullptr;
  double v = std::strtod(tok.c_str(), &end);
  if (tok.empty() || *end != '\0') return false;
  *out = v;
  return true;
}

int strip_id(const std::string& tok, int line) {
  std::string t = tok;
  if (!t.empty() && (t[0] == 'p' || t[0] == 's' || t[0] == 'c' || t[0] == 'r'))
    t = t.substr(1);
  long long v;
  if (!to_long(t, &v) || v < 0) throw ScenarioParseError(line, "bad id " + tok);
  return static_cast<int>(v);
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool saw_header = false;
  ScenarioConfig cfg;
  std::vector<std::pair<int, Job>> jobs;       // (process or -1 for all, job)
  std::vector<std::pair<int, int>> loc_pairs;  // (resource, site)

  auto need_prob = [&](const std::string& tok) {
    double v;
    if (!to_double(tok, &v) || v < 0.0 || v > 1.0)
      throw ScenarioParseError(lineno, "probability out of [0,1]: " + tok);
    return v;
  };
  auto need_int = [&](const std::string& tok, long long lo, long long hi) {
    long long v;
    if (!to_long(tok, &v) || v < lo || v > hi)
      throw ScenarioParseError(lineno, "bad integer " + tok);
    return v;
  };

  while (std::getline(in, line)) {
    ++lineno;
    size_t hashpos = line.find('#');
    if (hashpos != std::string::npos) line = line.substr(0, hashpos);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (!saw_header) {
      std::string rest;
      std::getline(ls, rest);
      std::string full = key + rest;
      if (full != kHeader) {
        if (key == "resalloc-scenario")
          throw ScenarioParseError(lineno, "unsupported scenario version");
        throw ScenarioParseError(lineno, "missing scenario header");
      }
      saw_header = true;
      continue;
    }
    std::string a, b;
    if (key == "processes") {
      ls >> a;
      cfg.process_count = static_cast<int>(need_int(a, 1, 64));
    } else if (key == "sites") {
      ls >> a;
      cfg.jm.site_count = static_cast<int>(need_int(a, 1, 64));
    } else if (key == "resources") {
      ls >> a;
      cfg.jm.resource_count = static_cast<int>(need_int(a, 1, 4096));
    } else if (key == "levels") {
      ls >> a;
      cfg.jm.K = static_cast<int>(need_int(a, 1, 1000000));
    } else if (key == "loc") {
      if (!(ls >> a >> b)) throw ScenarioParseError(lineno, "loc needs 2 ids");
      loc_pairs.emplace_back(strip_id(a, lineno), strip_id(b, lineno));
    } else if (key == "arrival_prob") {
      ls >> a;
      cfg.arrival_prob = need_prob(a);
    } else if (key == "abort_prob24") {
      ls >> a;
      cfg.abort_prob24 = need_prob(a);
    } else if (key == "abort_prob25") {
      ls >> a;
      cfg.abort_prob25 = need_prob(a);
    } else if (key == "abort_prob26") {
      ls >> a;
      cfg.abort_prob26 = need_prob(a);
    } else if (key == "lower_prob") {
      ls >> a;
      cfg.lower_prob = need_prob(a);
    } else if (key == "random_job_resource_prob") {
      ls >> a;
      cfg.random_job_resource_prob = need_prob(a);
    } else if (key == "job") {
      if (!(ls >> a >> b)) throw ScenarioParseError(lineno, "job needs 2 args");
      int p = (a == "all") ? -1 : strip_id(a, lineno);
      Job j;
      if (!parse_job(b, &j) || j.is_none())
        throw ScenarioParseError(lineno, "bad job " + b);
      jobs.emplace_back(p, std::move(j));
    } else if (key == "fairness") {
      ls >> a;
      cfg.fairness = static_cast<int>(need_int(a, 1, 1000000));
    } else if (key == "strong_fairness_32") {
      ls >> a;
      cfg.strong_fairness_32 = need_int(a, 0, 1) != 0;
    } else if (key == "max_steps") {
      ls >> a;
      cfg.max_steps = need_int(a, 0, 100000000000LL);
    } else if (key == "seed") {
      long long v;
      ls >> a;
      if (!to_long(a, &v)) throw ScenarioParseError(lineno, "bad seed");
      cfg.seed = static_cast<std::uint64_t>(v);
    } else if (key == "check_every") {
      ls >> a;
      cfg.check_every = static_cast<int>(need_int(a, 1, 1000000000));
    } else if (key == "hash_every") {
      ls >> a;
      cfg.hash_every = static_cast<int>(need_int(a, 1, 1000000000));
    } else if (key == "explore_max_states") {
      ls >> a;
      cfg.explore_max_states = need_int(a, 1, 100000000000LL);
    } else if (key == "explore_max_depth") {
      ls >> a;
      cfg.explore_max_depth = static_cast<int>(need_int(a, 0, 1000000000));
    } else if (key == "explore_aborts") {
      ls >> a;
      cfg.explore_aborts = need_int(a, 0, 1) != 0;
    } else if (key == "explore_lower_to_zero") {
      ls >> a;
      cfg.explore_lower_to_zero = need_int(a, 0, 1) != 0;
    } else if (key == "freeze") {
      ls >> a;
      bits::add(cfg.freeze_at_27, strip_id(a, lineno));
    } else if (key == "mutate_line25") {
      ls >> a;
      cfg.mutation.drop_line25_guard = need_int(a, 0, 1) != 0;
    } else if (key == "mutate_prom") {
      ls >> a;
      cfg.mutation.drop_prom_guard = need_int(a, 0, 1) != 0;
    } else {
      throw ScenarioParseError(lineno, "unknown field " + key);
    }
  }
  if (!saw_header) throw ScenarioParseError(0, "empty scenario");
  if (cfg.process_count <= 0)
    throw ScenarioParseError(lineno, "processes not set");
  if (cfg.jm.site_count <= 0) throw ScenarioParseError(lineno, "sites not set");
  if (cfg.jm.resource_count <= 0)
    throw ScenarioParseError(lineno, "resources not set");

  cfg.jm.loc.assign(static_cast<size_t>(cfg.jm.resource_count), -1);
  for (const auto& [r, s] : loc_pairs) {
    if (r >= cfg.jm.resource_count || s >= cfg.jm.site_count)
      throw ScenarioParseError(lineno, "loc out of range");
    cfg.jm.loc[static_cast<size_t>(r)] = s;
  }
  for (int r = 0; r < cfg.jm.resource_count; ++r) {
    if (cfg.jm.loc[static_cast<size_t>(r)] < 0)
      cfg.jm.loc[static_cast<size_t>(r)] = r % cfg.jm.site_count;
  }

  cfg.candidate_jobs.assign(static_cast<size_t>(cfg.process_count), {});
  for (auto& [p, j] : jobs) {
    for (const auto& [c, k] : j.entries()) {
      if (c >= cfg.jm.resource_count || k > cfg.jm.K)
        throw ScenarioParseError(lineno, "job outside universe: " +
                                             to_string(j));
    }
    if (p >= cfg.process_count)
      throw ScenarioParseError(lineno, "job for unknown process");
    if (p < 0) {
      for (auto& v : cfg.candidate_jobs) v.push_back(j);
    } else {
      cfg.candidate_jobs[static_cast<size_t>(p)].push_back(j);
    }
  }
  if (cfg.freeze_at_27 >> cfg.process_count)
    throw ScenarioParseError(lineno, "freeze target out of range");
  return cfg;
}

std::string serialize_scenario(const ScenarioConfig& cfg) {
  std::ostringstream out;
  out.precision(17);  // probabilities must survive the round trip exactly
  out << kHeader << "\n";
  out << "processes " << cfg.process_count << "\n";
  out << "sites " << cfg.jm.site_count << "\n";
  out << "resources " << cfg.jm.resource_count << "\n";
  out << "levels " << cfg.jm.K << "\n";
  for (int r = 0; r < cfg.jm.resource_count; ++r)
    out << "loc c" << r << " s" << cfg.jm.loc[static_cast<size_t>(r)] << "\n";
  out << "arrival_prob " << cfg.arrival_prob << "\n";
  out << "abort_prob24 " << cfg.abort_prob24 << "\n";
  out << "abort_prob25 " << cfg.abort_prob25 << "\n";
  out << "abort_prob26 " << cfg.abort_prob26 << "\n";
  out << "lower_prob " << cfg.lower_prob << "\n";
  out << "random_job_resource_prob " << cfg.random_job_resource_prob << "\n";
  for (int p = 0; p < cfg.process_count; ++p) {
    for (const Job& j : cfg.candidate_jobs[static_cast<size_t>(p)])
      out << "job p" << p << " " << to_string(j) << "\n";
  }
  out << "fairness " << cfg.fairness << "\n";
  out << "strong_fairness_32 " << (cfg.strong_fairness_32 ? 1 : 0) << "\n";
  out << "max_steps " << cfg.max_steps << "\n";
  out << "seed " << cfg.seed << "\n";
  out << "check_every " << cfg.check_every << "\n";
  out << "hash_every " << cfg.hash_every << "\n";
  out << "explore_max_states " << cfg.explore_max_states << "\n";
  out << "explore_max_depth " << cfg.explore_max_depth << "\n";
  out << "explore_aborts " << (cfg.explore_aborts ? 1 : 0) << "\n";
  out << "explore_lower_to_zero " << (cfg.explore_lower_to_zero ? 1 : 0)
      << "\n";
  bits::for_each(cfg.freeze_at_27, [&](int p) { out << "freeze p" << p << "\n"; });
  if (cfg.mutation.drop_line25_guard) out << "mutate_line25 1\n";
  if (cfg.mutation.drop_prom_guard) out << "mutate_prom 1\n";
  return out.str();
}

}  // namespace resalloc
