#include "resalloc/jobs.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

namespace resalloc {

Level Job::level(ResourceId c) const {
  auto it = std::lower_bound(
      levels_.begin(), levels_.end(), c,
      [](const std::pair<ResourceId, Level>& e, ResourceId x) {
        return e.first < x;
      });
  if (it != levels_.end() && it->first == c) return it->second;
  return 0;
}

void Job::set_level(ResourceId c, Level k) {
  auto it = std::lower_bound(
      levels_.begin(), levels_.end(), c,
      [](const std::pair<ResourceId, Level>& e, ResourceId x) {
        return e.first < x;
      });
  if (it != levels_.end() && it->first == c) {
    if (k == 0) {
      levels_.erase(it);
    } else {
      it->second = k;
    }
  } else if (k != 0) {
    levels_.insert(it, {c, k});
  }
}

bool compatible(const Job& u, const Job& v, int K) {
  // Merge walk over the two sorted entry lists; resources absent from one
  // side contribute 0 and cannot exceed K on their own (levels are <= K).
  auto iu = u.entries().begin(), eu = u.entries().end();
  auto iv = v.entries().begin(), ev = v.entries().end();
  while (iu != eu && iv != ev) {
    if (iu->first < iv->first) {
      ++iu;
    } else if (iv->first < iu->first) {
      ++iv;
    } else {
      if (iu->second + iv->second > K) return false;
      ++iu;
      ++iv;
    }
  }
  return true;
}

Level level_requirement(const Job& u, SiteId s,
                        const std::vector<SiteId>& loc) {
  Level m = 0;
  for (const auto& [c, k] : u.entries()) {
    if (loc[static_cast<size_t>(c)] == s) m = std::max(m, k);
  }
  return m;
}

LevelFn level_requirements(const Job& u, const JobModelConfig& cfg) {
  LevelFn f(static_cast<size_t>(cfg.site_count), 0);
  for (const auto& [c, k] : u.entries()) {
    SiteId s = cfg.loc[static_cast<size_t>(c)];
    f[static_cast<size_t>(s)] = std::max(f[static_cast<size_t>(s)], k);
  }
  return f;
}

bool level_fn_leq(const LevelFn& f, const LevelFn& g) {
  for (size_t s = 0; s < f.size(); ++s) {
    if (f[s] > g[s]) return false;
  }
  return true;
}

std::string to_string(const Job& u) {
  std::string out = "{";
  bool first = true;
  for (const auto& [c, k] : u.entries()) {
    if (!first) out += ',';
    first = false;
    out += 'c';
    out += std::to_string(c);
    out += ':';
    out += std::to_string(k);
  }
  out += '}';
  return out;
}

bool parse_job(const std::string& text, Job* out) {
  if (text.size() < 2 || text.front() != '{' || text.back() != '}')
    return false;
  *out = Job{};
  std::string body = text.substr(1, text.size() - 2);
  if (body.empty()) return true;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    size_t colon = item.find(':');
    if (colon == std::string::npos) return false;
    std::string res = item.substr(0, colon);
    std::string lvl = item.substr(colon + 1);
    if (!res.empty() && (res[0] == 'c' || res[0] == 'r')) res = res.substr(1);
    if (res.empty() || lvl.empty()) return false;
    char* end = nullptr;
    long c = std::strtol(res.c_str(), &end, 10);
    if (*end != '\0') return false;
    long k = std::strtol(lvl.c_str(), &end, 10);
    if (*end != '\0') return false;
    if (c < 0 || k < 0) return false;
    out->set_level(static_cast<ResourceId>(c), static_cast<Level>(k));
  }
  return true;
}

std::string to_string(const LevelFn& f) {
  std::string out = "[";
  for (size_t i = 0; i < f.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(f[i]);
  }
  out += ']';
  return out;
}

bool parse_level_fn(const std::string& text, LevelFn* out) {
  if (text.size() < 2 || text.front() != '[' || text.back() != ']')
    return false;
  out->clear();
  std::string body = text.substr(1, text.size() - 2);
  if (body.empty()) return true;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    long v = std::strtol(item.c_str(), &end, 10);
    if (item.empty() || *end != '\0' || v < 0) return false;
    out->push_back(static_cast<Level>(v));
  }
  return true;
}

}  // namespace resalloc
