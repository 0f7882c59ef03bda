#include "gdev/affinity.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstring>
#include <set>
#include <sstream>

#include "gdev/errors.hpp"

#ifdef __linux__
#include <sched.h>
#include <unistd.h>
#endif

namespace gdev {

namespace {

int parse_int(std::string_view s) {
  int value = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw InvalidCore("bad core id '" + std::string(s) + "'");
  }
  return value;
}

}  // namespace

AffinityMask AffinityMask::parse(std::string_view text) {
  std::set<int> ids;
  while (!text.empty()) {
    const auto comma = text.find(',');
    auto item = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    if (item.empty()) throw InvalidCore("empty entry in core list");
    const auto dash = item.find('-');
    if (dash == std::string_view::npos) {
      ids.insert(parse_int(item));
      continue;
    }
    const int lo = parse_int(item.substr(0, dash));
    const int hi = parse_int(item.substr(dash + 1));
    if (hi < lo) throw InvalidCore("descending core range '" + std::string(item) + "'");
    for (int i = lo; i <= hi; ++i) ids.insert(i);
  }
  if (ids.empty()) throw InvalidCore("empty core list");
  return {{ids.begin(), ids.end()}};
}

std::string AffinityMask::to_string() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < core_ids.size();) {
    std::size_t j = i;
    while (j + 1 < core_ids.size() && core_ids[j + 1] == core_ids[j] + 1) ++j;
    if (i > 0) os << ',';
    os << core_ids[i];
    if (j > i) os << '-' << core_ids[j];
    i = j + 1;
  }
  return os.str();
}

#ifdef __linux__

int host_cpu_count() {
  const long n = sysconf(_SC_NPROCESSORS_CONF);
  return n > 0 ? static_cast<int>(n) : 1;
}

AffinityMask current_affinity() {
  cpu_set_t set;
  CPU_ZERO(&set);
  if (sched_getaffinity(0, sizeof(set), &set) != 0) {
    throw UnsupportedPlatform(std::string("sched_getaffinity: ") + std::strerror(errno));
  }
  AffinityMask mask;
  for (int i = 0; i < CPU_SETSIZE; ++i) {
    if (CPU_ISSET(i, &set)) mask.core_ids.push_back(i);
  }
  return mask;
}

AffinityMask set_affinity(const AffinityMask& mask) {
  if (mask.core_ids.empty()) throw InvalidCore("empty affinity mask");
  const int host = host_cpu_count();
  cpu_set_t set;
  CPU_ZERO(&set);
  for (int id : mask.core_ids) {
    if (id < 0 || id >= host || id >= CPU_SETSIZE) {
      throw InvalidCore("core " + std::to_string(id) + " out of range (host has " +
                        std::to_string(host) + " CPUs)");
    }
    CPU_SET(id, &set);
  }
  if (sched_setaffinity(0, sizeof(set), &set) != 0) {
    if (errno == EINVAL) {
      throw InvalidCore("no permitted CPU in mask " + mask.to_string());
    }
    throw UnsupportedPlatform(std::string("sched_setaffinity: ") + std::strerror(errno));
  }
  return current_affinity();
}

#else

int host_cpu_count() { return 1; }

AffinityMask current_affinity() {
  throw UnsupportedPlatform("CPU affinity is not supported on this platform");
}

AffinityMask set_affinity(const AffinityMask&) {
  throw UnsupportedPlatform("CPU affinity is not supported on this platform");
}

#endif

ScopedAffinity::ScopedAffinity(const AffinityMask& mask)
    : previous_(current_affinity()), applied_(set_affinity(mask)) {}

ScopedAffinity::~ScopedAffinity() {
  try {
    set_affinity(previous_);
  } catch (const Error&) {
  }
}

}  // namespace gdev
