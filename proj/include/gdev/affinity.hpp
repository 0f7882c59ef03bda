#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace gdev {

struct AffinityMask {
  std::vector<int> core_ids;  // ordered, unique

  // Accepts taskset-style lists: "0-23", "0,2,4-7".
  static AffinityMask parse(std::string_view text);
  std::string to_string() const;

  bool operator==(const AffinityMask&) const = default;
};

// Number of logical CPUs configured on the host.
int host_cpu_count();

// Restricts the calling thread (and everything it later spawns) to exactly
// the given cores and returns the mask read back from the OS.
// Throws InvalidCore for ids the host does not expose or does not allow,
// UnsupportedPlatform where no affinity API exists.
AffinityMask set_affinity(const AffinityMask& mask);

AffinityMask current_affinity();

// Restores the previous mask on scope exit.
class ScopedAffinity {
 public:
  explicit ScopedAffinity(const AffinityMask& mask);
  ~ScopedAffinity();
  ScopedAffinity(const ScopedAffinity&) = delete;
  ScopedAffinity& operator=(const ScopedAffinity&) = delete;

  const AffinityMask& applied() const { return applied_; }

 private:
  AffinityMask previous_;
  AffinityMask applied_;
};

}  // namespace gdev
