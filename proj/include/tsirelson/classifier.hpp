#pragma once

// Frequency subgroup Z_mu = p_mu Z and the uniqueness / strong-solution
// trichotomy it determines:
//   p_mu = 0  -> C1: uniqueness in law, no strong solution
//   p_mu = 1  -> C2: strong solutions exist, no uniqueness
//   p_mu >= 2 -> C3: neither

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tsirelson/sequence.hpp"

namespace tsirelson {

inline constexpr std::int64_t kDefaultScanBound = 64;

struct Membership {
  bool member;
  LogProductVerdict verdict;
};

Membership membership(const MeasureSequence& seq, std::int64_t p);

struct SubgroupEvidence {
  std::int64_t scan_bound = 0;
  std::vector<std::int64_t> members;
  std::int64_t p_mu = 0;
  std::map<std::int64_t, LogProductVerdict> per_p;
  bool fully_certified = false;
  // True when the tail rule proves non-membership for every p >= 1, so that
  // p_mu = 0 holds beyond the scan bound.
  bool all_frequencies_certified = false;
};

// Throws SubgroupViolation if the scanned members are not p_mu Z within the bound.
SubgroupEvidence compute_p_mu(const MeasureSequence& seq, std::int64_t scan_bound = kDefaultScanBound);

// Additive centering alpha_l = frac(-sum_{l <= j <= 0} m_j). Available for
// wrapped-Gaussian tails and iid point-mass (or wrapped-Gaussian) tails.
class CenteringSpec {
 public:
  explicit CenteringSpec(MeasureSequence seq);
  TorusPoint at(std::int64_t l) const;

 private:
  MeasureSequence seq_;
};

// Throws NoConstructiveCentering when the tail family has no closed-form
// centering or a prefix measure has no circular mean.
TorusPoint centering(const MeasureSequence& seq, std::int64_t l);
bool has_constructive_centering(const MeasureSequence& seq);

struct TrichotomyResult {
  enum class Case { C1, C2, C3 };
  Case which;
  std::int64_t p = 0;  // C3 only
  std::optional<CenteringSpec> centering;  // C2 with a constructive centering
  SubgroupEvidence evidence;

  std::string label() const;  // "C1", "C2", "C3(2)"
};

TrichotomyResult classify(const MeasureSequence& seq, std::int64_t scan_bound = kDefaultScanBound);

}  // namespace tsirelson
