#pragma once

// Click probabilities under the examination hypothesis:
//   P(click at d | r) = P(examined | position of d in r) * P(attractive | d).

#include <string>
#include <unordered_map>
#include <vector>

#include "dirv/core.hpp"

namespace dirv {

struct ClickModelKind {
  // cascade: examination at rank j is prod_{k<j} (1 - a_k), the probability
  // that no item above was clicked.
  // compounded_cascade: prod_{k<j} (1 - e_k a_k), with e_k the compounded
  // examination of the item above. Overstates lower ranks; kept as an option.
  enum class Variant { cascade, compounded_cascade, position_based };

  Variant variant = Variant::cascade;
  // Examination probability by zero-based rank (position_based only).
  std::vector<double> position_probs;

  static ClickModelKind cascade() { return {}; }
  static ClickModelKind compounded_cascade() { return {Variant::compounded_cascade, {}}; }

  static ClickModelKind position_based(std::vector<double> probs) {
    for (double p : probs) {
      if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("position probabilities must lie in [0,1]");
    }
    return {Variant::position_based, std::move(probs)};
  }

  // Examination probability at a zero-based rank for the position-based model.
  double position_prob(std::size_t rank) const {
    if (rank >= position_probs.size()) {
      throw DomainError("no examination probability for rank " + std::to_string(rank + 1));
    }
    return position_probs[rank];
  }
};

// Non-fatal problems with a position table (rising probabilities).
inline std::vector<std::string> position_prob_warnings(const std::vector<double>& probs) {
  std::vector<std::string> warnings;
  for (std::size_t k = 1; k < probs.size(); ++k) {
    if (probs[k] > probs[k - 1]) {
      warnings.push_back("examination probability rises from rank " + std::to_string(k) +
                         " to rank " + std::to_string(k + 1));
    }
  }
  return warnings;
}

// An estimate together with a flag saying it came from a default, not data.
struct Estimate {
  double value = 0.0;
  bool cold_start = false;
};

// Attraction n_click / n_exam, clamped to [0,1].
inline Estimate estimate_attraction(const ItemStats& s, double prior = 0.0) {
  if (s.n_exam == 0) return {prior, true};
  const double a = static_cast<double>(s.n_click) / static_cast<double>(s.n_exam);
  return {std::clamp(a, 0.0, 1.0), false};
}

using AttractionMap = std::unordered_map<ItemId, double>;

// Examination probability of the position directly below a prefix whose last
// item has examination `exam` and attraction `attraction`.
inline double next_examination(double exam, double attraction, std::size_t next_rank,
                               const ClickModelKind& kind) {
  switch (kind.variant) {
    case ClickModelKind::Variant::cascade:
      return exam * (1.0 - attraction);
    case ClickModelKind::Variant::compounded_cascade:
      return exam * (1.0 - exam * attraction);
    case ClickModelKind::Variant::position_based:
      return kind.position_prob(next_rank);
  }
  return 0.0;
}

inline double first_examination(const ClickModelKind& kind) {
  return kind.variant == ClickModelKind::Variant::position_based ? kind.position_prob(0) : 1.0;
}

// Examination probabilities given per-position attractions.
inline std::vector<double> examination_probs(std::span<const double> attraction,
                                             const ClickModelKind& kind) {
  std::vector<double> exam(attraction.size());
  if (exam.empty()) return exam;
  exam[0] = first_examination(kind);
  for (std::size_t k = 1; k < exam.size(); ++k) {
    exam[k] = next_examination(exam[k - 1], attraction[k - 1], k, kind);
  }
  return exam;
}

inline std::vector<double> examination_probs(const Ranking& ranking, const AttractionMap& attraction,
                                             const ClickModelKind& kind) {
  std::vector<double> a;
  a.reserve(ranking.depth());
  for (ItemId id : ranking) {
    auto it = attraction.find(id);
    if (it == attraction.end()) {
      throw UnknownItemError("no attraction estimate for item " + to_string(id));
    }
    a.push_back(it->second);
  }
  return examination_probs(a, kind);
}

inline std::vector<double> click_probs(std::span<const double> attraction, const ClickModelKind& kind) {
  std::vector<double> c = examination_probs(attraction, kind);
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = std::clamp(c[k] * attraction[k], 0.0, 1.0);
  return c;
}

inline std::vector<double> click_probs(const Ranking& ranking, const AttractionMap& attraction,
                                       const ClickModelKind& kind) {
  std::vector<double> exam = examination_probs(ranking, attraction, kind);
  for (std::size_t k = 0; k < exam.size(); ++k) {
    exam[k] = std::clamp(exam[k] * attraction.at(ranking[k]), 0.0, 1.0);
  }
  return exam;
}

// n_exam += 1 for positions 1..last click, or for every position when nothing
// was clicked.
inline void update_examination_counts(ExperimentState& state, const ImpressionRecord& rec) {
  rec.validate();
  std::size_t last = rec.ranking.depth();
  for (std::size_t k = rec.clicks.size(); k-- > 0;) {
    if (rec.clicks[k]) {
      last = k + 1;
      break;
    }
  }
  for (std::size_t k = 0; k < last; ++k) ++state.item(rec.ranking[k]).n_exam;
}

}  // namespace dirv
