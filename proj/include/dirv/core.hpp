#pragma once

// Domain types and running tallies shared by every part of the library.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace dirv {

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedRecordError : public Error { using Error::Error; };
class UnknownItemError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };
class DataError : public Error { using Error::Error; };
class DomainError : public Error { using Error::Error; };

// ---------------------------------------------------------------------------
// Identifiers and rankings

enum class ItemId : std::int64_t {};

constexpr std::int64_t to_int(ItemId id) { return static_cast<std::int64_t>(id); }

inline std::string to_string(ItemId id) { return std::to_string(to_int(id)); }

class Ranking {
 public:
  Ranking() = default;

  explicit Ranking(std::vector<ItemId> items) : items_(std::move(items)) {
    std::vector<ItemId> sorted = items_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw DomainError("ranking contains a duplicate item");
    }
  }

  Ranking(std::initializer_list<std::int64_t> ids) {
    std::vector<ItemId> v;
    v.reserve(ids.size());
    for (auto id : ids) v.push_back(ItemId{id});
    *this = Ranking(std::move(v));
  }

  std::size_t depth() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  const std::vector<ItemId>& items() const { return items_; }
  ItemId operator[](std::size_t pos) const { return items_[pos]; }

  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

  // Zero-based position, or nullopt when absent.
  std::optional<std::size_t> position_of(ItemId id) const {
    auto it = std::find(items_.begin(), items_.end(), id);
    if (it == items_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - items_.begin());
  }

  bool contains(ItemId id) const { return position_of(id).has_value(); }

  // Returns a copy with `id` appended at the bottom.
  Ranking appended(ItemId id) const {
    std::vector<ItemId> v = items_;
    v.push_back(id);
    return Ranking(std::move(v));
  }

  friend bool operator==(const Ranking&, const Ranking&) = default;
  friend auto operator<=>(const Ranking& a, const Ranking& b) {
    return a.items_ <=> b.items_;
  }

 private:
  std::vector<ItemId> items_;
};

inline std::string to_string(const Ranking& r) {
  std::string out;
  for (std::size_t i = 0; i < r.depth(); ++i) {
    if (i) out += ',';
    out += to_string(r[i]);
  }
  return out;
}

// The input rankings R and their item universe D (sorted ascending).
class RankingSet {
 public:
  RankingSet() = default;

  explicit RankingSet(std::vector<Ranking> rankings) : rankings_(std::move(rankings)) {
    if (rankings_.size() < 2) {
      throw ConfigError("a ranking set needs at least two rankings");
    }
    for (const auto& r : rankings_) {
      if (r.empty()) throw ConfigError("input rankings must be nonempty");
      universe_.insert(universe_.end(), r.begin(), r.end());
    }
    std::sort(universe_.begin(), universe_.end());
    universe_.erase(std::unique(universe_.begin(), universe_.end()), universe_.end());
  }

  std::size_t size() const { return rankings_.size(); }
  const Ranking& operator[](std::size_t i) const { return rankings_[i]; }
  const std::vector<Ranking>& rankings() const { return rankings_; }
  const std::vector<ItemId>& universe() const { return universe_; }

  // Index of the input ranking identical to `r`, if any (first match).
  std::optional<std::size_t> index_of(const Ranking& r) const {
    for (std::size_t i = 0; i < rankings_.size(); ++i) {
      if (rankings_[i] == r) return i;
    }
    return std::nullopt;
  }

 private:
  std::vector<Ranking> rankings_;
  std::vector<ItemId> universe_;
};

// ---------------------------------------------------------------------------
// Tallies

struct ItemStats {
  std::uint64_t n_impr = 0;
  std::uint64_t n_exam = 0;
  std::uint64_t n_click = 0;
  double sum_x = 0.0;
  double sum_x2 = 0.0;

  friend bool operator==(const ItemStats&, const ItemStats&) = default;
};

struct PerRankingStats {
  std::uint64_t n_impr_ranking = 0;
  std::map<ItemId, std::uint64_t> n_click_by_item;
  // Total post-click value observed while this ranking was shown verbatim.
  double sum_post_click = 0.0;

  std::uint64_t clicks_on(ItemId id) const {
    auto it = n_click_by_item.find(id);
    return it == n_click_by_item.end() ? 0 : it->second;
  }

  friend bool operator==(const PerRankingStats&, const PerRankingStats&) = default;
};

// One presented ranking with the feedback it received.
struct ImpressionRecord {
  Ranking ranking;
  std::vector<bool> clicks;
  std::vector<std::optional<double>> post_clicks;

  void validate() const {
    if (clicks.size() != ranking.depth() || post_clicks.size() != ranking.depth()) {
      throw MalformedRecordError("impression record: position count mismatch (ranking " +
                                 std::to_string(ranking.depth()) + ", clicks " +
                                 std::to_string(clicks.size()) + ", post-clicks " +
                                 std::to_string(post_clicks.size()) + ")");
    }
    for (std::size_t k = 0; k < clicks.size(); ++k) {
      if (clicks[k] != post_clicks[k].has_value()) {
        throw MalformedRecordError("impression record: post-click value present iff clicked");
      }
      if (post_clicks[k] && !(*post_clicks[k] >= 0.0)) {
        throw MalformedRecordError("impression record: post-click values must be nonnegative");
      }
    }
  }

  bool any_click() const { return std::find(clicks.begin(), clicks.end(), true) != clicks.end(); }

  double total_post_click() const {
    double s = 0.0;
    for (const auto& x : post_clicks) s += x.value_or(0.0);
    return s;
  }

  // Builds a record with no clicks.
  static ImpressionRecord no_clicks(Ranking r) {
    ImpressionRecord rec;
    rec.clicks.assign(r.depth(), false);
    rec.post_clicks.assign(r.depth(), std::nullopt);
    rec.ranking = std::move(r);
    return rec;
  }
};

// Antisymmetric |R|x|R| matrix of metric differences.
class PreferenceMatrix {
 public:
  PreferenceMatrix() = default;
  explicit PreferenceMatrix(std::size_t n) : n_(n), values_(n * n, 0.0) {}

  // Builds P[i][j] = metric[i] - metric[j].
  static PreferenceMatrix from_metrics(std::span<const double> metric) {
    PreferenceMatrix p(metric.size());
    for (std::size_t i = 0; i < metric.size(); ++i) {
      for (std::size_t j = i + 1; j < metric.size(); ++j) p.set(i, j, metric[i] - metric[j]);
    }
    return p;
  }

  std::size_t size() const { return n_; }
  double at(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }

  // Sets P[i][j] = v and P[j][i] = -v.
  void set(std::size_t i, std::size_t j, double v) {
    if (i == j) {
      if (v != 0.0) throw DomainError("preference matrix diagonal must be zero");
      return;
    }
    values_[i * n_ + j] = v;
    values_[j * n_ + i] = -v;
  }

  PreferenceMatrix scaled(double c) const {
    PreferenceMatrix p = *this;
    for (auto& v : p.values_) v *= c;
    return p;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// Experiment state: item tallies aligned with the sorted universe plus
// per-input-ranking tallies.

class ExperimentState {
 public:
  ExperimentState() = default;

  explicit ExperimentState(RankingSet rankings)
      : rankings_(std::move(rankings)),
        items_(rankings_.universe().size()),
        per_ranking_(rankings_.size()) {
    const auto& u = rankings_.universe();
    for (std::size_t i = 0; i < u.size(); ++i) index_.emplace(u[i], i);
    positions_.resize(rankings_.size());
    for (std::size_t r = 0; r < rankings_.size(); ++r) {
      for (ItemId id : rankings_[r]) positions_[r].push_back(index_.at(id));
    }
  }

  const RankingSet& rankings() const { return rankings_; }
  const std::vector<ItemId>& universe() const { return rankings_.universe(); }
  std::size_t num_items() const { return items_.size(); }

  std::optional<std::size_t> find_index(ItemId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t index_of(ItemId id) const {
    auto idx = find_index(id);
    if (!idx) throw UnknownItemError("item " + to_string(id) + " is not in the item universe");
    return *idx;
  }

  // Universe indices of input ranking r's items, in ranking order.
  const std::vector<std::size_t>& ranking_indices(std::size_t r) const { return positions_[r]; }

  const ItemStats& item(ItemId id) const { return items_[index_of(id)]; }
  ItemStats& item(ItemId id) { return items_[index_of(id)]; }
  const ItemStats& item_at(std::size_t idx) const { return items_[idx]; }
  ItemStats& item_at(std::size_t idx) { return items_[idx]; }
  const std::vector<ItemStats>& items() const { return items_; }

  const PerRankingStats& per_ranking(std::size_t r) const { return per_ranking_[r]; }
  PerRankingStats& per_ranking(std::size_t r) { return per_ranking_[r]; }

  friend bool operator==(const ExperimentState& a, const ExperimentState& b) {
    return a.items_ == b.items_ && a.per_ranking_ == b.per_ranking_;
  }

 private:
  RankingSet rankings_;
  std::vector<ItemStats> items_;
  std::vector<PerRankingStats> per_ranking_;
  std::unordered_map<ItemId, std::size_t> index_;
  std::vector<std::vector<std::size_t>> positions_;
};

// Accumulates impressions, clicks and post-click sums. Examination counts are
// maintained separately by update_examination_counts (clickmodel.hpp).
inline void record_impression(ExperimentState& state, const ImpressionRecord& rec) {
  rec.validate();
  std::vector<std::size_t> idx;
  idx.reserve(rec.ranking.depth());
  for (ItemId id : rec.ranking) idx.push_back(state.index_of(id));

  for (std::size_t k = 0; k < idx.size(); ++k) {
    ItemStats& s = state.item_at(idx[k]);
    ++s.n_impr;
    if (rec.clicks[k]) {
      const double x = *rec.post_clicks[k];
      ++s.n_click;
      s.sum_x += x;
      s.sum_x2 += x * x;
    }
  }

  const auto& rs = state.rankings();
  for (std::size_t r = 0; r < rs.size(); ++r) {
    if (rs[r] != rec.ranking) continue;
    PerRankingStats& p = state.per_ranking(r);
    ++p.n_impr_ranking;
    for (std::size_t k = 0; k < rec.clicks.size(); ++k) {
      if (rec.clicks[k]) ++p.n_click_by_item[rec.ranking[k]];
    }
    p.sum_post_click += rec.total_post_click();
  }
}

// ---------------------------------------------------------------------------
// Random streams

using Rng = std::mt19937_64;

enum class Stream : std::uint32_t { world = 1, behavior = 2, policy = 3, predictor = 4, replay = 5 };

// Independent generator for (master seed, repeat, stream).
inline Rng make_stream(std::uint64_t seed, std::uint64_t repeat, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(repeat), static_cast<std::uint32_t>(repeat >> 32),
                    static_cast<std::uint32_t>(stream), 0x6469u};
  return Rng(seq);
}

}  // namespace dirv

template <>
struct std::hash<dirv::Ranking> {
  std::size_t operator()(const dirv::Ranking& r) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (auto id : r) h = (h ^ static_cast<std::size_t>(dirv::to_int(id))) * 1099511628211ull;
    return h;
  }
};
