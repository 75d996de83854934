#pragma once

// Ranking-selection policies: variance-minimizing interleaving (DIRV) and its
// ablations, team-draft multileaving with post-click credit, and A/B testing.

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "dirv/objective.hpp"

namespace dirv {

class ReplayExhaustedError : public Error { using Error::Error; };

struct PolicyKind {
  enum class Variant { dirv, dirv_no_varpred, dirv_no_errcorr, tdm, ab };

  Variant variant = Variant::dirv;
  double gamma = 1.0;

  bool is_dirv() const {
    return variant == Variant::dirv || variant == Variant::dirv_no_varpred ||
           variant == Variant::dirv_no_errcorr;
  }
  bool uses_variance_prediction() const { return variant != Variant::dirv_no_varpred; }
  bool uses_error_correction() const { return variant != Variant::dirv_no_errcorr; }

  // Weight on g in the final selection; the error-correction ablation drops g.
  double effective_gamma() const { return uses_error_correction() ? gamma : 0.0; }
};

inline std::string to_string(PolicyKind::Variant v) {
  switch (v) {
    case PolicyKind::Variant::dirv: return "dirv";
    case PolicyKind::Variant::dirv_no_varpred: return "dirv_no_varpred";
    case PolicyKind::Variant::dirv_no_errcorr: return "dirv_no_errcorr";
    case PolicyKind::Variant::tdm: return "tdm";
    case PolicyKind::Variant::ab: return "ab";
  }
  return "?";
}

inline PolicyKind::Variant parse_policy(const std::string& s) {
  for (auto v : {PolicyKind::Variant::dirv, PolicyKind::Variant::dirv_no_varpred,
                 PolicyKind::Variant::dirv_no_errcorr, PolicyKind::Variant::tdm, PolicyKind::Variant::ab}) {
    if (to_string(v) == s) return v;
  }
  throw ConfigError("unknown policy '" + s + "'");
}

// ---------------------------------------------------------------------------
// DIRV

// Builds a ranking by repeatedly appending the item with the largest variance
// reduction. Ties go to the smaller ItemId.
inline Ranking dirv_greedy(const EstimatorSnapshot& snap, std::size_t depth) {
  const ExperimentState& state = snap.state();
  const std::size_t n = state.num_items();
  if (depth > n) {
    throw ConfigError("greedy depth " + std::to_string(depth) + " exceeds the " + std::to_string(n) +
                      " available items");
  }
  const ClickModelKind& kind = snap.options().click_model;
  std::vector<bool> used(n, false);
  std::vector<ItemId> out;
  out.reserve(depth);
  double exam = depth > 0 ? first_examination(kind) : 0.0;
  for (std::size_t step = 0; step < depth; ++step) {
    std::size_t best = n;
    double best_gain = -std::numeric_limits<double>::infinity();
    for (std::size_t idx = 0; idx < n; ++idx) {
      if (used[idx]) continue;
      const double gain = greedy_gain_at(idx, exam, snap);
      if (gain > best_gain) {
        best_gain = gain;
        best = idx;
      }
    }
    used[best] = true;
    out.push_back(state.universe()[best]);
    if (step + 1 < depth) exam = next_examination(exam, snap.attraction(best), step + 1, kind);
  }
  return Ranking(std::move(out));
}

inline double selection_objective(const Ranking& o, const EstimatorSnapshot& snap, double gamma) {
  double v = f_objective(o, snap);
  if (gamma != 0.0) v += gamma * g_objective(o, snap);
  return v;
}

// Minimizer of f + gamma * g over a candidate pool; ties keep the earlier one.
inline Ranking dirv_select_from(std::span<const Ranking> pool, const EstimatorSnapshot& snap,
                                double gamma) {
  if (pool.empty()) throw ReplayExhaustedError("no candidate rankings left to present");
  std::size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const double v = selection_objective(pool[i], snap, gamma);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  return pool[best];
}

// Chooses among the greedy ranking and the input rankings (in that order).
inline Ranking dirv_select(const EstimatorSnapshot& snap, std::size_t depth, double gamma) {
  std::vector<Ranking> candidates;
  candidates.reserve(snap.state().rankings().size() + 1);
  candidates.push_back(dirv_greedy(snap, depth));
  for (const auto& r : snap.state().rankings().rankings()) candidates.push_back(r);
  return dirv_select_from(candidates, snap, gamma);
}

// ---------------------------------------------------------------------------
// Team-draft multileaving

struct TdmAssignment {
  std::vector<std::size_t> team_of;  // position -> input ranking index
};

struct TdmInterleaving {
  Ranking ranking;
  TdmAssignment assignment;
};

// Each round visits the teams in a fresh random order; every team appends its
// highest-ranked item not yet placed. Stops at `depth` or when no team can add.
inline TdmInterleaving tdm_interleave(const RankingSet& rankings, std::size_t depth, Rng& rng) {
  const std::size_t teams = rankings.size();
  if (teams < 2) throw ConfigError("team-draft needs at least two rankings");
  std::vector<std::size_t> cursor(teams, 0), order(teams);
  std::vector<ItemId> out;
  TdmAssignment assign;
  auto placed = [&](ItemId id) { return std::find(out.begin(), out.end(), id) != out.end(); };
  while (out.size() < depth) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    bool progress = false;
    for (std::size_t team : order) {
      if (out.size() >= depth) break;
      const Ranking& r = rankings[team];
      while (cursor[team] < r.depth() && placed(r[cursor[team]])) ++cursor[team];
      if (cursor[team] == r.depth()) continue;
      out.push_back(r[cursor[team]++]);
      assign.team_of.push_back(team);
      progress = true;
    }
    if (!progress) break;
  }
  return {Ranking(std::move(out)), std::move(assign)};
}

// Credit per team: the post-click value of each click, given to the team that
// placed the clicked item.
inline std::vector<double> tdm_credit(const ImpressionRecord& rec, const TdmAssignment& assign,
                                      std::size_t num_teams) {
  if (assign.team_of.size() < rec.clicks.size()) {
    throw DomainError("team assignment does not cover every position");
  }
  std::vector<double> credit(num_teams, 0.0);
  for (std::size_t k = 0; k < rec.clicks.size(); ++k) {
    if (rec.clicks[k]) credit.at(assign.team_of[k]) += rec.post_clicks[k].value_or(0.0);
  }
  return credit;
}

// Pairwise impression wins: team i beats j when its credit is strictly larger.
class TdmTally {
 public:
  explicit TdmTally(std::size_t teams) : n_(teams), wins_(teams * teams, 0) {}

  void add(std::span<const double> credit) {
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        if (credit[i] > credit[j]) ++wins_[i * n_ + j];
      }
    }
  }

  std::uint64_t wins(std::size_t i, std::size_t j) const { return wins_[i * n_ + j]; }

  PreferenceMatrix preferences() const {
    PreferenceMatrix p(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = i + 1; j < n_; ++j) {
        p.set(i, j, static_cast<double>(wins(i, j)) - static_cast<double>(wins(j, i)));
      }
    }
    return p;
  }

 private:
  std::size_t n_;
  std::vector<std::uint64_t> wins_;
};

// ---------------------------------------------------------------------------
// A/B testing

inline std::size_t ab_select(std::size_t num_rankings, Rng& rng) {
  if (num_rankings == 0) throw ConfigError("A/B selection needs at least one ranking");
  std::uniform_int_distribution<std::size_t> pick(0, num_rankings - 1);
  return pick(rng);
}

// Mean total post-click value per impression of the ranking.
inline Estimate ab_estimate(const PerRankingStats& prs) {
  if (prs.n_impr_ranking == 0) return {0.0, true};
  return {prs.sum_post_click / static_cast<double>(prs.n_impr_ranking), false};
}

inline std::vector<double> ab_estimates(const ExperimentState& state) {
  std::vector<double> out(state.rankings().size());
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = ab_estimate(state.per_ranking(r)).value;
  return out;
}

}  // namespace dirv
