// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "dirv/dirv.hpp"
#include "property_checks.hpp"

using namespace dirv;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void verdict(int n, bool ok, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", n, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

ExperimentConfig ec(std::size_t dup_k, PolicyKind::Variant policy) {
  ExperimentConfig cfg;
  cfg.num_rankings = 5;
  cfg.depth = 10;
  cfg.num_impressions = 10000;
  cfg.num_repeats = 30;
  cfg.duplication_k = dup_k;
  cfg.checkpoint_interval = 100;
  cfg.policy.variant = policy;
  cfg.threads = 0;
  return cfg;
}

// Rows at the final checkpoint.
double final_mean_e_bin(const std::vector<SeriesRow>& rows) {
  const auto agg = aggregate(rows);
  return agg.back().e_bin_mean;
}

double mean_e_bin_at(const std::vector<SeriesRow>& rows, std::size_t impressions) {
  for (const auto& a : aggregate(rows)) {
    if (a.impressions == impressions) return a.e_bin_mean;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// Memoized EC runs keyed by (duplication k, policy).
std::map<std::pair<std::size_t, PolicyKind::Variant>, std::vector<SeriesRow>> cache;

const std::vector<SeriesRow>& ec_run(std::size_t dup_k, PolicyKind::Variant policy) {
  auto key = std::make_pair(dup_k, policy);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, run_simulation(ec(dup_k, policy))).first;
  return it->second;
}

using V = PolicyKind::Variant;

void criterion1() {
  const double dirv0 = final_mean_e_bin(ec_run(0, V::dirv));
  const double ab0 = final_mean_e_bin(ec_run(0, V::ab));
  const double dirv80 = final_mean_e_bin(ec_run(8, V::dirv));
  const double tdm80 = final_mean_e_bin(ec_run(8, V::tdm));
  const bool ok = dirv0 <= 0.07 && ab0 <= 0.07 && dirv80 <= 0.12 && tdm80 >= 0.20;
  verdict(1, ok,
          fmt("EC dup 0%%: dirv %.4f (<= 0.07), ab %.4f (<= 0.07); dup 80%%: dirv %.4f (<= 0.12), tdm %.4f (>= 0.20)",
              dirv0, ab0, dirv80, tdm80));
}

void criterion2() {
  bool ok = true;
  std::string detail = "E_bin dirv vs tdm at dup";
  for (std::size_t k : {0, 2, 4, 6, 8}) {
    const double d = final_mean_e_bin(ec_run(k, V::dirv));
    const double t = final_mean_e_bin(ec_run(k, V::tdm));
    ok = ok && d < t;
    detail += fmt(" %.0f%%: %.4f < %.4f;", 10.0 * static_cast<double>(k), d, t);
  }
  verdict(2, ok, detail);
}

void criterion3() {
  const auto dirv = aggregate(ec_run(0, V::dirv));
  const auto ab = aggregate(ec_run(0, V::ab));
  std::size_t total = 0, dominated = 0;
  for (std::size_t i = 0; i < dirv.size(); ++i) {
    if (dirv[i].impressions <= 500) continue;
    ++total;
    if (dirv[i].total_variance_mean <= ab[i].total_variance_mean) ++dominated;
  }
  const double frac = total ? static_cast<double>(dominated) / static_cast<double>(total) : 0.0;
  verdict(3, frac >= 0.80,
          fmt("EC dup 0%%: dirv total variance <= ab at %.0f of %.0f checkpoints past 500 (%.3f >= 0.80)",
              static_cast<double>(dominated), static_cast<double>(total), frac));
}

// First checkpoint at which a repeat reaches E_bin <= 0.10.
std::vector<double> time_to_target(const std::vector<SeriesRow>& rows, std::size_t repeats) {
  std::vector<double> out(repeats, std::numeric_limits<double>::infinity());
  for (const auto& r : rows) {
    if (r.e_bin <= 0.10) out[r.repeat] = std::min(out[r.repeat], static_cast<double>(r.impressions));
  }
  return out;
}

void criterion4() {
  auto a = ec(4, V::dirv), b = ec(4, V::dirv_no_varpred);
  a.checkpoint_interval = b.checkpoint_interval = 10;
  const auto ta = time_to_target(run_simulation(a), a.num_repeats);
  const auto tb = time_to_target(run_simulation(b), b.num_repeats);
  std::size_t wins = 0;
  for (std::size_t i = 0; i < ta.size(); ++i) wins += ta[i] < tb[i];
  verdict(4, 2 * wins > ta.size(),
          fmt("EC dup 40%%: dirv reaches E_bin <= 0.10 strictly earlier than dirv_no_varpred in %.0f of %.0f repeats",
              static_cast<double>(wins), static_cast<double>(ta.size())));
}

void criterion5() {
  auto make = [](V v) {
    auto cfg = ec(0, v);
    cfg.num_impressions = 5000;
    cfg.behavior = UserBehaviorKind::position_based({1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1});
    return cfg;
  };
  const auto dirv = run_simulation(make(V::dirv));
  const auto noerr = run_simulation(make(V::dirv_no_errcorr));
  const double d5 = mean_e_bin_at(dirv, 5000), n5 = mean_e_bin_at(noerr, 5000), n1 = mean_e_bin_at(noerr, 1000);
  const bool ok = d5 < n5 && std::abs(n1 - n5) < 0.05;
  verdict(5, ok,
          fmt("position-based users, cascade estimator: at 5000 dirv %.4f < no_errcorr %.4f; no_errcorr "
              "|E(1000) - E(5000)| = %.4f (< 0.05)",
              d5, n5, std::abs(n1 - n5)));
}

void criterion6() {
  using namespace fixtures;
  std::vector<std::string> broken;

  {
    Rng rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0), m(0.0, 100.0), n(0.0, 500.0);
    std::size_t bad = 0;
    for (int i = 0; i < 10000; ++i) {
      PhiInputs in{u(rng), m(rng), m(rng), n(rng), n(rng)};
      const double base = phi(in);
      PhiInputs more_impr = in, more_click = in;
      more_impr.n_impr += 1.0 + n(rng);
      more_click.n_click += 1.0 + n(rng);
      if (base < 0.0 || phi(more_impr) > base * (1 + 1e-12) || phi(more_click) > base * (1 + 1e-12)) ++bad;
    }
    if (bad) broken.push_back("phi monotonicity");
  }
  {
    Rng rng(7);
    std::size_t bad = 0;
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n_items = 4 + trial % 5;
      const std::size_t depth = 1 + trial % std::min<std::size_t>(4, n_items);
      auto st = random_state(rng, n_items, 2, std::min<std::size_t>(depth + 1, n_items));
      EstimatorSnapshot snap(st, EstimatorOptions{}, random_predictions(rng, st.num_items()));
      const Ranking greedy = dirv_greedy(snap, depth);
      Ranking prefix{to_int(kOutside)};
      for (std::size_t k = 0; k < depth; ++k) {
        const double f0 = f_objective(prefix, snap);
        double best = -std::numeric_limits<double>::infinity();
        for (ItemId d : st.universe()) {
          if (!prefix.contains(d)) best = std::max(best, f0 - f_objective(append(prefix, d), snap));
        }
        if (f0 - f_objective(append(prefix, greedy[k]), snap) < best - 1e-9 * std::max(1.0, f0)) ++bad;
        prefix = append(prefix, greedy[k]);
      }
    }
    if (bad) broken.push_back("greedy step-optimality");
  }
  {
    Rng rng(9);
    std::size_t bad = 0;
    for (int trial = 0; trial < 200; ++trial) {
      auto st = random_state(rng, 7, 3, 3);
      EstimatorSnapshot snap(st, EstimatorOptions{}, random_predictions(rng, st.num_items()));
      std::vector<Ranking> cands{dirv_greedy(snap, 3)};
      for (const auto& r : st.rankings().rankings()) cands.push_back(r);
      std::size_t best = 0;
      for (std::size_t i = 1; i < cands.size(); ++i) {
        if (f_objective(cands[i], snap) < f_objective(cands[best], snap)) best = i;
      }
      if (!(dirv_select(snap, 3, 0.0) == cands[best])) ++bad;
    }
    if (bad) broken.push_back("dirv_select(gamma=0) minimizes f");
  }
  double rel = 0.0;
  {
    const World w = unbiasedness_world();
    const double truth = true_ranking_metric(Ranking{1, 2, 3, 4, 5}, w, UserBehaviorKind::cascade());
    rel = std::abs(mean_fixed_ranking_estimate(w, true, 30, 10000) - truth) / truth;
    if (!(rel < 0.05)) broken.push_back("estimator unbiasedness");
  }
  {
    auto p = [](std::vector<double> m) { return PreferenceMatrix::from_metrics(m); };
    const bool ok = binary_error(p({1, 2, 3}), p({1, 2, 3})) == 0.0 &&
                    binary_error(p({1, 2, 3}), p({-1, -2, -3})) == 1.0 &&
                    std::abs(binary_error(p({1, 2, 3}), p({2, 1, 3})) - 2.0 / 6.0) < 1e-15;
    if (!ok) broken.push_back("binary_error examples");
  }
  std::size_t nonvacuous = 0;
  {
    BoundCheckSetup s{World{}, RankingSet({Ranking{1, 2}, Ranking{3, 4}})};
    s.world.emplace(ItemId{1}, GroundTruthItem{ItemId{1}, 0.8, ExponentialDwell{50.0}});
    s.world.emplace(ItemId{2}, GroundTruthItem{ItemId{2}, 0.5, ExponentialDwell{40.0}});
    s.world.emplace(ItemId{3}, GroundTruthItem{ItemId{3}, 0.3, ExponentialDwell{2.0}});
    s.world.emplace(ItemId{4}, GroundTruthItem{ItemId{4}, 0.2, ExponentialDwell{1.0}});
    s.predicted_variance = {2500, 1600, 4, 1};
    s.impressions = 500;
    for (auto policy : {V::ab, V::dirv, V::tdm}) {
      s.policy.variant = policy;
      const auto rep = variance_bound_check(s);
      if (rep.verdict == BoundCheckReport::Verdict::violated) broken.push_back("bound check (" + to_string(policy) + ")");
      nonvacuous += rep.verdict != BoundCheckReport::Verdict::vacuous;
    }
    if (nonvacuous == 0) broken.push_back("bound check had no non-vacuous case");
  }
  std::string detail = fmt("unbiasedness relative error %.4f (< 0.05); %.0f non-vacuous bound checks", rel,
                           static_cast<double>(nonvacuous));
  for (const auto& b : broken) detail += "; broken: " + b;
  verdict(6, broken.empty(), detail);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion7() {
  const fs::path root = fs::temp_directory_path() / "dirv_acceptance_determinism";
  fs::remove_all(root);
  bool ok = true;
  std::size_t compared = 0;
  for (auto policy : {V::dirv, V::dirv_no_varpred, V::dirv_no_errcorr, V::tdm, V::ab}) {
    auto cfg = ec(4, policy);
    cfg.num_impressions = 1000;
    cfg.num_repeats = 4;
    cfg.seed = 77;
    for (const char* run : {"a", "b"}) emit_results(run_simulation(cfg), root / run, to_string(policy));
    ok = ok && slurp(root / "a" / (to_string(policy) + ".csv")) == slurp(root / "b" / (to_string(policy) + ".csv"));
    ++compared;
  }
  {
    auto cfg = ec(0, V::dirv);
    cfg.num_items = 6;
    cfg.depth = 2;
    cfg.num_rankings = 2;
    ReplayDataset data;
    for (std::size_t q = 0; q < 3; ++q) {
      auto sw = repeat_world(cfg, q);
      Rng rng = make_stream(cfg.seed, q, Stream::replay);
      data.queries.push_back(synthesize_replay_query("q" + std::to_string(q), sw.rankings, sw.world, cfg.behavior, 30, rng));
    }
    auto rcfg = ec(0, V::dirv);
    rcfg.mode = ExperimentConfig::Mode::replay;
    rcfg.num_impressions = 500;
    rcfg.num_repeats = 3;
    for (const char* run : {"a", "b"}) emit_results(run_replay(rcfg, data).rows, root / run, "replay");
    ok = ok && slurp(root / "a" / "replay.csv") == slurp(root / "b" / "replay.csv");
    ++compared;
  }
  fs::remove_all(root);
  verdict(7, ok, fmt("%.0f result CSVs byte-identical across same-seed runs", static_cast<double>(compared)));
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  void (*criteria[])() = {criterion1, criterion2, criterion3, criterion4, criterion5, criterion6, criterion7};
  for (int i = 0; i < 7; ++i) {
    try {
      criteria[i]();
    } catch (const std::exception& e) {
      std::printf("FAIL criterion %d: exception %s\n", i + 1, e.what());
      ++failures;
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%d criteria failed (%.0f s)\n", failures, secs);
  return failures ? 1 : 0;
}
