#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "dirv/estimator.hpp"

using namespace dirv;

namespace {

ItemStats samples(std::initializer_list<double> xs) {
  ItemStats s;
  for (double x : xs) {
    ++s.n_click;
    s.sum_x += x;
    s.sum_x2 += x * x;
  }
  s.n_impr = s.n_exam = s.n_click;
  return s;
}

}  // namespace

TEST(ItemMean, Examples) {
  ItemStats s;
  s.n_click = 10;
  s.sum_x = 100.0;
  EXPECT_DOUBLE_EQ(item_mean(s).value, 10.0);
  EXPECT_DOUBLE_EQ(item_mean(samples({30.0})).value, 30.0);
  auto cold = item_mean(ItemStats{});
  EXPECT_EQ(cold.value, 0.0);
  EXPECT_TRUE(cold.cold_start);
}

TEST(ItemVariance, Examples) {
  EXPECT_DOUBLE_EQ(*item_variance(samples({10.0, 20.0})), 50.0);
  EXPECT_DOUBLE_EQ(*item_variance(samples({7.0, 7.0, 7.0})), 0.0);
  EXPECT_FALSE(item_variance(samples({3.0})));
  EXPECT_FALSE(item_variance(ItemStats{}));
}

TEST(ClippedVariance, Examples) {
  EXPECT_EQ(clipped_variance(4.0, 9.0), 9.0);
  EXPECT_EQ(clipped_variance(9.0, 4.0), 9.0);
  EXPECT_EQ(clipped_variance(std::nullopt, 2.5), 2.5);
  EXPECT_THROW(clipped_variance(1.0, -1.0), DomainError);
}

TEST(RankingMetricEstimate, Examples) {
  std::vector<double> p{0.5, 0.25}, m{10.0, 20.0};
  EXPECT_DOUBLE_EQ(ranking_metric_estimate(p, m), 10.0);
  std::vector<double> zeros{0.0, 0.0};
  EXPECT_EQ(ranking_metric_estimate(p, zeros), 0.0);
  std::vector<double> p1{0.3}, m1{10.0};
  EXPECT_DOUBLE_EQ(ranking_metric_estimate(p1, m1), 3.0);
  EXPECT_THROW(ranking_metric_estimate(p, m1), DomainError);
}

TEST(RankingMetricEstimate, FromState) {
  ExperimentState st(RankingSet({Ranking{1, 2}, Ranking{2, 1}}));
  st.item(ItemId{1}) = samples({10.0, 10.0});
  st.item(ItemId{1}).n_exam = 4;  // attraction 0.5
  st.item(ItemId{2}) = samples({20.0});
  st.item(ItemId{2}).n_exam = 2;  // attraction 0.5
  // click probs [0.5, 0.25] under the cascade
  EXPECT_DOUBLE_EQ(ranking_metric_estimate(Ranking{1, 2}, st, ClickModelKind::cascade()), 10.0);
  EXPECT_THROW(ranking_metric_estimate(Ranking{1, 3}, st, ClickModelKind::cascade()), UnknownItemError);
}

TEST(ModelAgnosticCtr, Examples) {
  Ranking r{1, 2};
  PerRankingStats prs;
  prs.n_impr_ranking = 10;
  prs.n_click_by_item[ItemId{1}] = 3;
  EXPECT_DOUBLE_EQ(model_agnostic_ctr(r, prs, ItemId{1}).value, 0.3);
  EXPECT_EQ(model_agnostic_ctr(r, prs, ItemId{2}).value, 0.0);
  prs.n_impr_ranking = 5;
  prs.n_click_by_item[ItemId{2}] = 5;
  EXPECT_EQ(model_agnostic_ctr(r, prs, ItemId{2}).value, 1.0);
  auto cold = model_agnostic_ctr(r, PerRankingStats{}, ItemId{1});
  EXPECT_EQ(cold.value, 0.0);
  EXPECT_TRUE(cold.cold_start);
  EXPECT_THROW(model_agnostic_ctr(r, prs, ItemId{3}), DomainError);
}

TEST(BlendedClickProb, Examples) {
  EXPECT_EQ(blended_click_prob(0.7, 0.1, 0), 0.7);
  EXPECT_DOUBLE_EQ(blended_click_prob(0.8, 0.4, 3), 0.6);
  EXPECT_DOUBLE_EQ(blended_click_prob(1.0, 0.0, 99), 0.1);
}

TEST(BlendedClickProb, LiesBetweenInputs) {
  Rng rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double a = u(rng), b = u(rng);
    const auto n = static_cast<std::uint64_t>(i % 500);
    const double v = blended_click_prob(a, b, n);
    EXPECT_GE(v, std::min(a, b) - 1e-15);
    EXPECT_LE(v, std::max(a, b) + 1e-15);
  }
}

TEST(VariancePredictor, OracleNoiseWithinBound) {
  auto pred = VariancePredictor::oracle_noise();
  Rng rng(5);
  double sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double v = pred.predict(ItemId{1}, 9.0, rng);
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 18.0);
    sum += v;
  }
  // U[0, 18] has mean 9 and sd 18/sqrt(12); 5 standard errors.
  EXPECT_NEAR(sum / n, 9.0, 5.0 * 18.0 / std::sqrt(12.0 * n));
  EXPECT_EQ(pred.predict(ItemId{1}, 0.0, rng), 0.0);
  EXPECT_THROW(pred.predict(ItemId{1}, std::nullopt, rng), ConfigError);
}

TEST(VariancePredictor, ConstantAndTable) {
  Rng rng(1);
  EXPECT_EQ(VariancePredictor::constant(3.5).predict(ItemId{8}, std::nullopt, rng), 3.5);
  EXPECT_THROW(VariancePredictor::constant(-1.0), ConfigError);
  auto t = VariancePredictor::table({{ItemId{1}, 4.0}});
  EXPECT_EQ(t.predict(ItemId{1}, std::nullopt, rng), 4.0);
  EXPECT_EQ(t.predict(ItemId{2}, std::nullopt, rng), 0.0);
}

TEST(VariancePredictor, LoadTable) {
  const auto path = std::filesystem::temp_directory_path() / "dirv_variance_table.csv";
  {
    std::ofstream out(path);
    out << "item_id,predicted_variance\n1,2.5\n7,100\n";
  }
  Rng rng(1);
  auto t = VariancePredictor::load_table(path.string());
  EXPECT_EQ(t.predict(ItemId{7}, std::nullopt, rng), 100.0);
  EXPECT_EQ(t.predict(ItemId{1}, std::nullopt, rng), 2.5);
  {
    std::ofstream out(path);
    out << "item_id,predicted_variance\n1,abc\n";
  }
  EXPECT_THROW(VariancePredictor::load_table(path.string()), DataError);
  std::filesystem::remove(path);
  EXPECT_THROW(VariancePredictor::load_table(path.string()), DataError);
}

TEST(EstimatorSnapshot, BlendFollowsErrorCorrection) {
  ExperimentState st(RankingSet({Ranking{1, 2}, Ranking{2, 1}}));
  st.item(ItemId{1}) = samples({10.0, 30.0});
  st.item(ItemId{1}).n_exam = 4;  // attraction 0.5
  st.item(ItemId{2}) = samples({5.0});
  st.item(ItemId{2}).n_exam = 4;  // attraction 0.25
  st.per_ranking(0).n_impr_ranking = 3;
  st.per_ranking(0).n_click_by_item[ItemId{1}] = 3;  // ctr 1.0 and 0.0

  EstimatorOptions opt;
  EstimatorSnapshot with(st, opt);
  // model [0.5, 0.125]; theta = 1/2
  EXPECT_DOUBLE_EQ(with.ranking_click_probs(0)[0], 0.5 * 0.5 + 0.5 * 1.0);
  EXPECT_DOUBLE_EQ(with.ranking_click_probs(0)[1], 0.5 * 0.125);
  EXPECT_DOUBLE_EQ(with.ranking_estimate(0), 0.75 * 20.0 + 0.0625 * 5.0);
  // Never shown verbatim: theta = 1, pure model.
  EXPECT_DOUBLE_EQ(with.ranking_click_probs(1)[0], 0.25);

  opt.error_correction = false;
  EstimatorSnapshot without(st, opt);
  EXPECT_DOUBLE_EQ(without.ranking_click_probs(0)[0], 0.5);
  EXPECT_DOUBLE_EQ(without.ranking_estimate(0), 0.5 * 20.0 + 0.125 * 5.0);
}

TEST(EstimatorSnapshot, VarianceUsesClipping) {
  ExperimentState st(RankingSet({Ranking{1}, Ranking{2}}));
  st.item(ItemId{1}) = samples({10.0, 20.0});  // sample variance 50
  std::vector<double> predicted{80.0, 3.0};
  EstimatorSnapshot snap(st, EstimatorOptions{}, predicted);
  EXPECT_EQ(snap.variance(0), 80.0);
  EXPECT_EQ(snap.variance(1), 3.0);
  predicted = {10.0, 0.0};
  EstimatorSnapshot snap2(st, EstimatorOptions{}, predicted);
  EXPECT_EQ(snap2.variance(0), 50.0);
}
