#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "dirv/replay.hpp"

using namespace dirv;

namespace {

const char* kLog =
    "#input_ranking\tq1\t1,2\n"
    "#input_ranking\tq1\t2,1\n"
    "# free comment\n"
    "q1\t1,2\t0,1\t-,12.5\n"
    "q1\t1,2\t0,0\t-,-\n"
    "q1\t2,1\t1,0\t3,-\n"
    "\n"
    "q1\t1,2\t1,1\t4,5\n";

}  // namespace

TEST(ReplayParse, GroupsRecordsByRanking) {
  std::istringstream in(kLog);
  auto data = parse_replay(in);
  ASSERT_EQ(data.queries.size(), 1u);
  const auto& q = data.queries[0];
  EXPECT_EQ(q.query_id, "q1");
  EXPECT_EQ(q.input_rankings, (std::vector<Ranking>{Ranking{1, 2}, Ranking{2, 1}}));
  EXPECT_EQ(q.pool.at(Ranking{1, 2}).size(), 3u);
  EXPECT_EQ(q.pool.at(Ranking{2, 1}).size(), 1u);
  EXPECT_EQ(data.total_records(), 4u);
  const auto& first = q.pool.at(Ranking{1, 2})[0];
  EXPECT_EQ(first.clicks, (std::vector<bool>{false, true}));
  EXPECT_EQ(first.post_clicks[1], 12.5);
  EXPECT_EQ(q.pool.at(Ranking{1, 2})[2].total_post_click(), 9.0);
}

TEST(ReplayParse, RoundTrip) {
  std::istringstream in(kLog);
  auto data = parse_replay(in);
  std::ostringstream out;
  write_replay(out, data);
  std::istringstream again(out.str());
  auto data2 = parse_replay(again);
  std::ostringstream out2;
  write_replay(out2, data2);
  EXPECT_EQ(out.str(), out2.str());
  EXPECT_EQ(data2.total_records(), 4u);
}

TEST(ReplayParse, Errors) {
  auto parse = [](const std::string& s) {
    std::istringstream in(s);
    return parse_replay(in, "log");
  };
  const std::string header = "#input_ranking\tq\t1,2\n#input_ranking\tq\t3\n";
  EXPECT_NO_THROW(parse(header + "q\t1,3\t0,0\t-,-\n"));
  EXPECT_THROW(parse(header + "q\t1,2\t0,1\t-\n"), DataError);           // length mismatch
  EXPECT_THROW(parse(header + "q\t1,2\t0,1\t-,-\n"), DataError);         // click without value
  EXPECT_THROW(parse(header + "q\t1,2\t0,2\t-,4\n"), DataError);         // bad flag
  EXPECT_THROW(parse(header + "q\t1,9\t0,0\t-,-\n"), DataError);         // item outside R
  EXPECT_THROW(parse(header + "q\t1,1\t0,0\t-,-\n"), DataError);         // duplicate item
  EXPECT_THROW(parse(header + "q\t1,2\t0,1\t-,x\n"), DataError);         // bad value
  EXPECT_THROW(parse(header + "q\t1,2\t0,1\n"), DataError);              // missing field
  EXPECT_THROW(parse("#input_ranking\tq\t1,2\nq\t1,2\t0,0\t-,-\n"), DataError);  // one input ranking
  try {
    parse(header + "q\t1,2\t0,1\t-\n");
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("log:3"), std::string::npos);
  }
}

TEST(Arrangements, CountAndDistinct) {
  std::vector<ItemId> items{ItemId{1}, ItemId{2}, ItemId{3}, ItemId{4}};
  auto all = all_arrangements(items, 2);
  EXPECT_EQ(all.size(), 12u);
  std::set<Ranking> unique(all.begin(), all.end());
  EXPECT_EQ(unique.size(), 12u);
  EXPECT_EQ(all_arrangements(items, 4).size(), 24u);
}

TEST(SynthesizeReplay, LogsEveryArrangement) {
  World w;
  for (int i = 1; i <= 3; ++i) w.emplace(ItemId{i}, GroundTruthItem{ItemId{i}, 0.4, ExponentialDwell{5.0}});
  RankingSet rs({Ranking{1, 2}, Ranking{2, 3}});
  Rng rng(1);
  auto q = synthesize_replay_query("q", rs, w, UserBehaviorKind::cascade(), 7, rng);
  EXPECT_EQ(q.pool.size(), 6u);
  EXPECT_EQ(q.total_records(), 42u);
  EXPECT_NO_THROW(q.validate());
}
