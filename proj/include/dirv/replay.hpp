#pragma once

// Logged-impression datasets for replay evaluation.
//
// File layout (tab separated):
//   #input_ranking <TAB> query_id <TAB> 3,1,7
//   query_id <TAB> ranking <TAB> clicks <TAB> post
// where ranking is comma-separated item ids, clicks comma-separated 0/1 and
// post comma-separated reals with "-" for unclicked positions.

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "dirv/core.hpp"
#include "dirv/sim.hpp"
#include "dirv/text.hpp"

namespace dirv {

struct ReplayQuery {
  std::string query_id;
  std::vector<Ranking> input_rankings;
  // Logged records per presented ranking, in log order.
  std::map<Ranking, std::vector<ImpressionRecord>> pool;

  std::size_t total_records() const {
    std::size_t n = 0;
    for (const auto& [r, q] : pool) n += q.size();
    return n;
  }

  void validate() const {
    if (input_rankings.size() < 2) {
      throw DataError("query " + query_id + ": needs at least two input rankings");
    }
    RankingSet rs(input_rankings);
    for (const auto& [r, q] : pool) {
      if (q.empty()) throw DataError("query " + query_id + ": empty queue for ranking " + to_string(r));
      for (ItemId id : r) {
        if (!std::binary_search(rs.universe().begin(), rs.universe().end(), id)) {
          throw DataError("query " + query_id + ": logged ranking " + to_string(r) + " uses item " +
                          to_string(id) + " outside the input rankings");
        }
      }
    }
  }
};

struct ReplayDataset {
  std::vector<ReplayQuery> queries;

  std::size_t total_records() const {
    std::size_t n = 0;
    for (const auto& q : queries) n += q.total_records();
    return n;
  }
};

namespace detail {

inline Ranking parse_ranking_field(const std::string& s, const std::string& where) {
  std::vector<ItemId> ids;
  for (const auto& f : text::split(s, ',')) {
    auto v = text::to_int(f);
    if (!v) throw DataError(where + ": bad item id '" + f + "'");
    ids.push_back(ItemId{*v});
  }
  try {
    return Ranking(std::move(ids));
  } catch (const DomainError& e) {
    throw DataError(where + ": " + e.what());
  }
}

}  // namespace detail

inline ReplayDataset parse_replay(std::istream& in, const std::string& name = "<replay>") {
  ReplayDataset data;
  std::map<std::string, std::size_t> index;
  auto query = [&](const std::string& id) -> ReplayQuery& {
    auto it = index.find(id);
    if (it == index.end()) {
      it = index.emplace(id, data.queries.size()).first;
      data.queries.push_back(ReplayQuery{id, {}, {}});
    }
    return data.queries[it->second];
  };

  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    const std::string where = name + ":" + std::to_string(n);
    auto f = text::split(line, '\t');
    if (line[0] == '#') {
      if (f[0] != "#input_ranking") continue;
      if (f.size() != 3) throw DataError(where + ": expected #input_ranking<TAB>query_id<TAB>items");
      query(f[1]).input_rankings.push_back(detail::parse_ranking_field(f[2], where));
      continue;
    }
    if (f.size() != 4) throw DataError(where + ": expected query_id<TAB>ranking<TAB>clicks<TAB>post");
    ImpressionRecord rec;
    rec.ranking = detail::parse_ranking_field(f[1], where);
    for (const auto& c : text::split(f[2], ',')) {
      if (c != "0" && c != "1") throw DataError(where + ": click flags must be 0 or 1");
      rec.clicks.push_back(c == "1");
    }
    for (const auto& p : text::split(f[3], ',')) {
      if (p == "-") {
        rec.post_clicks.emplace_back(std::nullopt);
        continue;
      }
      auto v = text::to_double(p);
      if (!v) throw DataError(where + ": bad post-click value '" + p + "'");
      rec.post_clicks.emplace_back(*v);
    }
    try {
      rec.validate();
    } catch (const MalformedRecordError& e) {
      throw DataError(where + ": " + e.what());
    }
    query(f[0]).pool[rec.ranking].push_back(std::move(rec));
  }
  for (const auto& q : data.queries) q.validate();
  return data;
}

inline ReplayDataset load_replay(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open replay dataset '" + path + "'");
  return parse_replay(in, path);
}

inline void write_replay(std::ostream& out, const ReplayDataset& data) {
  for (const auto& q : data.queries) {
    for (const auto& r : q.input_rankings) out << "#input_ranking\t" << q.query_id << '\t' << to_string(r) << '\n';
  }
  for (const auto& q : data.queries) {
    for (const auto& [r, records] : q.pool) {
      for (const auto& rec : records) {
        out << q.query_id << '\t' << to_string(rec.ranking) << '\t';
        for (std::size_t k = 0; k < rec.clicks.size(); ++k) out << (k ? "," : "") << (rec.clicks[k] ? '1' : '0');
        out << '\t';
        for (std::size_t k = 0; k < rec.post_clicks.size(); ++k) {
          out << (k ? "," : "");
          if (rec.post_clicks[k]) out << text::format_double(*rec.post_clicks[k]);
          else out << '-';
        }
        out << '\n';
      }
    }
  }
}

// Every ordered selection of `depth` distinct items from `items`.
inline std::vector<Ranking> all_arrangements(const std::vector<ItemId>& items, std::size_t depth) {
  std::vector<Ranking> out;
  std::vector<ItemId> cur;
  std::vector<bool> used(items.size(), false);
  auto rec = [&](auto&& self) -> void {
    if (cur.size() == depth) {
      out.emplace_back(cur);
      return;
    }
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (used[i]) continue;
      used[i] = true;
      cur.push_back(items[i]);
      self(self);
      cur.pop_back();
      used[i] = false;
    }
  };
  rec(rec);
  return out;
}

// Logs `records_per_ranking` simulated impressions for every arrangement of
// the input rankings' items at their depth.
inline ReplayQuery synthesize_replay_query(const std::string& query_id, const RankingSet& rankings,
                                           const World& world, const UserBehaviorKind& behavior,
                                           std::size_t records_per_ranking, Rng& rng) {
  ReplayQuery q{query_id, rankings.rankings(), {}};
  const std::size_t depth = rankings[0].depth();
  for (const Ranking& r : all_arrangements(rankings.universe(), depth)) {
    auto& queue = q.pool[r];
    for (std::size_t i = 0; i < records_per_ranking; ++i) queue.push_back(simulate_impression(r, world, behavior, rng));
  }
  return q;
}

}  // namespace dirv
