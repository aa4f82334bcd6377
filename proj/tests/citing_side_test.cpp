#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "fieldnorm/citing_side.hpp"
#include "test_util.hpp"

using namespace fieldnorm;

namespace {

EventsByPaper events_for(const std::string& id, const std::vector<CitationEvent>& events) {
  EventsByPaper map;
  map[id] = events;
  return map;
}

}  // namespace

TEST(Sncs, DirectSubstitution) {
  const Corpus universe = testutil::single_field_corpus({3, 0});
  const EventsByPaper events =
      events_for("c001", {CitationEvent{10.0, 20, 0.5}, CitationEvent{5.0, 100, 0.2}});
  EXPECT_DOUBLE_EQ(sncs(events, 1, universe).at("c001"), 1.0 / 10.0 + 1.0 / 5.0);
  EXPECT_DOUBLE_EQ(sncs(events, 2, universe).at("c001"), 1.0 / 20.0 + 1.0 / 100.0);
  EXPECT_DOUBLE_EQ(sncs(events, 3, universe).at("c001"),
                   1.0 / (0.5 * 20.0) + 1.0 / (0.2 * 100.0));
  EXPECT_EQ(sncs(events, 1, universe).method.linearity, Linearity::OutsideCategory);
  EXPECT_TRUE(sncs(events, 1, universe).method.additive);
}

TEST(Sncs, PapersWithoutEventsScoreZero) {
  const Corpus universe = testutil::single_field_corpus({3, 0, 7});
  const EventsByPaper events = events_for("c002", {CitationEvent{4.0, 8, 1.0}});
  const ScoreSet set = sncs(events, 1, universe);
  EXPECT_DOUBLE_EQ(set.at("c001"), 0.0);
  EXPECT_DOUBLE_EQ(set.at("c002"), 0.25);
  EXPECT_DOUBLE_EQ(set.at("c003"), 0.0);
  EXPECT_EQ(set.scores.size(), universe.size());
}

TEST(Sncs, RejectsUnknownFocalAndBadVariant) {
  const Corpus universe = testutil::single_field_corpus({3});
  const EventsByPaper events = events_for("ghost", {CitationEvent{4.0, 8, 1.0}});
  EXPECT_THROW(sncs(events, 1, universe), DataError);
  EXPECT_THROW(sncs({}, 0, universe), DataError);
  EXPECT_THROW(sncs({}, 4, universe), DataError);
}

TEST(Sncs, GroupTotalEqualsEventTotalOnDyadicValues) {
  // Weights drawn from powers of two make every term and every partial sum
  // exact, so additivity can be asserted with no tolerance at all.
  const double a_choices[] = {0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
  const long long r_choices[] = {1, 2, 4, 8, 16};
  const double p_choices[] = {0.25, 0.5, 1.0};
  std::mt19937_64 rng(20240820);
  std::uniform_int_distribution<int> a_pick(0, 5), r_pick(0, 4), p_pick(0, 2), count(0, 6);

  std::vector<long long> citations(12, 1);
  const Corpus universe = testutil::single_field_corpus(citations);
  EventsByPaper events;
  for (const Paper& paper : universe.papers()) {
    const int n_events = count(rng);
    for (int e = 0; e < n_events; ++e)
      events[paper.paper_id].push_back(
          CitationEvent{a_choices[a_pick(rng)], r_choices[r_pick(rng)], p_choices[p_pick(rng)]});
  }

  for (int variant : {1, 2, 3}) {
    const ScoreSet set = sncs(events, variant, universe);
    double by_paper = 0.0;
    for (const auto& [id, score] : set.scores) by_paper += score;
    double by_event = 0.0;
    for (const auto& [id, list] : events)
      for (const CitationEvent& e : list) {
        if (variant == 1) by_event += 1.0 / e.mean_refs;
        if (variant == 2) by_event += 1.0 / static_cast<double>(e.citing_refs);
        if (variant == 3) by_event += 1.0 / (e.active_share * static_cast<double>(e.citing_refs));
      }
    EXPECT_EQ(by_paper, by_event) << "variant " << variant;
  }
}

TEST(Sncs, ActiveShareDiscountNeverShrinksTheWeight) {
  std::mt19937_64 rng(20240821);
  std::uniform_real_distribution<double> a_dist(0.5, 50.0), p_dist(0.01, 1.0);
  std::uniform_int_distribution<long long> r_dist(1, 200);
  std::uniform_int_distribution<int> count(1, 5);
  const Corpus universe = testutil::single_field_corpus({1, 1, 1, 1, 1, 1, 1, 1});
  EventsByPaper events;
  for (const Paper& paper : universe.papers()) {
    const int n_events = count(rng);
    for (int e = 0; e < n_events; ++e)
      events[paper.paper_id].push_back(CitationEvent{a_dist(rng), r_dist(rng), p_dist(rng)});
  }
  const ScoreSet s2 = sncs(events, 2, universe);
  const ScoreSet s3 = sncs(events, 3, universe);
  for (const auto& [id, score] : s2.scores) EXPECT_GE(s3.at(id), score);
}

TEST(Sncs3Percentile, EqualScoresShareTheTop) {
  const Corpus universe = testutil::single_field_corpus({1, 1});
  EventsByPaper events;
  events["c001"].push_back(CitationEvent{2.0, 4, 0.5});
  events["c002"].push_back(CitationEvent{2.0, 4, 0.5});
  const ScoreSet set = sncs3_percentile(events, universe);
  EXPECT_DOUBLE_EQ(set.at("c001"), 100.0);
  EXPECT_DOUBLE_EQ(set.at("c002"), 100.0);
  EXPECT_FALSE(set.method.additive);
  EXPECT_EQ(set.method.linearity, Linearity::OutsideCategory);
}

TEST(Sncs3Percentile, DistinctScoresGetEvenSteps) {
  const Corpus universe = testutil::single_field_corpus({1, 1, 1, 1});
  // Paper k collects k unit-weight events, so base scores are 1, 2, 3, 4.
  EventsByPaper events;
  const char* ids[] = {"c001", "c002", "c003", "c004"};
  for (int k = 0; k < 4; ++k)
    for (int e = 0; e <= k; ++e) events[ids[k]].push_back(CitationEvent{1.0, 1, 1.0});
  const ScoreSet set = sncs3_percentile(events, universe);
  EXPECT_DOUBLE_EQ(set.at("c001"), 25.0);
  EXPECT_DOUBLE_EQ(set.at("c002"), 50.0);
  EXPECT_DOUBLE_EQ(set.at("c003"), 75.0);
  EXPECT_DOUBLE_EQ(set.at("c004"), 100.0);
}

TEST(Sncs3Percentile, ZeroEventPapersShareTheBottom) {
  const Corpus universe = testutil::single_field_corpus({1, 1, 1});
  EventsByPaper events;
  events["c003"].push_back(CitationEvent{1.0, 2, 1.0});
  const ScoreSet set = sncs3_percentile(events, universe);
  EXPECT_NEAR(set.at("c001"), 200.0 / 3.0, 1e-12);
  EXPECT_NEAR(set.at("c002"), 200.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(set.at("c003"), 100.0);
}
