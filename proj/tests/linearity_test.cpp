#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "fieldnorm/citing_side.hpp"
#include "fieldnorm/linearity.hpp"
#include "fieldnorm/normalizers.hpp"
#include "test_util.hpp"

using namespace fieldnorm;

namespace {

using Pairs = std::vector<std::pair<double, double>>;

Pairs pairs_from(const std::vector<double>& xs, double (*fn)(double)) {
  Pairs out;
  for (double x : xs) out.emplace_back(x, fn(x));
  return out;
}

// Exhaustive scan over every equal-spacing triple in the support; the largest
// discrepancy it finds is what a maximal witness has to report.
double brute_force_max_violation(Pairs pairs) {
  std::sort(pairs.begin(), pairs.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    for (std::size_t k = i + 1; k < pairs.size(); ++k)
      for (std::size_t j = k + 1; j < pairs.size(); ++j) {
        if (pairs[k].first - pairs[i].first != pairs[j].first - pairs[k].first) continue;
        const double gap1 = pairs[k].second - pairs[i].second;
        const double gap2 = pairs[j].second - pairs[k].second;
        worst = std::max(worst, std::abs(gap2 - gap1));
      }
  return worst;
}

double score_at(const Pairs& pairs, double x) {
  for (const auto& p : pairs)
    if (p.first == x) return p.second;
  ADD_FAILURE() << "witness point " << x << " is not in the support";
  return 0.0;
}

void expect_valid_witness(const Pairs& pairs, const EquidistanceVerdict& verdict, double tol) {
  ASSERT_TRUE(verdict.witness.has_value());
  const Witness& w = *verdict.witness;
  EXPECT_EQ(w.x_b - w.x_a, w.x_d - w.x_c);
  EXPECT_GT(w.x_b, w.x_a);
  EXPECT_GT(w.x_d, w.x_c);
  EXPECT_DOUBLE_EQ(w.gap_first, score_at(pairs, w.x_b) - score_at(pairs, w.x_a));
  EXPECT_DOUBLE_EQ(w.gap_second, score_at(pairs, w.x_d) - score_at(pairs, w.x_c));
  double max_y = 0.0;
  for (const auto& p : pairs) max_y = std::max(max_y, std::abs(p.second));
  EXPECT_GT(std::abs(w.gap_second - w.gap_first), tol * (1.0 + max_y));
}

}  // namespace

TEST(Equidistance, ExactAffineMapPasses) {
  Pairs pairs;
  for (int x = 0; x <= 10; ++x) pairs.emplace_back(double(x), 2.0 * x + 3.0);
  const EquidistanceVerdict v = check_equidistance(pairs);
  EXPECT_TRUE(v.equidistant);
  EXPECT_FALSE(v.degenerate);
  ASSERT_TRUE(v.fitted.has_value());
  EXPECT_DOUBLE_EQ(v.fitted->k, 2.0);
  EXPECT_DOUBLE_EQ(v.fitted->b, 3.0);
  EXPECT_LE(v.max_residual, 1e-12);
  EXPECT_FALSE(v.witness.has_value());
}

TEST(Equidistance, AffineMapsAlwaysPass) {
  std::mt19937_64 rng(20240822);
  std::uniform_real_distribution<double> coeff(-50.0, 50.0);
  std::uniform_real_distribution<double> jitter(0.1, 3.0);
  std::uniform_int_distribution<int> n_dist(3, 40);
  for (int trial = 0; trial < 200; ++trial) {
    double k = coeff(rng);
    if (std::abs(k) < 1e-3) k = 1e-3;
    const double b = coeff(rng);
    const int n = n_dist(rng);
    Pairs pairs;
    double x = coeff(rng);
    for (int i = 0; i < n; ++i) {
      pairs.emplace_back(x, k * x + b);
      x += jitter(rng);
    }
    const EquidistanceVerdict v = check_equidistance(pairs);
    EXPECT_TRUE(v.equidistant) << "trial " << trial;
    EXPECT_FALSE(v.degenerate) << "trial " << trial;
    ASSERT_TRUE(v.fitted.has_value());
    EXPECT_NEAR(v.fitted->k, k, 1e-6 * (1.0 + std::abs(k))) << "trial " << trial;
    EXPECT_NEAR(v.fitted->b, b, 1e-5 * (1.0 + std::abs(b))) << "trial " << trial;
  }
}

TEST(Equidistance, ConstantScoresAreDegenerate) {
  const Pairs pairs = {{1.0, 5.0}, {2.0, 5.0}, {4.0, 5.0}, {9.0, 5.0}};
  const EquidistanceVerdict v = check_equidistance(pairs);
  EXPECT_TRUE(v.equidistant);
  EXPECT_TRUE(v.degenerate);
  EXPECT_FALSE(v.fitted.has_value());
}

TEST(Equidistance, RejectsTinyOrDuplicatedSupports) {
  EXPECT_THROW(check_equidistance({{1.0, 1.0}, {2.0, 2.0}}), DataError);
  EXPECT_THROW(check_equidistance({{1.0, 1.0}, {1.0, 2.0}, {3.0, 3.0}}), DataError);
  EXPECT_THROW(check_equidistance({{1.0, 1.0}, {2.0, 2.0}, {3.0, 3.0}}, 0.0), DataError);
}

TEST(Equidistance, ToleranceScalesWithScoreMagnitude) {
  // A perturbation far below tol*(1+max|y|) must not flip the verdict even
  // when the raw residual is large in absolute terms.
  Pairs pairs;
  for (int x = 0; x <= 8; ++x) pairs.emplace_back(double(x), 1e9 * x);
  pairs[4].second += 0.5;  // max|y| is 8e9, so the allowance is about 8.0
  EXPECT_TRUE(check_equidistance(pairs, 1e-9).equidistant);
  pairs[4].second += 99.5;  // now well past it
  EXPECT_FALSE(check_equidistance(pairs, 1e-9).equidistant);
}

TEST(Equidistance, LogCurveFailsWithMaximalWitness) {
  std::vector<double> xs;
  for (int x = 0; x <= 20; ++x) xs.push_back(x);
  const Pairs pairs = pairs_from(xs, +[](double x) { return std::log(x + 1.0); });
  const EquidistanceVerdict v = check_equidistance(pairs, 1e-9);
  EXPECT_FALSE(v.equidistant);
  expect_valid_witness(pairs, v, 1e-9);
  EXPECT_DOUBLE_EQ(std::abs(v.witness->gap_second - v.witness->gap_first),
                   brute_force_max_violation(pairs));
}

TEST(Equidistance, CurvedTransformsAlwaysFail) {
  std::mt19937_64 rng(20240823);
  std::uniform_int_distribution<int> n_dist(6, 25);
  double (*transforms[])(double) = {
      +[](double x) { return std::log(x + 1.0); },
      +[](double x) { return x * x; },
      +[](double x) { return std::sqrt(x); },
  };
  for (int trial = 0; trial < 60; ++trial) {
    const int n = n_dist(rng);
    std::vector<double> xs;
    for (int i = 0; i < n; ++i) xs.push_back(i);  // integer grid: plenty of triples
    for (auto* fn : transforms) {
      const Pairs pairs = pairs_from(xs, fn);
      const EquidistanceVerdict v = check_equidistance(pairs, 1e-9);
      EXPECT_FALSE(v.equidistant);
      expect_valid_witness(pairs, v, 1e-9);
    }
  }
}

TEST(Equidistance, WitnessMayBeAbsentWhenNoGapsRepeat) {
  // All pairwise differences of {0,1,3,7,15} are distinct, so no two equal
  // raw gaps exist and the verdict has to stand on the residual alone.
  const std::vector<double> xs = {0.0, 1.0, 3.0, 7.0, 15.0};
  const Pairs pairs = pairs_from(xs, +[](double x) { return std::log(x + 1.0); });
  const EquidistanceVerdict v = check_equidistance(pairs, 1e-9);
  EXPECT_FALSE(v.equidistant);
  EXPECT_FALSE(v.witness.has_value());
}

TEST(Equidistance, DisjointPairFallbackFindsEqualGapPairs) {
  // No three points form an equal-spacing triple, but the gaps 0->2 and
  // 5->7 are both 2 wide, so the pair comparison still yields a witness.
  const Pairs pairs = {{0.0, 0.0}, {2.0, 1.0}, {5.0, 10.0}, {7.0, 30.0}};
  const EquidistanceVerdict v = check_equidistance(pairs, 1e-9);
  EXPECT_FALSE(v.equidistant);
  ASSERT_TRUE(v.witness.has_value());
  EXPECT_DOUBLE_EQ(v.witness->x_b - v.witness->x_a, 2.0);
  EXPECT_DOUBLE_EQ(v.witness->x_d - v.witness->x_c, 2.0);
  EXPECT_NE(v.witness->gap_first, v.witness->gap_second);
}

TEST(Equidistance, WitnessIsDeterministic) {
  std::vector<double> xs;
  for (int x = 0; x <= 30; ++x) xs.push_back(x);
  const Pairs pairs = pairs_from(xs, +[](double x) { return std::sqrt(x); });
  Pairs shuffled = pairs;
  std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(7));
  const EquidistanceVerdict a = check_equidistance(pairs, 1e-9);
  const EquidistanceVerdict b = check_equidistance(shuffled, 1e-9);
  ASSERT_TRUE(a.witness.has_value());
  ASSERT_TRUE(b.witness.has_value());
  EXPECT_EQ(a.witness->x_a, b.witness->x_a);
  EXPECT_EQ(a.witness->x_b, b.witness->x_b);
  EXPECT_EQ(a.witness->x_c, b.witness->x_c);
  EXPECT_EQ(a.witness->x_d, b.witness->x_d);
}

TEST(Classify, WorkedCorpusSeparatesMeanFromPercentile) {
  const Corpus corpus = table1_fixture();
  const ClassificationReport mean_report =
      classify_linearity(corpus, mean_based(corpus).set);
  EXPECT_EQ(mean_report.overall, Verdict::Linear);
  ASSERT_EQ(mean_report.cells.size(), 1u);
  ASSERT_TRUE(mean_report.cells[0].fitted.has_value());
  EXPECT_NEAR(mean_report.cells[0].fitted->k, 52.0 / 745.0, 1e-12);
  EXPECT_NEAR(mean_report.cells[0].fitted->b, 0.0, 1e-12);

  const ClassificationReport pct_report =
      classify_linearity(corpus, percentile_rank(corpus, PercentileMode::Inclusive));
  EXPECT_EQ(pct_report.overall, Verdict::Nonlinear);
  ASSERT_EQ(pct_report.cells.size(), 1u);
  EXPECT_TRUE(pct_report.cells[0].witness.has_value());
}

TEST(Classify, DeclaredClassDoesNotInfluenceTheVerdict) {
  // Scores that really are affine classify as linear even if the method
  // descriptor claims otherwise; the check looks at values, not labels.
  const Corpus corpus = table1_fixture();
  ScoreSet set = mean_based(corpus).set;
  set.method.name = "mislabeled";
  set.method.linearity = Linearity::Nonlinear;
  EXPECT_EQ(classify_linearity(corpus, set).overall, Verdict::Linear);
}

TEST(Classify, RepeatedCitationCountsAreAveragedBeforeFitting) {
  // Two papers share x=0 with different scores; the collapsed points
  // (0,1), (2,3), (4,5) are exactly affine.
  std::vector<Paper> papers = {
      {"p1", "F", 2020, "article", 0}, {"p2", "F", 2020, "article", 0},
      {"p3", "F", 2020, "article", 2}, {"p4", "F", 2020, "article", 4}};
  const Corpus corpus(std::move(papers), CellMode::Field);
  ScoreSet set;
  set.method = {"handmade", {}, Linearity::Unknown, false};
  set.scores = {{"p1", 0.0}, {"p2", 2.0}, {"p3", 3.0}, {"p4", 5.0}};
  const ClassificationReport report = classify_linearity(corpus, set);
  EXPECT_EQ(report.overall, Verdict::Linear);
  ASSERT_TRUE(report.cells[0].fitted.has_value());
  EXPECT_NEAR(report.cells[0].fitted->k, 1.0, 1e-12);
  EXPECT_NEAR(report.cells[0].fitted->b, 1.0, 1e-12);
}

TEST(Classify, SmallOrConstantCellsAreDegenerate) {
  std::vector<Paper> papers = {
      {"p1", "A", 2020, "article", 5}, {"p2", "A", 2020, "article", 5},
      {"p3", "A", 2020, "article", 5}, {"p4", "B", 2020, "article", 1},
      {"p5", "B", 2020, "article", 2}, {"p6", "B", 2020, "article", 3},
      {"p7", "B", 2020, "article", 4}};
  const Corpus corpus(std::move(papers), CellMode::Field);
  const ClassificationReport report = classify_linearity(corpus, mean_based(corpus).set);
  ASSERT_EQ(report.cells.size(), 2u);
  EXPECT_EQ(report.cells[0].verdict, Verdict::Degenerate);  // cell A: one distinct count
  EXPECT_EQ(report.cells[1].verdict, Verdict::Linear);
  EXPECT_EQ(report.overall, Verdict::Linear);
}

TEST(Classify, ConstantScoresOverVaryingCountsAreDegenerate) {
  const Corpus corpus = testutil::single_field_corpus({1, 2, 3, 4, 5});
  ScoreSet set;
  set.method = {"flat", {}, Linearity::Unknown, false};
  for (const Paper& p : corpus.papers()) set.scores[p.paper_id] = 7.0;
  const ClassificationReport report = classify_linearity(corpus, set);
  EXPECT_EQ(report.overall, Verdict::Degenerate);
  EXPECT_FALSE(report.cells[0].fitted.has_value());
}

TEST(Classify, MappingTableListsDistinctCountsAscending) {
  const Corpus corpus = table1_fixture();
  const ClassificationReport report = classify_linearity(corpus, mean_based(corpus).set);
  const auto& mapping = report.cells[0].mapping;
  ASSERT_EQ(mapping.size(), 22u);
  EXPECT_DOUBLE_EQ(mapping.front().raw, 0.0);
  EXPECT_DOUBLE_EQ(mapping.back().raw, 200.0);
  for (std::size_t i = 1; i < mapping.size(); ++i)
    EXPECT_LT(mapping[i - 1].raw, mapping[i].raw);
}

TEST(Classify, MissingScoreThrows) {
  const Corpus corpus = testutil::single_field_corpus({1, 2, 3, 4});
  ScoreSet set;
  set.method = {"partial", {}, Linearity::Unknown, false};
  set.scores = {{"c001", 1.0}, {"c002", 2.0}, {"c003", 3.0}};
  EXPECT_THROW(classify_linearity(corpus, set), DataError);
}

TEST(Guard, LinearScoresAddFreely) {
  const Corpus corpus = table1_fixture();
  const ScoreSet set = mean_based(corpus).set;
  // p48 has 42 citations and p17 has 1; p49 has 43 and p01 has 0.
  const AggregateResult lhs = guarded_aggregate(set, {"p48", "p17"}, Statistic::Sum);
  const AggregateResult rhs = guarded_aggregate(set, {"p49", "p01"}, Statistic::Sum);
  EXPECT_NEAR(lhs.value, rhs.value, 1e-12);
  EXPECT_NEAR(lhs.value, 43.0 * 52.0 / 745.0, 1e-12);
  EXPECT_FALSE(lhs.advisory);
  EXPECT_EQ(lhs.group_size, 2u);
}

TEST(Guard, NonlinearScoresAreRefused) {
  const Corpus corpus = table1_fixture();
  const ScoreSet set = percentile_rank(corpus, PercentileMode::Inclusive);
  try {
    guarded_aggregate(set, {"p48", "p17"}, Statistic::Sum);
    FAIL() << "expected a refusal";
  } catch (const GuardRefusal& refusal) {
    EXPECT_EQ(refusal.method(), "percentile");
    EXPECT_EQ(refusal.linearity_class(), "nonlinear");
    EXPECT_NE(std::string(refusal.what()).find("cannot be added or averaged"),
              std::string::npos);
  }
}

TEST(Guard, UnknownClassIsRefusedToo) {
  ScoreSet set;
  set.method = {"mystery", {}, Linearity::Unknown, false};
  set.scores = {{"a", 1.0}, {"b", 2.0}};
  EXPECT_THROW(guarded_aggregate(set, Statistic::Sum), GuardRefusal);
}

TEST(Guard, AdditiveOutsideCategoryPassesWithAdvisory) {
  const Corpus universe = testutil::single_field_corpus({1, 1, 1});
  EventsByPaper events;
  events["c001"].push_back(CitationEvent{2.0, 4, 0.5});
  events["c002"].push_back(CitationEvent{4.0, 8, 0.25});
  const ScoreSet set = sncs(events, 1, universe);
  const AggregateResult total = guarded_aggregate(set, Statistic::Sum);
  EXPECT_TRUE(total.advisory);
  EXPECT_DOUBLE_EQ(total.value, 1.0 / 2.0 + 1.0 / 4.0);
}

TEST(Guard, HybridPercentileVariantIsRefused) {
  const Corpus universe = testutil::single_field_corpus({1, 1, 1});
  EventsByPaper events;
  events["c001"].push_back(CitationEvent{2.0, 4, 0.5});
  const ScoreSet set = sncs3_percentile(events, universe);
  EXPECT_THROW(guarded_aggregate(set, Statistic::Sum), GuardRefusal);
}

TEST(Guard, GroupHandlingEdgeCases) {
  const Corpus corpus = table1_fixture();
  const ScoreSet set = mean_based(corpus).set;
  const AggregateResult empty_sum = guarded_aggregate(set, {}, Statistic::Sum);
  EXPECT_DOUBLE_EQ(empty_sum.value, 0.0);
  EXPECT_EQ(empty_sum.group_size, 0u);
  EXPECT_THROW(guarded_aggregate(set, {}, Statistic::Mean), DataError);
  EXPECT_THROW(guarded_aggregate(set, {"nobody"}, Statistic::Sum), DataError);

  const AggregateResult deduped =
      guarded_aggregate(set, {"p01", "p01", "p02"}, Statistic::Sum);
  EXPECT_EQ(deduped.group_size, 2u);
  const AggregateResult pair = guarded_aggregate(set, {"p01", "p02"}, Statistic::Sum);
  EXPECT_DOUBLE_EQ(deduped.value, pair.value);

  const AggregateResult mean = guarded_aggregate(set, {"p01", "p02"}, Statistic::Mean);
  EXPECT_DOUBLE_EQ(mean.value, pair.value / 2.0);
}

TEST(Guard, SumsCommuteWithTheCellMap) {
  // For y = kx + b, the group total must equal k * (sum of counts) + n * b.
  std::mt19937_64 rng(20240824);
  std::uniform_int_distribution<long long> cite(0, 300);
  std::vector<long long> a_values, b_values;
  for (int i = 0; i < 40; ++i) a_values.push_back(cite(rng));
  for (int i = 0; i < 25; ++i) b_values.push_back(cite(rng) + 1);
  const Corpus corpus = testutil::two_field_corpus(a_values, b_values);

  const LinearScores result = z_score(corpus);
  for (const auto& [cell, indices] : corpus.cells()) {
    const AffineMap& map = result.cell_maps.at(cell);
    std::vector<std::string> group;
    double raw_sum = 0.0;
    for (std::size_t idx : indices) {
      group.push_back(corpus.papers()[idx].paper_id);
      raw_sum += static_cast<double>(corpus.papers()[idx].citations);
    }
    const AggregateResult total = guarded_aggregate(result.set, group, Statistic::Sum);
    const double expected = map.k * raw_sum + map.b * static_cast<double>(group.size());
    EXPECT_NEAR(total.value, expected, 1e-9 * (1.0 + std::abs(expected)));
  }
}

TEST(Misuse, WorkedComparisonsComeOutAsStated) {
  const std::vector<MisuseComparison> demo = misuse_demo();
  ASSERT_EQ(demo.size(), 4u);

  EXPECT_EQ(demo[0].relation, "=");
  EXPECT_DOUBLE_EQ(demo[0].lhs, 43.0);
  EXPECT_DOUBLE_EQ(demo[0].rhs, 43.0);

  EXPECT_EQ(demo[1].relation, "!=");
  EXPECT_DOUBLE_EQ(csv::round2(demo[1].lhs), 125.0);
  EXPECT_DOUBLE_EQ(csv::round2(demo[1].rhs), 111.54);
  EXPECT_EQ(demo[1].lhs_terms, (std::vector<double>{92.31, 32.69}));
  EXPECT_EQ(demo[1].rhs_terms, (std::vector<double>{94.23, 17.31}));

  EXPECT_EQ(demo[2].relation, "<");
  EXPECT_DOUBLE_EQ(demo[2].lhs, 4.0);
  EXPECT_DOUBLE_EQ(demo[2].rhs, 200.0);

  EXPECT_EQ(demo[3].relation, ">");
  EXPECT_DOUBLE_EQ(csv::round2(demo[3].lhs), 130.76);
  EXPECT_DOUBLE_EQ(demo[3].rhs, 100.0);
  EXPECT_EQ(demo[3].lhs_terms, (std::vector<double>{32.69, 32.69, 32.69, 32.69}));
}

TEST(Misuse, RequiresTheWorkedCitationCounts) {
  // Without any 200-citation paper the comparisons cannot be formed.
  const Corpus corpus = testutil::single_field_corpus({0, 1, 42, 43});
  EXPECT_THROW(misuse_demo(corpus), DataError);
}
