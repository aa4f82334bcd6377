#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "fieldnorm/linearity.hpp"
#include "fieldnorm/score_set.hpp"

using namespace fieldnorm;

namespace {

ScoreSet sample_set() {
  ScoreSet set;
  set.method = {"mean", {}, Linearity::Linear, false};
  set.scores = {{"p1", 0.1},
                {"p2", 1.0 / 3.0},
                {"p3", 745.0 / 52.0},
                {"p4", 1e-17},
                {"p5", 123456789.123456},
                {"p6", 0.0}};
  return set;
}

}  // namespace

TEST(ScoresCsv, RoundTripPreservesEveryBit) {
  const ScoreSet original = sample_set();
  std::stringstream buffer;
  write_scores_csv(buffer, original);
  const ScoreSet restored = read_scores_csv(buffer);
  EXPECT_EQ(restored.method.name, original.method.name);
  EXPECT_EQ(restored.method.linearity, original.method.linearity);
  ASSERT_EQ(restored.scores.size(), original.scores.size());
  for (const auto& [id, score] : original.scores) EXPECT_EQ(restored.at(id), score);
}

TEST(ScoresCsv, RandomValuesSurviveTheRoundTrip) {
  std::mt19937_64 rng(20240829);
  std::uniform_real_distribution<double> mantissa(-1.0, 1.0);
  std::uniform_int_distribution<int> exponent(-300, 300);
  ScoreSet set;
  set.method = {"zscore", {}, Linearity::Linear, false};
  for (int i = 0; i < 500; ++i)
    set.scores["p" + std::to_string(i)] = std::ldexp(mantissa(rng), exponent(rng));
  std::stringstream buffer;
  write_scores_csv(buffer, set);
  const ScoreSet restored = read_scores_csv(buffer);
  for (const auto& [id, score] : set.scores) EXPECT_EQ(restored.at(id), score);
}

TEST(ScoresCsv, WritesShortestDecimalForms) {
  ScoreSet set;
  set.method = {"mean", {}, Linearity::Linear, false};
  set.scores = {{"p1", 0.1}, {"p2", 2.0}};
  std::stringstream buffer;
  write_scores_csv(buffer, set);
  const std::string text = buffer.str();
  EXPECT_NE(text.find("p1,mean,0.1,linear"), std::string::npos) << text;
  EXPECT_NE(text.find("p2,mean,2,linear"), std::string::npos) << text;
}

TEST(ScoresCsv, RejectsMixedMethods) {
  std::stringstream in(
      "paper_id,method,score,linearity_class\n"
      "p1,mean,1.0,linear\n"
      "p2,median,2.0,linear\n");
  EXPECT_THROW(read_scores_csv(in), ParseError);
}

TEST(ScoresCsv, RejectsInconsistentLinearity) {
  std::stringstream in(
      "paper_id,method,score,linearity_class\n"
      "p1,mean,1.0,linear\n"
      "p2,mean,2.0,nonlinear\n");
  EXPECT_THROW(read_scores_csv(in), ParseError);
}

TEST(ScoresCsv, RejectsDuplicatesAndEmptyIds) {
  std::stringstream dup(
      "paper_id,method,score,linearity_class\n"
      "p1,mean,1.0,linear\n"
      "p1,mean,2.0,linear\n");
  EXPECT_THROW(read_scores_csv(dup), ParseError);

  std::stringstream blank(
      "paper_id,method,score,linearity_class\n"
      ",mean,1.0,linear\n");
  EXPECT_THROW(read_scores_csv(blank), ParseError);
}

TEST(ScoresCsv, RejectsHeaderOnlyAndMissingHeader) {
  std::stringstream empty("paper_id,method,score,linearity_class\n");
  EXPECT_THROW(read_scores_csv(empty), ParseError);
  std::stringstream wrong("id,score\np1,1.0\n");
  EXPECT_THROW(read_scores_csv(wrong), ParseError);
}

TEST(ScoresCsv, UnrecognizedLinearityFailsClosed) {
  std::stringstream in(
      "paper_id,method,score,linearity_class\n"
      "p1,exotic,1.0,super-linear\n"
      "p2,exotic,2.0,super-linear\n");
  const ScoreSet set = read_scores_csv(in);
  EXPECT_EQ(set.method.linearity, Linearity::Unknown);
  EXPECT_THROW(guarded_aggregate(set, Statistic::Sum), GuardRefusal);
}

TEST(ScoresCsv, CitingSideNamesRestoreTheAdditiveFlag) {
  ScoreSet set;
  set.method = {"sncs2", {}, Linearity::OutsideCategory, true};
  set.scores = {{"p1", 0.25}, {"p2", 1.5}};
  std::stringstream buffer;
  write_scores_csv(buffer, set);
  const ScoreSet restored = read_scores_csv(buffer);
  EXPECT_EQ(restored.method.linearity, Linearity::OutsideCategory);
  EXPECT_TRUE(restored.method.additive);
  EXPECT_TRUE(guarded_aggregate(restored, Statistic::Sum).advisory);
}
