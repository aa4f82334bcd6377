#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fieldnorm/corpus.hpp"
#include "fieldnorm/csv.hpp"
#include "fieldnorm/errors.hpp"
#include "fieldnorm/normalizers.hpp"
#include "fieldnorm/score_set.hpp"

namespace fieldnorm {

// Two pairs of x values with the same spacing whose y gaps differ: concrete
// evidence that the transformation does not preserve equal distances. For a
// three-term arithmetic progression a, b, c the pairs are (a, b) and (b, c).
struct Witness {
  double x_a = 0.0, x_b = 0.0;  // first pair
  double x_c = 0.0, x_d = 0.0;  // second pair, x_b - x_a == x_d - x_c
  double gap_first = 0.0;       // y(x_b) - y(x_a)
  double gap_second = 0.0;      // y(x_d) - y(x_c)
};

struct EquidistanceVerdict {
  bool equidistant = false;
  // Constant y fits a line with k = 0, which is not an admissible
  // normalization, so it is flagged apart from the linear case.
  bool degenerate = false;
  std::optional<AffineMap> fitted;  // set when equidistant and not degenerate
  double max_residual = 0.0;        // against the least-squares line
  std::optional<Witness> witness;   // set when a violating configuration exists in the support
};

namespace detail {

// -0.0 and 0.0 hash differently but compare equal; fold them together.
inline double canonical(double v) { return v == 0.0 ? 0.0 : v; }

// Looks for the equal-spacing configuration with the largest gap difference.
// Three-term arithmetic progressions inside the support are preferred; when
// the support contains none (all pairwise differences distinct), two disjoint
// pairs with the same spacing are used instead. Returns nothing if neither
// exists, which happens for difference-distinct supports.
inline std::optional<Witness> find_witness(const std::vector<double>& xs,
                                           const std::vector<double>& ys, double threshold) {
  const std::size_t n = xs.size();
  std::unordered_map<double, std::size_t> position;
  position.reserve(n);
  for (std::size_t i = 0; i < n; ++i) position.emplace(canonical(xs[i]), i);

  std::optional<Witness> best;
  double best_violation = threshold;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      auto mid = position.find(canonical((xs[i] + xs[j]) / 2.0));
      if (mid == position.end()) continue;
      const std::size_t k = mid->second;
      if (xs[k] - xs[i] != xs[j] - xs[k]) continue;
      const double gap1 = ys[k] - ys[i];
      const double gap2 = ys[j] - ys[k];
      const double violation = std::abs(gap2 - gap1);
      if (violation > best_violation) {
        best_violation = violation;
        best = Witness{xs[i], xs[k], xs[k], xs[j], gap1, gap2};
      }
    }
  }
  if (best) return best;

  // Fallback: group every pair by its exact spacing and compare the extreme
  // y gaps within each group. Ordered keys keep the scan deterministic.
  struct Extremes {
    std::size_t lo_i = 0, lo_j = 0;
    std::size_t hi_i = 0, hi_j = 0;
    double lo_gap = 0.0, hi_gap = 0.0;
    bool single = true;
  };
  std::map<double, Extremes> by_spacing;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = xs[j] - xs[i];
      const double gap = ys[j] - ys[i];
      auto [it, inserted] = by_spacing.try_emplace(dx);
      Extremes& e = it->second;
      if (inserted) {
        e = {i, j, i, j, gap, gap, true};
        continue;
      }
      e.single = false;
      if (gap < e.lo_gap) {
        e.lo_gap = gap;
        e.lo_i = i;
        e.lo_j = j;
      }
      if (gap > e.hi_gap) {
        e.hi_gap = gap;
        e.hi_i = i;
        e.hi_j = j;
      }
    }
  }
  for (const auto& [dx, e] : by_spacing) {
    (void)dx;
    if (e.single) continue;
    const double violation = e.hi_gap - e.lo_gap;
    if (violation > best_violation) {
      best_violation = violation;
      best = Witness{xs[e.hi_i], xs[e.hi_j], xs[e.lo_i], xs[e.lo_j], e.hi_gap, e.lo_gap};
    }
  }
  return best;
}

}  // namespace detail

// Decides whether the map x -> y defined by the given pairs preserves equal
// x spacings, by fitting the least-squares line and examining the largest
// deviation from it relative to 1 + max|y|.
inline EquidistanceVerdict check_equidistance(std::vector<std::pair<double, double>> pairs,
                                              double tolerance = 1e-9) {
  if (!(tolerance > 0.0)) throw DataError("tolerance must be positive");
  std::sort(pairs.begin(), pairs.end());
  for (std::size_t i = 1; i < pairs.size(); ++i)
    if (pairs[i].first == pairs[i - 1].first)
      throw DataError("duplicate x value " + csv::format_double(pairs[i].first));
  if (pairs.size() < 3)
    throw DataError("equidistance needs at least 3 distinct x values, got " +
                    std::to_string(pairs.size()));

  std::vector<double> xs, ys;
  xs.reserve(pairs.size());
  ys.reserve(pairs.size());
  for (const auto& [x, y] : pairs) {
    xs.push_back(x);
    ys.push_back(y);
  }

  const detail::OlsFit fit = detail::ols(xs, ys);
  EquidistanceVerdict verdict;
  double max_abs_y = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    verdict.max_residual =
        std::max(verdict.max_residual, std::abs(ys[i] - (fit.slope * xs[i] + fit.intercept)));
    max_abs_y = std::max(max_abs_y, std::abs(ys[i]));
  }
  const double threshold = tolerance * (1.0 + max_abs_y);

  if (verdict.max_residual <= threshold) {
    verdict.equidistant = true;
    const auto [y_min, y_max] = std::minmax_element(ys.begin(), ys.end());
    if (fit.slope == 0.0 || *y_min == *y_max)
      verdict.degenerate = true;
    else
      verdict.fitted = AffineMap{fit.slope, fit.intercept};
    return verdict;
  }
  verdict.witness = detail::find_witness(xs, ys, threshold);
  return verdict;
}

enum class Verdict { Linear, Nonlinear, Degenerate };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Linear: return "linear";
    case Verdict::Nonlinear: return "nonlinear";
    case Verdict::Degenerate: return "degenerate";
  }
  return "degenerate";
}

struct CellClassification {
  CellKey cell;
  Verdict verdict = Verdict::Degenerate;
  std::optional<AffineMap> fitted;
  double max_residual = 0.0;
  std::optional<Witness> witness;
  std::vector<MappingPoint> mapping;  // distinct raw value -> score, ascending
};

struct ClassificationReport {
  std::string method;
  Verdict overall = Verdict::Degenerate;
  std::vector<CellClassification> cells;
};

// Classifies a method from its observed behaviour: per cell, the map from
// raw citation count to score either follows one line (linear), provably
// spreads equal gaps apart (nonlinear), or offers too little variation to
// tell (degenerate). Papers sharing a citation count get their scores
// averaged first, since a single x cannot map to two y values.
inline ClassificationReport classify_linearity(const Corpus& corpus, const ScoreSet& set,
                                               double tolerance = 1e-9) {
  ClassificationReport report;
  report.method = set.method.name;
  bool any_linear = false, any_nonlinear = false;
  for (const auto& [cell, members] : corpus.cells()) {
    std::map<double, std::pair<double, std::size_t>> sums;  // x -> (sum of scores, count)
    for (std::size_t i : members) {
      const Paper& p = corpus.papers()[i];
      auto& [sum, count] = sums[static_cast<double>(p.citations)];
      sum += set.at(p.paper_id);
      ++count;
    }
    CellClassification cc;
    cc.cell = cell;
    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(sums.size());
    for (const auto& [x, acc] : sums) {
      const double y = acc.first / static_cast<double>(acc.second);
      pairs.emplace_back(x, y);
      cc.mapping.push_back(MappingPoint{x, y});
    }
    if (pairs.size() < 3) {
      cc.verdict = Verdict::Degenerate;
    } else {
      const EquidistanceVerdict ev = check_equidistance(std::move(pairs), tolerance);
      cc.max_residual = ev.max_residual;
      cc.fitted = ev.fitted;
      cc.witness = ev.witness;
      if (!ev.equidistant)
        cc.verdict = Verdict::Nonlinear;
      else if (ev.degenerate)
        cc.verdict = Verdict::Degenerate;
      else
        cc.verdict = Verdict::Linear;
    }
    any_linear |= cc.verdict == Verdict::Linear;
    any_nonlinear |= cc.verdict == Verdict::Nonlinear;
    report.cells.push_back(std::move(cc));
  }
  report.overall = any_nonlinear ? Verdict::Nonlinear
                                 : (any_linear ? Verdict::Linear : Verdict::Degenerate);
  return report;
}

enum class Statistic { Sum, Mean };

inline std::string_view to_string(Statistic s) { return s == Statistic::Sum ? "sum" : "mean"; }

struct AggregateResult {
  Statistic statistic = Statistic::Sum;
  double value = 0.0;
  std::size_t group_size = 0;
  // True when the scores sit outside the linear/nonlinear split but are
  // per-event sums, so the total is defensible while per-paper comparisons
  // across fields remain uncalibrated.
  bool advisory = false;
};

// Adds or averages scores over a group of papers, refusing outright when the
// method's linearity class makes those operations meaningless.
inline AggregateResult guarded_aggregate(const ScoreSet& set, std::vector<std::string> group,
                                         Statistic statistic) {
  AggregateResult result;
  result.statistic = statistic;
  switch (set.method.linearity) {
    case Linearity::Linear:
      break;
    case Linearity::OutsideCategory:
      if (!set.method.additive)
        throw GuardRefusal(set.method.name, std::string(to_string(set.method.linearity)));
      result.advisory = true;
      break;
    case Linearity::Nonlinear:
    case Linearity::Unknown:
      throw GuardRefusal(set.method.name, std::string(to_string(set.method.linearity)));
  }
  std::sort(group.begin(), group.end());
  group.erase(std::unique(group.begin(), group.end()), group.end());
  double sum = 0.0;
  for (const std::string& id : group) sum += set.at(id);
  result.group_size = group.size();
  if (statistic == Statistic::Sum) {
    result.value = sum;
  } else {
    if (group.empty()) throw DataError("cannot average an empty group");
    result.value = sum / static_cast<double>(group.size());
  }
  return result;
}

// Convenience overload: aggregate every paper in the set.
inline AggregateResult guarded_aggregate(const ScoreSet& set, Statistic statistic) {
  std::vector<std::string> group;
  group.reserve(set.scores.size());
  for (const auto& [id, score] : set.scores) group.push_back(id);
  return guarded_aggregate(set, std::move(group), statistic);
}

// One side-by-side comparison from the worked misuse example: the same
// operation applied to raw counts and to their percentile scores.
struct MisuseComparison {
  std::string equation;
  std::vector<double> lhs_terms;
  double lhs = 0.0;
  std::vector<double> rhs_terms;
  double rhs = 0.0;
  std::string relation;  // "=", "!=", "<" or ">"
};

namespace detail {

inline MisuseComparison compare_sums(std::string equation, std::vector<double> lhs_terms,
                                     std::vector<double> rhs_terms, bool ordering) {
  MisuseComparison cmp;
  cmp.equation = std::move(equation);
  cmp.lhs_terms = std::move(lhs_terms);
  cmp.rhs_terms = std::move(rhs_terms);
  for (double t : cmp.lhs_terms) cmp.lhs += t;
  for (double t : cmp.rhs_terms) cmp.rhs += t;
  if (ordering)
    cmp.relation = cmp.lhs < cmp.rhs ? "<" : (cmp.lhs > cmp.rhs ? ">" : "=");
  else
    cmp.relation = cmp.lhs == cmp.rhs ? "=" : "!=";
  return cmp;
}

}  // namespace detail

// Demonstrates on the worked 52-paper example why percentile scores must not
// be added: two groups with equal raw totals get unequal score totals, and
// four once-cited papers together outscore the 100-point ceiling reached by
// the top paper. Scores enter the arithmetic at the two-decimal display
// precision used in the worked example.
inline std::vector<MisuseComparison> misuse_demo(const Corpus& corpus) {
  const ScoreSet percentile = percentile_rank(corpus, PercentileMode::Inclusive);
  auto rounded_score_of = [&](std::int64_t citations) {
    for (const Paper& p : corpus.papers())
      if (p.citations == citations) return csv::round2(percentile.at(p.paper_id));
    throw DataError("corpus has no paper with " + std::to_string(citations) +
                    " citations; the demonstration needs counts 0, 1, 42, 43 and 200");
  };
  const double p0 = rounded_score_of(0);
  const double p1 = rounded_score_of(1);
  const double p42 = rounded_score_of(42);
  const double p43 = rounded_score_of(43);
  const double p200 = rounded_score_of(200);

  std::vector<MisuseComparison> comparisons;
  comparisons.push_back(detail::compare_sums("42+1 vs 43+0, raw counts", {42.0, 1.0}, {43.0, 0.0},
                                             /*ordering=*/false));
  comparisons.push_back(detail::compare_sums("42+1 vs 43+0, percentile scores", {p42, p1},
                                             {p43, p0}, /*ordering=*/false));
  comparisons.push_back(detail::compare_sums("1+1+1+1 vs 200, raw counts", {1.0, 1.0, 1.0, 1.0},
                                             {200.0}, /*ordering=*/true));
  comparisons.push_back(detail::compare_sums("1+1+1+1 vs 200, percentile scores", {p1, p1, p1, p1},
                                             {p200}, /*ordering=*/true));
  return comparisons;
}

inline std::vector<MisuseComparison> misuse_demo() {
  const Corpus corpus = table1_fixture();
  return misuse_demo(corpus);
}

}  // namespace fieldnorm
