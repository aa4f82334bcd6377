#pragma once

#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>

#include "fieldnorm/csv.hpp"
#include "fieldnorm/errors.hpp"

namespace fieldnorm {

// Declared behaviour of a normalization method under equal citation gaps.
// Linear methods preserve gap ratios, nonlinear ones distort them, and
// outside-category methods never see the cited paper's own citation count.
enum class Linearity { Linear, Nonlinear, OutsideCategory, Unknown };

inline std::string_view to_string(Linearity c) {
  switch (c) {
    case Linearity::Linear: return "linear";
    case Linearity::Nonlinear: return "nonlinear";
    case Linearity::OutsideCategory: return "outside-category";
    case Linearity::Unknown: return "unknown";
  }
  return "unknown";
}

// Fail closed: an unrecognized token reads as Unknown, which the aggregation
// guard treats the same as nonlinear.
inline Linearity linearity_from_string(std::string_view token) {
  if (token == "linear") return Linearity::Linear;
  if (token == "nonlinear") return Linearity::Nonlinear;
  if (token == "outside-category") return Linearity::OutsideCategory;
  return Linearity::Unknown;
}

// y = k*x + b with k != 0.
struct AffineMap {
  double k = 1.0;
  double b = 0.0;

  double operator()(double x) const { return k * x + b; }
};

struct MethodDescriptor {
  std::string name;
  std::map<std::string, std::string> params;
  Linearity linearity = Linearity::Unknown;
  // True for per-event sums (the plain citing-side scores), whose totals over
  // a group of papers remain meaningful even though the scores fall outside
  // the cited-side linear/nonlinear split.
  bool additive = false;
};

struct ScoreSet {
  MethodDescriptor method;
  std::map<std::string, double> scores;  // paper_id -> score
  std::string provenance;                // corpus name and cell mode, free-form

  double at(const std::string& paper_id) const {
    auto it = scores.find(paper_id);
    if (it == scores.end())
      throw DataError("no '" + method.name + "' score for paper '" + paper_id + "'");
    return it->second;
  }
};

inline constexpr std::string_view kScoresHeader = "paper_id,method,score,linearity_class";

inline void write_scores_csv(std::ostream& out, const ScoreSet& set) {
  out << kScoresHeader << '\n';
  for (const auto& [id, score] : set.scores)
    out << id << ',' << set.method.name << ',' << csv::format_double(score) << ','
        << to_string(set.method.linearity) << '\n';
}

inline ScoreSet read_scores_csv(std::istream& in) {
  ScoreSet set;
  bool first = true;
  csv::for_each_row(in, kScoresHeader, [&](std::size_t line, const std::vector<std::string>& f) {
    if (f[0].empty()) throw ParseError(line, "empty paper_id");
    if (first) {
      set.method.name = f[1];
      set.method.linearity = linearity_from_string(f[3]);
      set.method.additive =
          f[1] == "sncs1" || f[1] == "sncs2" || f[1] == "sncs3";
      first = false;
    } else if (f[1] != set.method.name) {
      throw ParseError(line, "mixed methods in one score file: '" + set.method.name + "' vs '" +
                                 f[1] + "'");
    } else if (linearity_from_string(f[3]) != set.method.linearity) {
      throw ParseError(line, "inconsistent linearity_class for method '" + f[1] + "'");
    }
    auto [it, inserted] = set.scores.emplace(f[0], csv::parse_double(f[2], line));
    (void)it;
    if (!inserted) throw ParseError(line, "duplicate paper_id '" + f[0] + "'");
  });
  if (set.scores.empty()) throw ParseError(1, "no score rows after the header");
  return set;
}

}  // namespace fieldnorm
