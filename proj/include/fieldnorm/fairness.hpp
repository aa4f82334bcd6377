#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "fieldnorm/corpus.hpp"
#include "fieldnorm/errors.hpp"
#include "fieldnorm/score_set.hpp"

namespace fieldnorm {

struct FieldShare {
  std::string field_id;
  std::size_t n = 0;         // papers in the field
  double top_count = 0.0;    // papers attributed to the top set, fractional under ties
  double proportion = 0.0;   // 100 * top_count / n
};

struct FairnessReport {
  double z = 0.0;                  // requested top share in percent
  std::size_t top_set_size = 0;    // ceil(z * N / 100)
  std::vector<FieldShare> fields;  // ascending by field_id
  double max_abs_deviation = 0.0;  // max |proportion - z|
};

// A normalization treats fields fairly when each field places about z% of its
// own papers into the corpus-wide top z% by score. Papers tied at the cutoff
// score share the remaining top slots in proportion to each field's tie
// count, so the attributed counts always total exactly the top set size.
inline FairnessReport top_z_share(const ScoreSet& set, const Corpus& corpus, double z) {
  if (!(z > 0.0) || !(z < 100.0)) throw DataError("z must lie strictly between 0 and 100");
  const std::size_t N = corpus.size();
  std::vector<double> scores;
  scores.reserve(N);
  for (const Paper& p : corpus.papers()) scores.push_back(set.at(p.paper_id));

  FairnessReport report;
  report.z = z;
  report.top_set_size =
      static_cast<std::size_t>(std::ceil(z * static_cast<double>(N) / 100.0));

  std::vector<double> sorted = scores;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  const double cutoff = sorted[report.top_set_size - 1];

  std::map<std::string, std::size_t> field_n, field_above, field_tied;
  std::size_t total_above = 0, total_tied = 0;
  for (std::size_t i = 0; i < N; ++i) {
    const std::string& field = corpus.papers()[i].field_id;
    ++field_n[field];
    if (scores[i] > cutoff) {
      ++field_above[field];
      ++total_above;
    } else if (scores[i] == cutoff) {
      ++field_tied[field];
      ++total_tied;
    }
  }
  const double open_slots = static_cast<double>(report.top_set_size - total_above);
  for (const auto& [field, n] : field_n) {
    FieldShare share;
    share.field_id = field;
    share.n = n;
    share.top_count = static_cast<double>(field_above[field]);
    if (total_tied > 0 && field_tied.count(field))
      share.top_count += open_slots * static_cast<double>(field_tied[field]) /
                         static_cast<double>(total_tied);
    share.proportion = 100.0 * share.top_count / static_cast<double>(n);
    report.max_abs_deviation = std::max(report.max_abs_deviation, std::abs(share.proportion - z));
    report.fields.push_back(std::move(share));
  }
  return report;
}

struct CdfPoint {
  double score = 0.0;
  double cum_fraction = 0.0;
};

struct CoincidenceReport {
  std::map<std::string, std::vector<CdfPoint>> field_cdfs;
  double max_ks_distance = 0.0;  // largest pairwise sup distance between field CDFs
};

namespace detail {

inline double ks_distance(const std::vector<CdfPoint>& a, const std::vector<CdfPoint>& b) {
  double d = 0.0, fa = 0.0, fb = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    double x;
    if (j == b.size() || (i < a.size() && a[i].score < b[j].score))
      x = a[i].score;
    else
      x = b[j].score;
    if (i < a.size() && a[i].score == x) fa = a[i++].cum_fraction;
    if (j < b.size() && b[j].score == x) fb = b[j++].cum_fraction;
    d = std::max(d, std::abs(fa - fb));
  }
  return d;
}

}  // namespace detail

// A normalization succeeds at making fields comparable when the per-field
// score distributions collapse onto one curve. Reported as each field's
// empirical CDF plus the largest Kolmogorov-Smirnov distance over all field
// pairs: near zero means coincidence, near one means separation.
inline CoincidenceReport distribution_coincidence(const ScoreSet& set, const Corpus& corpus) {
  std::map<std::string, std::vector<double>> by_field;
  for (const Paper& p : corpus.papers()) by_field[p.field_id].push_back(set.at(p.paper_id));
  if (by_field.size() < 2)
    throw DataError("distribution comparison needs at least two fields, got " +
                    std::to_string(by_field.size()));

  CoincidenceReport report;
  for (auto& [field, values] : by_field) {
    std::sort(values.begin(), values.end());
    std::vector<CdfPoint>& cdf = report.field_cdfs[field];
    const double n = static_cast<double>(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i + 1 < values.size() && values[i + 1] == values[i]) continue;
      cdf.push_back(CdfPoint{values[i], static_cast<double>(i + 1) / n});
    }
  }
  for (auto a = report.field_cdfs.begin(); a != report.field_cdfs.end(); ++a)
    for (auto b = std::next(a); b != report.field_cdfs.end(); ++b)
      report.max_ks_distance =
          std::max(report.max_ks_distance, detail::ks_distance(a->second, b->second));
  return report;
}

}  // namespace fieldnorm
