#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "fieldnorm/corpus.hpp"
#include "fieldnorm/errors.hpp"
#include "fieldnorm/normalizers.hpp"
#include "fieldnorm/score_set.hpp"

namespace fieldnorm {

// Source-normalized citing-side score: each citing event contributes a weight
// built from the citing paper's reference list rather than from the cited
// paper's citation count.
//
//   variant 1: 1 / a_i          (mean reference-list length in the citing field)
//   variant 2: 1 / r_i          (the citing paper's own reference count)
//   variant 3: 1 / (p_i * r_i)  (reference count discounted by its active share)
//
// Papers with no events score zero. Event order within a paper is preserved,
// so the floating-point sum is reproducible from the event stream.
inline ScoreSet sncs(const EventsByPaper& events, int variant, const Corpus& universe) {
  if (variant < 1 || variant > 3)
    throw DataError("sncs variant must be 1, 2 or 3, got " + std::to_string(variant));
  for (const auto& [focal_id, unused] : events) {
    (void)unused;
    if (!universe.find(focal_id))
      throw DataError("citation events reference unknown paper '" + focal_id + "'");
  }
  ScoreSet set;
  set.method = {"sncs" + std::to_string(variant), {}, Linearity::OutsideCategory, true};
  set.provenance = detail::provenance_of(universe);
  for (const Paper& p : universe.papers()) {
    double score = 0.0;
    auto it = events.find(p.paper_id);
    if (it != events.end()) {
      for (const CitationEvent& e : it->second) {
        switch (variant) {
          case 1: score += 1.0 / e.mean_refs; break;
          case 2: score += 1.0 / static_cast<double>(e.citing_refs); break;
          case 3: score += 1.0 / (e.active_share * static_cast<double>(e.citing_refs)); break;
        }
      }
    }
    set.scores.emplace(p.paper_id, score);
  }
  return set;
}

// Inclusive cumulative percentile of the variant-3 score over the whole
// universe. The percentile step discards additivity, so the result is marked
// non-additive even though it stays outside the cited-side categories.
inline ScoreSet sncs3_percentile(const EventsByPaper& events, const Corpus& universe) {
  const ScoreSet base = sncs(events, 3, universe);
  std::vector<double> sorted;
  sorted.reserve(base.scores.size());
  for (const auto& [id, score] : base.scores) sorted.push_back(score);
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());

  ScoreSet set;
  set.method = {"sncs3-percentile", {}, Linearity::OutsideCategory, false};
  set.provenance = base.provenance;
  for (const auto& [id, score] : base.scores) {
    const std::size_t count = detail::count_leq(sorted, score);
    set.scores.emplace(id, 100.0 * static_cast<double>(count) / n);
  }
  return set;
}

}  // namespace fieldnorm
