#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fieldnorm/corpus.hpp"
#include "fieldnorm/csv.hpp"
#include "fieldnorm/errors.hpp"
#include "fieldnorm/score_set.hpp"

namespace fieldnorm {

// Scores from a method that maps citation counts through y = k*x + b within
// each cell. The per-cell coefficients are kept alongside the scores.
struct LinearScores {
  ScoreSet set;
  std::map<CellKey, AffineMap> cell_maps;
};

namespace detail {

struct OlsFit {
  double slope = 0.0;
  double intercept = 0.0;
  double sxx = 0.0;  // centered sum of squares of the regressor
};

inline OlsFit ols(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  OlsFit fit;
  fit.sxx = sxx;
  if (sxx > 0.0) {
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
  }
  return fit;
}

inline std::string provenance_of(const Corpus& corpus) {
  return corpus.name() + ";cell=" + std::string(to_string(corpus.cell_mode()));
}

// Count of reference values <= x (inclusive) or < x (exclusive).
inline std::size_t count_leq(const std::vector<double>& sorted, double x) {
  return static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), x) -
                                  sorted.begin());
}
inline std::size_t count_lt(const std::vector<double>& sorted, double x) {
  return static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), x) -
                                  sorted.begin());
}

}  // namespace detail

// y = x / m, the ratio to the cell's mean citation count.
inline LinearScores mean_based(const Corpus& corpus) {
  LinearScores out;
  out.set.method = {"mean", {}, Linearity::Linear, false};
  out.set.provenance = detail::provenance_of(corpus);
  for (const auto& [cell, members] : corpus.cells()) {
    const ReferenceSetStats stats = reference_stats(corpus, cell);
    if (!(stats.mean > 0.0))
      throw DataError("cell '" + corpus.cell_label(cell) + "' has zero mean citation count");
    out.cell_maps.emplace(cell, AffineMap{1.0 / stats.mean, 0.0});
    for (std::size_t i : members) {
      const Paper& p = corpus.papers()[i];
      out.set.scores.emplace(p.paper_id, static_cast<double>(p.citations) / stats.mean);
    }
  }
  return out;
}

// y = x / median.
inline LinearScores median_based(const Corpus& corpus) {
  LinearScores out;
  out.set.method = {"median", {}, Linearity::Linear, false};
  out.set.provenance = detail::provenance_of(corpus);
  for (const auto& [cell, members] : corpus.cells()) {
    const ReferenceSetStats stats = reference_stats(corpus, cell);
    if (!(stats.median > 0.0))
      throw DataError("cell '" + corpus.cell_label(cell) + "' has zero median citation count");
    out.cell_maps.emplace(cell, AffineMap{1.0 / stats.median, 0.0});
    for (std::size_t i : members) {
      const Paper& p = corpus.papers()[i];
      out.set.scores.emplace(p.paper_id, static_cast<double>(p.citations) / stats.median);
    }
  }
  return out;
}

// y = (x - m) / sd.
inline LinearScores z_score(const Corpus& corpus) {
  LinearScores out;
  out.set.method = {"zscore", {}, Linearity::Linear, false};
  out.set.provenance = detail::provenance_of(corpus);
  for (const auto& [cell, members] : corpus.cells()) {
    const ReferenceSetStats stats = reference_stats(corpus, cell);
    if (!(stats.sd > 0.0))
      throw DataError("cell '" + corpus.cell_label(cell) +
                      "' has constant citation counts; z-score is undefined");
    out.cell_maps.emplace(cell, AffineMap{1.0 / stats.sd, -stats.mean / stats.sd});
    for (std::size_t i : members) {
      const Paper& p = corpus.papers()[i];
      out.set.scores.emplace(p.paper_id,
                             (static_cast<double>(p.citations) - stats.mean) / stats.sd);
    }
  }
  return out;
}

// Cumulative percentile of x within its cell, on a 0-100 scale. The inclusive
// variant counts papers cited at most x times, the exclusive variant counts
// strictly fewer.
enum class PercentileMode { Inclusive, Exclusive };

inline std::string_view to_string(PercentileMode mode) {
  return mode == PercentileMode::Inclusive ? "cp-in" : "cp-ex";
}

inline ScoreSet percentile_rank(const Corpus& corpus,
                                PercentileMode mode = PercentileMode::Inclusive) {
  ScoreSet set;
  set.method = {"percentile", {{"mode", std::string(to_string(mode))}}, Linearity::Nonlinear,
                false};
  set.provenance = detail::provenance_of(corpus);
  for (const auto& [cell, members] : corpus.cells()) {
    const std::vector<double> sorted = detail::sorted_citations(corpus, members);
    const double n = static_cast<double>(sorted.size());
    for (std::size_t i : members) {
      const Paper& p = corpus.papers()[i];
      const double x = static_cast<double>(p.citations);
      const std::size_t count = mode == PercentileMode::Inclusive ? detail::count_leq(sorted, x)
                                                                  : detail::count_lt(sorted, x);
      set.scores.emplace(p.paper_id, 100.0 * static_cast<double>(count) / n);
    }
  }
  return set;
}

// y = (ln(x + 1) - mu_ln) / sigma_ln, a z-score on the log scale.
inline ScoreSet citation_z_score(const Corpus& corpus) {
  ScoreSet set;
  set.method = {"citation-zscore", {}, Linearity::Nonlinear, false};
  set.provenance = detail::provenance_of(corpus);
  for (const auto& [cell, members] : corpus.cells()) {
    const ReferenceSetStats stats = reference_stats(corpus, cell);
    if (!(stats.sigma_ln > 0.0))
      throw DataError("cell '" + corpus.cell_label(cell) +
                      "' has constant citation counts; citation z-score is undefined");
    for (std::size_t i : members) {
      const Paper& p = corpus.papers()[i];
      const double score =
          (std::log(static_cast<double>(p.citations) + 1.0) - stats.mu_ln) / stats.sigma_ln;
      set.scores.emplace(p.paper_id, score);
    }
  }
  return set;
}

// y = ln(x + 1) / mu_ln.
inline ScoreSet nlcs(const Corpus& corpus) {
  ScoreSet set;
  set.method = {"nlcs", {}, Linearity::Nonlinear, false};
  set.provenance = detail::provenance_of(corpus);
  for (const auto& [cell, members] : corpus.cells()) {
    const ReferenceSetStats stats = reference_stats(corpus, cell);
    if (!(stats.mu_ln > 0.0))
      throw DataError("cell '" + corpus.cell_label(cell) +
                      "' has only uncited papers; the log-mean score is undefined");
    for (std::size_t i : members) {
      const Paper& p = corpus.papers()[i];
      set.scores.emplace(p.paper_id,
                         std::log(static_cast<double>(p.citations) + 1.0) / stats.mu_ln);
    }
  }
  return set;
}

// One row of a cell's raw-to-normalized lookup table.
struct MappingPoint {
  double raw = 0.0;     // citation count in the cell
  double mapped = 0.0;  // value it is sent to
};

struct ReverseEngineeringResult {
  ScoreSet set;
  // Per cell, one entry per distinct raw citation value, ascending by raw.
  std::map<CellKey, std::vector<MappingPoint>> mapping;
};

// Replaces each citation count with the reference-distribution value at the
// same inclusive cumulative percentile: the smallest reference value whose
// cumulative fraction reaches the paper's fraction within its own cell.
// With no explicit reference the pooled corpus itself is used.
inline ReverseEngineeringResult reverse_engineering(const Corpus& corpus,
                                                    const Corpus* reference = nullptr) {
  const Corpus& ref = reference ? *reference : corpus;
  std::vector<double> ref_sorted;
  ref_sorted.reserve(ref.size());
  for (const Paper& p : ref.papers()) ref_sorted.push_back(static_cast<double>(p.citations));
  std::sort(ref_sorted.begin(), ref_sorted.end());
  const std::uint64_t ref_n = ref_sorted.size();

  ReverseEngineeringResult out;
  out.set.method = {"reverse-engineering",
                    {{"reference", reference ? ref.name() : std::string("pooled")}},
                    Linearity::Nonlinear,
                    false};
  out.set.provenance = detail::provenance_of(corpus);

  for (const auto& [cell, members] : corpus.cells()) {
    const std::vector<double> sorted = detail::sorted_citations(corpus, members);
    const std::uint64_t n = sorted.size();
    auto mapped_value = [&](double x) {
      const std::uint64_t count = detail::count_leq(sorted, x);
      // Smallest index j with (j+1)/ref_n >= count/n, in exact integer
      // arithmetic: j = ceil(count*ref_n/n) - 1.
      const std::uint64_t j = (count * ref_n + n - 1) / n - 1;
      return ref_sorted[j];
    };
    std::vector<MappingPoint>& table = out.mapping[cell];
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (i > 0 && sorted[i] == sorted[i - 1]) continue;
      table.push_back(MappingPoint{sorted[i], mapped_value(sorted[i])});
    }
    for (std::size_t i : members) {
      const Paper& p = corpus.papers()[i];
      out.set.scores.emplace(p.paper_id, mapped_value(static_cast<double>(p.citations)));
    }
  }
  return out;
}

// Least-squares fit of raw = lambda * mapped^alpha on the log-log scale.
// Points with a zero coordinate carry no log information and are excluded.
struct PowerLawFit {
  double lambda = 0.0;
  double alpha = 0.0;
  double max_rel_residual = 0.0;
  std::size_t excluded_points = 0;
};

inline PowerLawFit fit_power_law(const std::vector<MappingPoint>& points) {
  std::vector<double> log_mapped, log_raw;
  PowerLawFit fit;
  for (const MappingPoint& p : points) {
    if (p.raw <= 0.0 || p.mapped <= 0.0) {
      ++fit.excluded_points;
      continue;
    }
    log_mapped.push_back(std::log(p.mapped));
    log_raw.push_back(std::log(p.raw));
  }
  if (log_mapped.size() < 2)
    throw DataError("power-law fit needs at least two points with positive coordinates");
  const detail::OlsFit ols = detail::ols(log_mapped, log_raw);
  if (!(ols.sxx > 0.0))
    throw DataError("power-law fit is degenerate: all mapped values are equal");
  fit.alpha = ols.slope;
  fit.lambda = std::exp(ols.intercept);
  for (std::size_t i = 0; i < log_mapped.size(); ++i) {
    const double raw = std::exp(log_raw[i]);
    const double predicted = fit.lambda * std::pow(std::exp(log_mapped[i]), fit.alpha);
    fit.max_rel_residual = std::max(fit.max_rel_residual, std::abs(predicted - raw) / raw);
  }
  return fit;
}

// Evenly spaced quantile levels 0.5%, 1.0%, ..., 99.5%.
inline std::vector<double> default_quantile_grid() {
  std::vector<double> grid;
  grid.reserve(199);
  for (int i = 1; i <= 199; ++i) grid.push_back(static_cast<double>(i) / 200.0);
  return grid;
}

namespace detail {

// Smallest sorted value whose cumulative fraction reaches p. Levels are
// treated as exact up to an absolute 1e-9 slack so that p*n lands on the
// intended integer despite binary representation of the level.
inline double quantile(const std::vector<double>& sorted, double p) {
  const double n = static_cast<double>(sorted.size());
  double j = std::ceil(p * n - 1e-9) - 1.0;
  if (j < 0.0) j = 0.0;
  std::size_t idx = static_cast<std::size_t>(j);
  if (idx >= sorted.size()) idx = sorted.size() - 1;
  return sorted[idx];
}

}  // namespace detail

// Per cell, the affine map y = k*x + b whose sum of squared differences
// between mapped cell quantiles and reference quantiles is least. This is the
// ordinary least-squares regression of reference quantiles on cell quantiles
// over the level grid. With no explicit reference the pooled corpus is used.
inline LinearScores optimization_linear(const Corpus& corpus, const Corpus* reference = nullptr,
                                        const std::vector<double>& grid = default_quantile_grid()) {
  if (grid.size() < 2) throw DataError("quantile grid needs at least two levels");
  for (double p : grid)
    if (!(p > 0.0) || !(p <= 1.0)) throw DataError("quantile levels must lie in (0, 1]");

  const Corpus& ref = reference ? *reference : corpus;
  std::vector<double> ref_sorted;
  ref_sorted.reserve(ref.size());
  for (const Paper& p : ref.papers()) ref_sorted.push_back(static_cast<double>(p.citations));
  std::sort(ref_sorted.begin(), ref_sorted.end());

  std::vector<double> ref_q;
  ref_q.reserve(grid.size());
  for (double p : grid) ref_q.push_back(detail::quantile(ref_sorted, p));

  LinearScores out;
  out.set.method = {"optimization-linear",
                    {{"reference", reference ? ref.name() : std::string("pooled")},
                     {"levels", std::to_string(grid.size())}},
                    Linearity::Linear,
                    false};
  out.set.provenance = detail::provenance_of(corpus);

  for (const auto& [cell, members] : corpus.cells()) {
    const std::vector<double> sorted = detail::sorted_citations(corpus, members);
    std::vector<double> cell_q;
    cell_q.reserve(grid.size());
    for (double p : grid) cell_q.push_back(detail::quantile(sorted, p));
    const detail::OlsFit fit = detail::ols(cell_q, ref_q);
    if (!(fit.sxx > 0.0))
      throw DataError("cell '" + corpus.cell_label(cell) +
                      "' has a flat quantile profile; the scaling term is unidentifiable");
    if (fit.slope == 0.0)
      throw DataError("cell '" + corpus.cell_label(cell) +
                      "' fits a zero scaling term against the reference");
    out.cell_maps.emplace(cell, AffineMap{fit.slope, fit.intercept});
    for (std::size_t i : members) {
      const Paper& p = corpus.papers()[i];
      out.set.scores.emplace(p.paper_id,
                             fit.slope * static_cast<double>(p.citations) + fit.intercept);
    }
  }
  return out;
}

// Input row for the relative citation ratio: the paper's co-citation
// neighborhood rate (acr), its field citation rate (fcr), whether it belongs
// to the benchmark set that anchors the regression, and its citation count.
struct RcrPaperInput {
  std::string paper_id;
  double acr = 0.0;
  double fcr = 0.0;
  bool is_benchmark = false;
  std::int64_t citations = 0;
};

struct RcrFit {
  double beta = 0.0;   // slope of acr on fcr over the benchmark set
  double alpha = 0.0;  // intercept
};

struct RcrResult {
  RcrFit fit;
  ScoreSet set;
  std::map<std::string, double> expected_rate;  // paper_id -> beta*fcr + alpha
};

// Citations divided by the expected citation rate that the benchmark
// regression assigns to the paper's field citation rate.
inline RcrResult rcr(const std::vector<RcrPaperInput>& inputs) {
  if (inputs.empty()) throw DataError("no papers given");
  std::map<std::string, const RcrPaperInput*> by_id;
  std::vector<double> bench_fcr, bench_acr;
  for (const RcrPaperInput& in : inputs) {
    if (in.paper_id.empty()) throw DataError("paper with empty paper_id");
    if (!by_id.emplace(in.paper_id, &in).second)
      throw DataError("duplicate paper_id '" + in.paper_id + "'");
    if (!(in.fcr > 0.0))
      throw DataError("paper '" + in.paper_id + "' has nonpositive field citation rate");
    if (in.acr < 0.0)
      throw DataError("paper '" + in.paper_id + "' has negative neighborhood citation rate");
    if (in.citations < 0)
      throw DataError("paper '" + in.paper_id + "' has negative citations");
    if (in.is_benchmark) {
      bench_fcr.push_back(in.fcr);
      bench_acr.push_back(in.acr);
    }
  }
  if (bench_fcr.size() < 2)
    throw DataError("benchmark set needs at least two papers, got " +
                    std::to_string(bench_fcr.size()));
  const detail::OlsFit ols = detail::ols(bench_fcr, bench_acr);
  if (!(ols.sxx > 0.0))
    throw DataError("benchmark papers share a single field citation rate; slope is unidentifiable");

  RcrResult out;
  out.fit = {ols.slope, ols.intercept};
  out.set.method = {"rcr", {}, Linearity::Linear, false};
  out.set.provenance = "rcr-inputs";
  for (const auto& [id, in] : by_id) {
    const double expected = ols.slope * in->fcr + ols.intercept;
    if (!(expected > 0.0))
      throw DataError("paper '" + id + "' gets a nonpositive expected citation rate");
    out.expected_rate.emplace(id, expected);
    out.set.scores.emplace(id, static_cast<double>(in->citations) / expected);
  }
  return out;
}

inline constexpr std::string_view kRcrHeader = "paper_id,acr,fcr,is_benchmark,citations";

inline std::vector<RcrPaperInput> parse_rcr_inputs(std::istream& in) {
  std::vector<RcrPaperInput> rows;
  csv::for_each_row(in, kRcrHeader, [&](std::size_t line, const std::vector<std::string>& f) {
    RcrPaperInput row;
    row.paper_id = f[0];
    if (row.paper_id.empty()) throw ParseError(line, "empty paper_id");
    row.acr = csv::parse_double(f[1], line);
    row.fcr = csv::parse_double(f[2], line);
    if (f[3] == "0" || f[3] == "false")
      row.is_benchmark = false;
    else if (f[3] == "1" || f[3] == "true")
      row.is_benchmark = true;
    else
      throw ParseError(line, "is_benchmark must be 0, 1, true or false, got '" + f[3] + "'");
    row.citations = csv::parse_int(f[4], line);
    if (row.acr < 0.0) throw ParseError(line, "acr must be nonnegative");
    if (!(row.fcr > 0.0)) throw ParseError(line, "fcr must be positive");
    if (row.citations < 0) throw ParseError(line, "citations must be nonnegative");
    rows.push_back(std::move(row));
  });
  if (rows.empty()) throw ParseError(1, "no paper rows after the header");
  return rows;
}

// Whether exchange rates are taken per interval, as originally defined, or
// replaced by their average over a window of intervals.
enum class ExchangeRateMode { Original, Redefined };

inline std::string_view to_string(ExchangeRateMode mode) {
  return mode == ExchangeRateMode::Original ? "original" : "redefined";
}

struct ExchangeRateTable {
  int n_intervals = 0;
  int pi_m = 0;  // averaging window, set when the redefined rate was computed
  int pi_M = 0;
  std::vector<double> pooled_mean;                        // per interval, NaN where empty
  std::vector<int> undefined_pis;                         // intervals with no usable pooled mean
  std::map<std::string, std::vector<double>> field_mean;  // per field, NaN where empty
  std::map<std::string, std::vector<double>> original;    // e(f, pi), NaN where undefined
  std::map<std::string, double> redefined;                // e(f), empty in original-only tables
};

struct ExchangeRateResult {
  ExchangeRateTable table;
  ScoreSet set;
};

namespace detail {

// Equal-count interval index, 1-based: the paper of rank r out of N (counts
// ascending, ties broken by paper_id) falls in interval ceil(r*n/N).
inline int interval_of_rank(std::uint64_t r, std::uint64_t n, std::uint64_t N) {
  return static_cast<int>((r * n + N - 1) / N);
}

struct ExchangePartition {
  // paper index in corpus order -> 1-based interval of that paper in its
  // field partition, plus per-interval citation means.
  std::map<std::string, std::vector<double>> field_mean;
  std::vector<double> pooled_mean;
  std::map<std::size_t, int> paper_interval;
};

inline ExchangePartition exchange_partition(const Corpus& corpus, int n_intervals) {
  const std::uint64_t n = static_cast<std::uint64_t>(n_intervals);
  ExchangePartition out;

  std::map<std::string, std::vector<std::size_t>> by_field;
  for (std::size_t i = 0; i < corpus.papers().size(); ++i)
    by_field[corpus.papers()[i].field_id].push_back(i);

  auto rank_order = [&](std::vector<std::size_t>& idx) {
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      const Paper& pa = corpus.papers()[a];
      const Paper& pb = corpus.papers()[b];
      if (pa.citations != pb.citations) return pa.citations < pb.citations;
      return pa.paper_id < pb.paper_id;
    });
  };

  auto interval_means = [&](const std::vector<std::size_t>& ranked,
                            std::map<std::size_t, int>* paper_interval) {
    std::vector<double> sum(n, 0.0);
    std::vector<std::uint64_t> count(n, 0);
    const std::uint64_t N = ranked.size();
    for (std::uint64_t r = 1; r <= N; ++r) {
      const int pi = interval_of_rank(r, n, N);
      sum[pi - 1] += static_cast<double>(corpus.papers()[ranked[r - 1]].citations);
      ++count[pi - 1];
      if (paper_interval) (*paper_interval)[ranked[r - 1]] = pi;
    }
    std::vector<double> mean(n, std::numeric_limits<double>::quiet_NaN());
    for (std::uint64_t k = 0; k < n; ++k)
      if (count[k] > 0) mean[k] = sum[k] / static_cast<double>(count[k]);
    return mean;
  };

  for (auto& [field, idx] : by_field) {
    rank_order(idx);
    out.field_mean.emplace(field, interval_means(idx, &out.paper_interval));
  }
  std::vector<std::size_t> pooled(corpus.papers().size());
  for (std::size_t i = 0; i < pooled.size(); ++i) pooled[i] = i;
  rank_order(pooled);
  out.pooled_mean = interval_means(pooled, nullptr);
  return out;
}

}  // namespace detail

// Builds the per-interval exchange-rate table. Fields always partition by
// field_id here, whatever the corpus cell mode, because the rate compares a
// field's citation level against the pooled corpus. When a window [pi_m,
// pi_M] is given, each field's redefined rate is the arithmetic mean of its
// defined per-interval rates inside the window.
inline ExchangeRateTable exchange_rate_table(const Corpus& corpus, int n_intervals, int pi_m = 0,
                                             int pi_M = 0) {
  if (n_intervals < 1) throw DataError("n_intervals must be at least 1");
  const bool want_redefined = pi_m != 0 || pi_M != 0;
  if (want_redefined && (pi_m < 1 || pi_M < pi_m || pi_M > n_intervals))
    throw DataError("averaging window must satisfy 1 <= pi_m <= pi_M <= n_intervals, got [" +
                    std::to_string(pi_m) + ", " + std::to_string(pi_M) + "] with n_intervals=" +
                    std::to_string(n_intervals));

  const detail::ExchangePartition part = detail::exchange_partition(corpus, n_intervals);
  ExchangeRateTable table;
  table.n_intervals = n_intervals;
  table.pooled_mean = part.pooled_mean;
  table.field_mean = part.field_mean;
  for (int pi = 1; pi <= n_intervals; ++pi) {
    const double mu = part.pooled_mean[pi - 1];
    if (std::isnan(mu) || mu == 0.0) table.undefined_pis.push_back(pi);
  }
  for (const auto& [field, means] : part.field_mean) {
    std::vector<double>& e = table.original[field];
    e.assign(n_intervals, std::numeric_limits<double>::quiet_NaN());
    for (int pi = 1; pi <= n_intervals; ++pi) {
      const double mu = part.pooled_mean[pi - 1];
      const double mu_f = means[pi - 1];
      if (std::isnan(mu) || mu == 0.0 || std::isnan(mu_f)) continue;
      e[pi - 1] = mu_f / mu;
    }
  }
  if (want_redefined) {
    table.pi_m = pi_m;
    table.pi_M = pi_M;
    for (const auto& [field, e] : table.original) {
      double sum = 0.0;
      int defined = 0;
      for (int pi = pi_m; pi <= pi_M; ++pi) {
        if (std::isnan(e[pi - 1])) continue;
        sum += e[pi - 1];
        ++defined;
      }
      if (defined == 0)
        throw DataError("field '" + field + "' has no defined exchange rate in intervals [" +
                        std::to_string(pi_m) + ", " + std::to_string(pi_M) + "]");
      table.redefined.emplace(field, sum / static_cast<double>(defined));
    }
  }
  return table;
}

// y = x / e, where e is the exchange rate of the paper's interval (original)
// or of its field as a whole (redefined).
inline ExchangeRateResult exchange_rate(const Corpus& corpus, ExchangeRateMode mode,
                                        int n_intervals = 1000, int pi_m = 706, int pi_M = 998) {
  ExchangeRateResult out;
  if (mode == ExchangeRateMode::Redefined) {
    if (pi_m < 1 || pi_M < pi_m || pi_M > n_intervals)
      throw DataError("averaging window must satisfy 1 <= pi_m <= pi_M <= n_intervals, got [" +
                      std::to_string(pi_m) + ", " + std::to_string(pi_M) +
                      "] with n_intervals=" + std::to_string(n_intervals));
    out.table = exchange_rate_table(corpus, n_intervals, pi_m, pi_M);
    out.set.method = {"exchange-rate-redefined",
                      {{"n_intervals", std::to_string(n_intervals)},
                       {"pi_m", std::to_string(pi_m)},
                       {"pi_M", std::to_string(pi_M)}},
                      Linearity::Linear,
                      false};
    out.set.provenance = detail::provenance_of(corpus);
    for (const Paper& p : corpus.papers()) {
      const double e = out.table.redefined.at(p.field_id);
      if (e == 0.0)
        throw DataError("field '" + p.field_id + "' has a zero redefined exchange rate");
      out.set.scores.emplace(p.paper_id, static_cast<double>(p.citations) / e);
    }
    return out;
  }

  out.table = exchange_rate_table(corpus, n_intervals);
  out.set.method = {"exchange-rate-original",
                    {{"n_intervals", std::to_string(n_intervals)}},
                    Linearity::Nonlinear,
                    false};
  out.set.provenance = detail::provenance_of(corpus);
  const detail::ExchangePartition part = detail::exchange_partition(corpus, n_intervals);
  std::vector<std::string> missing;
  for (std::size_t i = 0; i < corpus.papers().size(); ++i) {
    const Paper& p = corpus.papers()[i];
    const int pi = part.paper_interval.at(i);
    const double e = out.table.original.at(p.field_id)[pi - 1];
    if (std::isnan(e)) {
      missing.push_back(p.paper_id + " (interval " + std::to_string(pi) + ")");
      continue;
    }
    if (e == 0.0)
      throw DataError("paper '" + p.paper_id + "' falls in interval " + std::to_string(pi) +
                      " of field '" + p.field_id + "', whose exchange rate is zero");
    out.set.scores.emplace(p.paper_id, static_cast<double>(p.citations) / e);
  }
  if (!missing.empty()) {
    std::string msg = std::to_string(missing.size()) +
                      " papers fall in intervals with an undefined exchange rate: " + missing[0];
    for (std::size_t i = 1; i < missing.size() && i < 3; ++i) msg += ", " + missing[i];
    if (missing.size() > 3) msg += ", ...";
    throw DataError(msg);
  }
  return out;
}

}  // namespace fieldnorm
