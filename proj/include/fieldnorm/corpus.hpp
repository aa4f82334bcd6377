#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fieldnorm/csv.hpp"
#include "fieldnorm/errors.hpp"

namespace fieldnorm {

// Granularity at which papers are grouped into reference sets.
enum class CellMode { Field, FieldYear, FieldYearDoctype };

inline std::string_view to_string(CellMode mode) {
  switch (mode) {
    case CellMode::Field: return "field";
    case CellMode::FieldYear: return "field-year";
    case CellMode::FieldYearDoctype: return "field-year-doctype";
  }
  return "field";
}

inline CellMode cell_mode_from_string(std::string_view token) {
  if (token == "field") return CellMode::Field;
  if (token == "field-year") return CellMode::FieldYear;
  if (token == "field-year-doctype") return CellMode::FieldYearDoctype;
  throw DataError("unknown cell mode '" + std::string(token) +
                  "', expected field, field-year or field-year-doctype");
}

struct Paper {
  std::string paper_id;
  std::string field_id;
  int pub_year = 0;
  std::string doc_type;
  std::int64_t citations = 0;

  friend bool operator==(const Paper&, const Paper&) = default;
};

// Identifies one reference set. Components that the corpus cell mode does not
// use stay at their defaults, so keys compare consistently within one corpus.
struct CellKey {
  std::string field_id;
  int pub_year = 0;
  std::string doc_type;

  friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

// Descriptive statistics of one reference set, computed over its citation
// counts sorted ascending so results do not depend on input row order.
struct ReferenceSetStats {
  std::size_t n = 0;
  double mean = 0.0;
  double median = 0.0;
  double sd = 0.0;        // population standard deviation
  double mu_ln = 0.0;     // mean of ln(x + 1)
  double sigma_ln = 0.0;  // population sd of ln(x + 1)
};

class Corpus {
public:
  Corpus(std::vector<Paper> papers, CellMode mode, std::string name = "corpus")
      : papers_(std::move(papers)), mode_(mode), name_(std::move(name)) {
    if (papers_.empty()) throw DataError("corpus '" + name_ + "' has no papers");
    std::sort(papers_.begin(), papers_.end(),
              [](const Paper& a, const Paper& b) { return a.paper_id < b.paper_id; });
    for (std::size_t i = 0; i < papers_.size(); ++i) {
      const Paper& p = papers_[i];
      if (p.paper_id.empty()) throw DataError("paper with empty paper_id");
      for (const std::string* s : {&p.paper_id, &p.field_id, &p.doc_type})
        if (s->find_first_of(",\r\n") != std::string::npos)
          throw DataError("paper '" + p.paper_id + "' has a comma or line break in an identifier");
      if (p.citations < 0)
        throw DataError("paper '" + p.paper_id + "' has negative citations");
      if (i > 0 && p.paper_id == papers_[i - 1].paper_id)
        throw DataError("duplicate paper_id '" + p.paper_id + "'");
      index_.emplace(p.paper_id, i);
      cells_[cell_of(p)].push_back(i);
    }
  }

  const std::vector<Paper>& papers() const { return papers_; }
  CellMode cell_mode() const { return mode_; }
  const std::string& name() const { return name_; }
  std::size_t size() const { return papers_.size(); }

  // Cell -> indices into papers(), ascending by paper_id.
  const std::map<CellKey, std::vector<std::size_t>>& cells() const { return cells_; }

  CellKey cell_of(const Paper& p) const {
    CellKey key;
    key.field_id = p.field_id;
    if (mode_ != CellMode::Field) key.pub_year = p.pub_year;
    if (mode_ == CellMode::FieldYearDoctype) key.doc_type = p.doc_type;
    return key;
  }

  std::string cell_label(const CellKey& key) const {
    std::string label = key.field_id;
    if (mode_ != CellMode::Field) label += ":" + std::to_string(key.pub_year);
    if (mode_ == CellMode::FieldYearDoctype) label += ":" + key.doc_type;
    return label;
  }

  const Paper* find(const std::string& paper_id) const {
    auto it = index_.find(paper_id);
    return it == index_.end() ? nullptr : &papers_[it->second];
  }

  const Paper& at(const std::string& paper_id) const {
    const Paper* p = find(paper_id);
    if (!p) throw DataError("unknown paper '" + paper_id + "'");
    return *p;
  }

  friend bool operator==(const Corpus& a, const Corpus& b) {
    return a.mode_ == b.mode_ && a.papers_ == b.papers_;
  }

private:
  std::vector<Paper> papers_;
  CellMode mode_;
  std::string name_;
  std::map<std::string, std::size_t> index_;
  std::map<CellKey, std::vector<std::size_t>> cells_;
};

namespace detail {

inline std::vector<double> sorted_citations(const Corpus& corpus,
                                            const std::vector<std::size_t>& members) {
  std::vector<double> values;
  values.reserve(members.size());
  for (std::size_t i : members) values.push_back(static_cast<double>(corpus.papers()[i].citations));
  std::sort(values.begin(), values.end());
  return values;
}

// Population mean and sd in two passes over already-sorted values.
inline std::pair<double, double> mean_sd(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size()))};
}

inline double median_of_sorted(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

}  // namespace detail

inline ReferenceSetStats reference_stats(const Corpus& corpus, const CellKey& cell) {
  auto it = corpus.cells().find(cell);
  if (it == corpus.cells().end())
    throw DataError("unknown cell '" + corpus.cell_label(cell) + "'");
  const std::vector<double> values = detail::sorted_citations(corpus, it->second);

  ReferenceSetStats stats;
  stats.n = values.size();
  auto [mean, sd] = detail::mean_sd(values);
  stats.mean = mean;
  stats.sd = sd;
  stats.median = detail::median_of_sorted(values);

  std::vector<double> logs;
  logs.reserve(values.size());
  for (double v : values) logs.push_back(std::log(v + 1.0));
  auto [mu_ln, sigma_ln] = detail::mean_sd(logs);
  stats.mu_ln = mu_ln;
  stats.sigma_ln = sigma_ln;
  return stats;
}

inline constexpr std::string_view kPapersHeader = "paper_id,field_id,pub_year,doc_type,citations";

inline Corpus parse_corpus(std::istream& in, CellMode mode, std::string name = "stream") {
  std::vector<Paper> papers;
  std::map<std::string, std::size_t> seen;  // paper_id -> line, for error messages
  csv::for_each_row(in, kPapersHeader, [&](std::size_t line, const std::vector<std::string>& f) {
    Paper p;
    p.paper_id = f[0];
    p.field_id = f[1];
    p.pub_year = static_cast<int>(csv::parse_int(f[2], line));
    p.doc_type = f[3];
    p.citations = csv::parse_int(f[4], line);
    if (p.paper_id.empty()) throw ParseError(line, "empty paper_id");
    if (p.citations < 0)
      throw ParseError(line, "paper '" + p.paper_id + "' has negative citations");
    auto [it, inserted] = seen.emplace(p.paper_id, line);
    if (!inserted)
      throw ParseError(line, "duplicate paper_id '" + p.paper_id + "', first seen on line " +
                                 std::to_string(it->second));
    papers.push_back(std::move(p));
  });
  if (papers.empty()) throw ParseError(1, "no paper rows after the header");
  return Corpus(std::move(papers), mode, std::move(name));
}

inline void write_corpus_csv(std::ostream& out, const Corpus& corpus) {
  out << kPapersHeader << '\n';
  for (const Paper& p : corpus.papers())
    out << p.paper_id << ',' << p.field_id << ',' << p.pub_year << ',' << p.doc_type << ','
        << p.citations << '\n';
}

// One citing event for a focal paper: the citing paper's reference-list
// statistics. mean_refs is a_i, citing_refs is r_i, active_share is p_i.
struct CitationEvent {
  double mean_refs = 0.0;
  std::int64_t citing_refs = 0;
  double active_share = 0.0;
};

using EventsByPaper = std::map<std::string, std::vector<CitationEvent>>;

inline constexpr std::string_view kEventsHeader = "focal_id,a_i,r_i,p_i";

// An empty stream is a valid event list: papers without events score zero.
inline EventsByPaper parse_citation_events(std::istream& in) {
  EventsByPaper events;
  if (in.peek() == std::char_traits<char>::eof()) return events;
  csv::for_each_row(in, kEventsHeader, [&](std::size_t line, const std::vector<std::string>& f) {
    if (f[0].empty()) throw ParseError(line, "empty focal_id");
    CitationEvent e;
    e.mean_refs = csv::parse_double(f[1], line);
    e.citing_refs = csv::parse_int(f[2], line);
    e.active_share = csv::parse_double(f[3], line);
    if (!(e.mean_refs > 0.0)) throw ParseError(line, "a_i must be positive");
    if (e.citing_refs < 1) throw ParseError(line, "r_i must be at least 1");
    if (!(e.active_share > 0.0) || e.active_share > 1.0)
      throw ParseError(line, "p_i must be in (0, 1]");
    events[f[0]].push_back(e);
  });
  return events;
}

// The worked single-field example used throughout the documentation and
// tests: 52 papers whose citation counts range from 0 to 200.
inline Corpus table1_fixture() {
  static constexpr std::pair<std::int64_t, int> rows[] = {
      {0, 9}, {1, 8}, {2, 6}, {3, 4},  {4, 4},  {5, 2},  {6, 2},  {7, 1},
      {8, 1}, {9, 1}, {10, 2}, {12, 1}, {15, 1}, {16, 1}, {20, 2}, {25, 1},
      {38, 1}, {42, 1}, {43, 1}, {80, 1}, {120, 1}, {200, 1}};
  std::vector<Paper> papers;
  int serial = 0;
  for (auto [citations, count] : rows) {
    for (int i = 0; i < count; ++i) {
      ++serial;
      char id[8];
      std::snprintf(id, sizeof(id), "p%02d", serial);
      papers.push_back(Paper{id, "F", 2020, "article", citations});
    }
  }
  return Corpus(std::move(papers), CellMode::Field, "table1");
}

}  // namespace fieldnorm
