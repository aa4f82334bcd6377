// Command-line front end: normalize, classify, aggregate, fairness,
// demo-misuse, generate, table1. Exit codes: 0 success, 2 refused
// aggregation, 64 usage error, 65 unreadable or invalid data.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fieldnorm/fieldnorm.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace fieldnorm;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string input;
  std::string events;
  std::string output = ".";
  std::string method;
  std::string mode;
  std::string cell = "field";
  std::string group;
  std::string spec;
  std::string stat = "sum";
  double tolerance = 1e-9;
  double z = 10.0;
  int n_intervals = 1000;
  int pi_m = 706;
  int pi_M = 998;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool acknowledge = false;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return in;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  return out;
}

fs::path output_file(const Options& opt, const char* name) {
  fs::create_directories(opt.output);
  return fs::path(opt.output) / name;
}

Corpus load_corpus(const Options& opt) {
  std::ifstream in = open_input(opt.input);
  return parse_corpus(in, cell_mode_from_string(opt.cell),
                      fs::path(opt.input).filename().string());
}

EventsByPaper load_events(const Options& opt) {
  if (opt.events.empty())
    throw UsageError("--events is required for method '" + opt.method + "'");
  std::ifstream in = open_input(opt.events);
  return parse_citation_events(in);
}

ScoreSet raw_scores(const Corpus& corpus) {
  ScoreSet set;
  set.method = {"raw", {}, Linearity::Linear, false};
  set.provenance = corpus.name();
  for (const Paper& p : corpus.papers())
    set.scores.emplace(p.paper_id, static_cast<double>(p.citations));
  return set;
}

bool is_citing_side(const std::string& method) {
  return method == "sncs1" || method == "sncs2" || method == "sncs3" ||
         method == "sncs3-percentile";
}

// Methods whose scores are a per-cell function of the citation count, so
// both normalize and classify can run them from a papers file alone.
ScoreSet cited_side_scores(const Options& opt, const Corpus& corpus) {
  const std::string& m = opt.method;
  if (m == "raw") return raw_scores(corpus);
  if (m == "mean") return mean_based(corpus).set;
  if (m == "median") return median_based(corpus).set;
  if (m == "zscore") return z_score(corpus).set;
  if (m == "citation-zscore") return citation_z_score(corpus);
  if (m == "nlcs") return nlcs(corpus);
  if (m == "reverse-engineering") return reverse_engineering(corpus).set;
  if (m == "optimization-linear") return optimization_linear(corpus).set;
  if (m == "percentile") {
    if (opt.mode.empty() || opt.mode == "cp-in")
      return percentile_rank(corpus, PercentileMode::Inclusive);
    if (opt.mode == "cp-ex") return percentile_rank(corpus, PercentileMode::Exclusive);
    throw UsageError("--mode for percentile must be cp-in or cp-ex, got '" + opt.mode + "'");
  }
  if (m == "exchange-rate" || m == "exchange-rate-original" || m == "exchange-rate-redefined") {
    ExchangeRateMode mode = ExchangeRateMode::Redefined;
    if (m == "exchange-rate-original")
      mode = ExchangeRateMode::Original;
    else if (m == "exchange-rate" && !opt.mode.empty()) {
      if (opt.mode == "original")
        mode = ExchangeRateMode::Original;
      else if (opt.mode != "redefined")
        throw UsageError("--mode for exchange-rate must be original or redefined, got '" +
                         opt.mode + "'");
    }
    return exchange_rate(corpus, mode, opt.n_intervals, opt.pi_m, opt.pi_M).set;
  }
  throw UsageError("unknown method '" + m + "'");
}

ScoreSet normalize_scores(const Options& opt, const Corpus& corpus) {
  if (opt.method == "sncs1") return sncs(load_events(opt), 1, corpus);
  if (opt.method == "sncs2") return sncs(load_events(opt), 2, corpus);
  if (opt.method == "sncs3") return sncs(load_events(opt), 3, corpus);
  if (opt.method == "sncs3-percentile") return sncs3_percentile(load_events(opt), corpus);
  return cited_side_scores(opt, corpus);
}

int cmd_normalize(const Options& opt) {
  ScoreSet set;
  if (opt.method == "rcr") {
    std::ifstream in = open_input(opt.input);
    set = rcr(parse_rcr_inputs(in)).set;
  } else {
    const Corpus corpus = load_corpus(opt);
    set = normalize_scores(opt, corpus);
  }
  const fs::path path = output_file(opt, "scores.csv");
  std::ofstream out = open_output(path);
  write_scores_csv(out, set);
  std::cout << "method=" << set.method.name << " linearity=" << to_string(set.method.linearity)
            << " papers=" << set.scores.size() << " wrote " << path.string() << "\n";
  return 0;
}

int cmd_classify(const Options& opt) {
  if (opt.method == "rcr" || is_citing_side(opt.method))
    throw UsageError("classify needs a method computable from the papers file alone; '" +
                     opt.method + "' is not");
  const Corpus corpus = load_corpus(opt);
  const ScoreSet set = cited_side_scores(opt, corpus);
  const ClassificationReport report = classify_linearity(corpus, set, opt.tolerance);

  const fs::path cls_path = output_file(opt, "classification.csv");
  std::ofstream cls = open_output(cls_path);
  cls << "cell,method,verdict,k,b,max_residual\n";
  for (const CellClassification& cc : report.cells) {
    cls << corpus.cell_label(cc.cell) << ',' << report.method << ',' << to_string(cc.verdict)
        << ',';
    if (cc.fitted) cls << csv::format_double(cc.fitted->k);
    cls << ',';
    if (cc.fitted) cls << csv::format_double(cc.fitted->b);
    cls << ',' << csv::format_double(cc.max_residual) << '\n';
  }

  const fs::path map_path = output_file(opt, "mapping.csv");
  std::ofstream map = open_output(map_path);
  map << "cell,method,raw,score\n";
  for (const CellClassification& cc : report.cells)
    for (const MappingPoint& mp : cc.mapping)
      map << corpus.cell_label(cc.cell) << ',' << report.method << ','
          << csv::format_double(mp.raw) << ',' << csv::format_double(mp.mapped) << '\n';

  for (const CellClassification& cc : report.cells) {
    std::cout << "cell=" << corpus.cell_label(cc.cell) << " verdict=" << to_string(cc.verdict);
    if (cc.fitted)
      std::cout << " k=" << csv::format_double(cc.fitted->k)
                << " b=" << csv::format_double(cc.fitted->b);
    std::cout << " max_residual=" << csv::format_double(cc.max_residual) << "\n";
    if (cc.witness)
      std::cout << "  witness: raw gaps " << csv::format_double(cc.witness->x_a) << ".."
                << csv::format_double(cc.witness->x_b) << " and "
                << csv::format_double(cc.witness->x_c) << ".."
                << csv::format_double(cc.witness->x_d) << " are equal, score gaps "
                << csv::format_double(cc.witness->gap_first) << " vs "
                << csv::format_double(cc.witness->gap_second) << "\n";
  }
  std::cout << "method=" << report.method << " overall=" << to_string(report.overall) << " wrote "
            << cls_path.string() << " " << map_path.string() << "\n";
  return 0;
}

std::vector<std::string> load_group(const std::string& path) {
  std::ifstream in = open_input(path);
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) ids.push_back(line);
  }
  return ids;
}

int cmd_aggregate(const Options& opt) {
  std::ifstream in = open_input(opt.input);
  const ScoreSet set = read_scores_csv(in);
  Statistic stat = opt.stat == "mean" ? Statistic::Mean : Statistic::Sum;

  if (set.method.linearity == Linearity::OutsideCategory && set.method.additive &&
      !opt.acknowledge) {
    std::cerr << "aggregation refused: '" << set.method.name
              << "' scores sit outside the linear/nonlinear categories; their totals are "
                 "per-event sums, not field-calibrated impact. Pass "
                 "--acknowledge-outside-category to aggregate anyway.\n";
    return 2;
  }

  AggregateResult result;
  if (opt.group.empty())
    result = guarded_aggregate(set, stat);
  else
    result = guarded_aggregate(set, load_group(opt.group), stat);

  std::cout << "method=" << set.method.name << " linearity=" << to_string(set.method.linearity)
            << " stat=" << to_string(result.statistic) << " group_size=" << result.group_size
            << " value=" << csv::format_double(result.value);
  if (result.advisory) std::cout << " note=outside-category-total";
  std::cout << "\n";
  return 0;
}

int cmd_fairness(const Options& opt) {
  if (opt.method == "rcr")
    throw UsageError("fairness needs per-paper scores over a papers file; 'rcr' reads its own "
                     "input format");
  const Corpus corpus = load_corpus(opt);
  const ScoreSet set = normalize_scores(opt, corpus);
  const FairnessReport report = top_z_share(set, corpus, opt.z);
  const CoincidenceReport coincidence = distribution_coincidence(set, corpus);

  const fs::path csv_path = output_file(opt, "fairness.csv");
  std::ofstream fcsv = open_output(csv_path);
  fcsv << "field,n,top_count,proportion\n";
  for (const FieldShare& share : report.fields)
    fcsv << share.field_id << ',' << share.n << ',' << csv::format_double(share.top_count) << ','
         << csv::format_double(share.proportion) << '\n';

  const fs::path cdf_path = output_file(opt, "cdf.csv");
  std::ofstream cdf = open_output(cdf_path);
  cdf << "field,score,cum_fraction\n";
  for (const auto& [field, points] : coincidence.field_cdfs)
    for (const CdfPoint& pt : points)
      cdf << field << ',' << csv::format_double(pt.score) << ','
          << csv::format_double(pt.cum_fraction) << '\n';

  json j;
  j["method"] = set.method.name;
  j["linearity"] = std::string(to_string(set.method.linearity));
  j["z"] = report.z;
  j["top_set_size"] = report.top_set_size;
  j["max_abs_deviation"] = report.max_abs_deviation;
  j["max_ks_distance"] = coincidence.max_ks_distance;
  j["fields"] = json::array();
  for (const FieldShare& share : report.fields)
    j["fields"].push_back(json{{"field", share.field_id},
                               {"n", share.n},
                               {"top_count", share.top_count},
                               {"proportion", share.proportion}});
  const fs::path json_path = output_file(opt, "fairness.json");
  std::ofstream fj = open_output(json_path);
  fj << j.dump(2) << "\n";

  for (const FieldShare& share : report.fields)
    std::cout << "field=" << share.field_id << " n=" << share.n
              << " top_count=" << csv::format_double(share.top_count)
              << " proportion=" << csv::format_fixed2(share.proportion) << "%\n";
  std::cout << "method=" << set.method.name << " z=" << csv::format_double(report.z)
            << " top_set_size=" << report.top_set_size
            << " max_abs_deviation=" << csv::format_fixed2(report.max_abs_deviation)
            << " max_ks_distance=" << csv::format_fixed2(coincidence.max_ks_distance) << " wrote "
            << csv_path.string() << " " << json_path.string() << " " << cdf_path.string() << "\n";
  return 0;
}

std::string render_side(const std::vector<double>& terms, double sum) {
  std::string text;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i > 0) text += " + ";
    text += csv::format_fixed2(terms[i]);
  }
  if (terms.size() > 1) text += " = " + csv::format_fixed2(sum);
  return text;
}

int cmd_demo_misuse(const Options& opt) {
  const std::vector<MisuseComparison> comparisons = misuse_demo();
  std::cout << "Worked 52-paper example, scores at the two-decimal display precision.\n"
            << "Equal raw citation totals stop being equal after the percentile transform,\n"
            << "and four once-cited papers together outscore the 100-point ceiling:\n";
  json arr = json::array();
  for (const MisuseComparison& cmp : comparisons) {
    std::cout << "  [" << cmp.equation << "]  " << render_side(cmp.lhs_terms, cmp.lhs) << "  "
              << cmp.relation << "  " << render_side(cmp.rhs_terms, cmp.rhs) << "\n";
    arr.push_back(json{{"equation", cmp.equation},
                       {"lhs_terms", cmp.lhs_terms},
                       {"lhs", cmp.lhs},
                       {"rhs_terms", cmp.rhs_terms},
                       {"rhs", cmp.rhs},
                       {"relation", cmp.relation}});
  }
  const fs::path path = output_file(opt, "misuse.json");
  std::ofstream out = open_output(path);
  out << arr.dump(2) << "\n";
  std::cout << "wrote " << path.string() << "\n";
  return 0;
}

int cmd_generate(const Options& opt) {
  std::ifstream in = open_input(opt.spec);
  SynthesisSpec spec = parse_synthesis_spec(in);
  if (opt.seed_given) spec.seed = opt.seed;
  const Corpus corpus = synthesize_corpus(spec, cell_mode_from_string(opt.cell));
  const fs::path path = output_file(opt, "papers.csv");
  std::ofstream out = open_output(path);
  write_corpus_csv(out, corpus);
  std::cout << "seed=" << spec.seed << " fields=" << spec.fields.size()
            << " papers=" << corpus.size() << " wrote " << path.string() << "\n";
  return 0;
}

int cmd_table1(const Options& opt) {
  const Corpus corpus = table1_fixture();
  const fs::path papers_path = output_file(opt, "papers.csv");
  std::ofstream papers = open_output(papers_path);
  write_corpus_csv(papers, corpus);

  const ScoreSet m_scores = mean_based(corpus).set;
  const ScoreSet percentiles = percentile_rank(corpus, PercentileMode::Inclusive);
  const CellKey cell = corpus.cell_of(corpus.papers().front());
  const ReferenceSetStats stats = reference_stats(corpus, cell);

  // One row per distinct citation count: papers at that count, the scaling
  // term, both scores at display precision, and the cumulative rank.
  struct Row {
    std::int64_t citations;
    int count = 0;
    int rank = 0;
    double m_score = 0.0;
    double percentile = 0.0;
  };
  std::map<std::int64_t, Row> rows;
  for (const Paper& p : corpus.papers()) {
    Row& row = rows[p.citations];
    row.citations = p.citations;
    ++row.count;
    row.m_score = m_scores.at(p.paper_id);
    row.percentile = percentiles.at(p.paper_id);
  }
  int running = 0;
  for (auto& [citations, row] : rows) {
    running += row.count;
    row.rank = running;
  }

  const fs::path summary_path = output_file(opt, "summary.csv");
  std::ofstream summary = open_output(summary_path);
  summary << "citations,papers,k,m_score,rank,percentile\n";
  std::cout << "citations papers k    m_score rank percentile\n";
  for (const auto& [citations, row] : rows) {
    const std::string k = csv::format_fixed2(1.0 / stats.mean);
    summary << citations << ',' << row.count << ',' << k << ','
            << csv::format_fixed2(row.m_score) << ',' << row.rank << ','
            << csv::format_fixed2(row.percentile) << '\n';
    std::cout << citations << '\t' << row.count << '\t' << k << '\t'
              << csv::format_fixed2(row.m_score) << '\t' << row.rank << '\t'
              << csv::format_fixed2(row.percentile) << "\n";
  }
  std::cout << "papers=" << corpus.size() << " mean=" << csv::format_double(stats.mean)
            << " wrote " << papers_path.string() << " " << summary_path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Field-normalized citation scores, linearity classification and fairness checks"};
  app.name("fieldnorm");
  app.require_subcommand(1);
  Options opt;

  auto add_corpus_options = [&](CLI::App* cmd, bool method_required) {
    cmd->add_option("--input", opt.input, "input CSV file")->required();
    auto* method = cmd->add_option("--method", opt.method, "normalization method");
    if (method_required) method->required();
    cmd->add_option("--mode", opt.mode, "method variant (cp-in/cp-ex, original/redefined)");
    cmd->add_option("--cell", opt.cell, "reference set granularity")
        ->check(CLI::IsMember({"field", "field-year", "field-year-doctype"}));
    cmd->add_option("--n-intervals", opt.n_intervals, "exchange rate: equal-count intervals");
    cmd->add_option("--pi-m", opt.pi_m, "exchange rate: first averaged interval");
    cmd->add_option("--pi-M", opt.pi_M, "exchange rate: last averaged interval");
  };

  CLI::App* normalize = app.add_subcommand("normalize", "score every paper with one method");
  add_corpus_options(normalize, true);
  normalize->add_option("--events", opt.events, "citing events CSV for sncs methods");
  normalize->add_option("--output", opt.output, "output directory");

  CLI::App* classify = app.add_subcommand("classify", "fit per-cell score maps and report verdicts");
  add_corpus_options(classify, true);
  classify->add_option("--tolerance", opt.tolerance, "relative residual tolerance");
  classify->add_option("--output", opt.output, "output directory");

  CLI::App* aggregate = app.add_subcommand("aggregate", "sum or average scores from a score file");
  aggregate->add_option("--input", opt.input, "scores CSV file")->required();
  aggregate->add_option("--group", opt.group, "file with one paper_id per line");
  aggregate->add_option("--stat", opt.stat, "sum or mean")
      ->check(CLI::IsMember({"sum", "mean"}));
  aggregate->add_flag("--acknowledge-outside-category", opt.acknowledge,
                      "allow totals of outside-category per-event sums");

  CLI::App* fairness = app.add_subcommand("fairness", "top-z shares and per-field score CDFs");
  add_corpus_options(fairness, true);
  fairness->add_option("--events", opt.events, "citing events CSV for sncs methods");
  fairness->add_option("--z", opt.z, "top share in percent");
  fairness->add_option("--output", opt.output, "output directory");

  CLI::App* demo = app.add_subcommand("demo-misuse", "worked example of invalid score arithmetic");
  demo->add_option("--output", opt.output, "output directory");

  CLI::App* generate = app.add_subcommand("generate", "sample a synthetic corpus from a JSON spec");
  generate->add_option("--spec", opt.spec, "synthesis spec JSON")->required();
  auto* seed_opt = generate->add_option("--seed", opt.seed, "override the spec seed");
  generate->add_option("--cell", opt.cell, "reference set granularity")
      ->check(CLI::IsMember({"field", "field-year", "field-year-doctype"}));
  generate->add_option("--output", opt.output, "output directory");

  CLI::App* table1 = app.add_subcommand("table1", "emit the worked 52-paper example");
  table1->add_option("--output", opt.output, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 64;
  }
  opt.seed_given = seed_opt->count() > 0;

  try {
    if (!(opt.tolerance > 0.0)) throw UsageError("--tolerance must be positive");
    if (!(opt.z > 0.0) || !(opt.z < 100.0))
      throw UsageError("--z must lie strictly between 0 and 100");
    if (opt.n_intervals < 1) throw UsageError("--n-intervals must be at least 1");

    if (normalize->parsed()) return cmd_normalize(opt);
    if (classify->parsed()) return cmd_classify(opt);
    if (aggregate->parsed()) return cmd_aggregate(opt);
    if (fairness->parsed()) return cmd_fairness(opt);
    if (demo->parsed()) return cmd_demo_misuse(opt);
    if (generate->parsed()) return cmd_generate(opt);
    if (table1->parsed()) return cmd_table1(opt);
    throw UsageError("no subcommand given");
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 64;
  } catch (const GuardRefusal& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 65;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 65;
  }
}
