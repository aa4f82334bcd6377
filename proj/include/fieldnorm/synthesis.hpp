#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "fieldnorm/corpus.hpp"
#include "fieldnorm/errors.hpp"

namespace fieldnorm {

enum class DistributionFamily { Lognormal, NegativeBinomial };

inline std::string_view to_string(DistributionFamily f) {
  return f == DistributionFamily::Lognormal ? "lognormal" : "negative-binomial";
}

struct FieldSynthesis {
  std::string field_id;
  std::size_t count = 0;
  DistributionFamily family = DistributionFamily::Lognormal;
  double mu = 0.0;      // lognormal: mean of the underlying normal
  double sigma = 0.0;   // lognormal: sd of the underlying normal
  std::int64_t r = 0;   // negative binomial: number of successes
  double p = 0.0;       // negative binomial: success probability
};

struct SynthesisSpec {
  std::uint64_t seed = 0;
  std::vector<FieldSynthesis> fields;
};

inline void validate(const SynthesisSpec& spec) {
  if (spec.fields.empty()) throw DataError("synthesis spec has no fields");
  std::set<std::string> seen;
  for (const FieldSynthesis& f : spec.fields) {
    if (f.field_id.empty()) throw DataError("synthesis field with empty field_id");
    if (!seen.insert(f.field_id).second)
      throw DataError("duplicate field_id '" + f.field_id + "' in synthesis spec");
    if (f.count < 1) throw DataError("field '" + f.field_id + "' has count 0");
    switch (f.family) {
      case DistributionFamily::Lognormal:
        if (!std::isfinite(f.mu) || !std::isfinite(f.sigma) || !(f.sigma > 0.0))
          throw DataError("field '" + f.field_id + "' needs finite mu and positive sigma");
        break;
      case DistributionFamily::NegativeBinomial:
        if (f.r < 1) throw DataError("field '" + f.field_id + "' needs r >= 1");
        if (!(f.p > 0.0) || !(f.p <= 1.0))
          throw DataError("field '" + f.field_id + "' needs p in (0, 1]");
        break;
    }
  }
}

inline SynthesisSpec parse_synthesis_spec(const nlohmann::json& j) {
  SynthesisSpec spec;
  try {
    spec.seed = j.at("seed").get<std::uint64_t>();
    for (const nlohmann::json& jf : j.at("fields")) {
      FieldSynthesis f;
      f.field_id = jf.at("field_id").get<std::string>();
      f.count = jf.at("count").get<std::size_t>();
      const std::string family = jf.at("family").get<std::string>();
      const nlohmann::json& params = jf.at("params");
      if (family == "lognormal") {
        f.family = DistributionFamily::Lognormal;
        f.mu = params.at("mu").get<double>();
        f.sigma = params.at("sigma").get<double>();
      } else if (family == "negative-binomial") {
        f.family = DistributionFamily::NegativeBinomial;
        f.r = params.at("r").get<std::int64_t>();
        f.p = params.at("p").get<double>();
      } else {
        throw DataError("unknown family '" + family +
                        "', expected lognormal or negative-binomial");
      }
      spec.fields.push_back(std::move(f));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad synthesis spec: ") + e.what());
  }
  validate(spec);
  return spec;
}

inline SynthesisSpec parse_synthesis_spec(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad synthesis spec: ") + e.what());
  }
  return parse_synthesis_spec(j);
}

// Draws citation counts field by field, in spec order, from one generator
// seeded as given, so equal specs yield equal corpora. Lognormal draws are
// rounded to the nearest count.
inline Corpus synthesize_corpus(const SynthesisSpec& spec, CellMode mode = CellMode::Field) {
  validate(spec);
  std::mt19937_64 engine(spec.seed);
  std::vector<Paper> papers;
  for (const FieldSynthesis& f : spec.fields) {
    std::lognormal_distribution<double> lognormal(f.mu, f.sigma);
    std::negative_binomial_distribution<std::int64_t> negbin(f.r, f.p);
    for (std::size_t i = 1; i <= f.count; ++i) {
      std::int64_t citations = 0;
      if (f.family == DistributionFamily::Lognormal) {
        const double draw = lognormal(engine);
        if (!(draw < 9e18))
          throw DataError("field '" + f.field_id + "' sampled a citation count beyond range");
        citations = std::llround(draw);
      } else {
        citations = negbin(engine);
      }
      char serial[16];
      std::snprintf(serial, sizeof(serial), "%06zu", i);
      papers.push_back(Paper{f.field_id + "-" + serial, f.field_id, 2020, "article", citations});
    }
  }
  return Corpus(std::move(papers), mode, "synthetic:" + std::to_string(spec.seed));
}

}  // namespace fieldnorm
