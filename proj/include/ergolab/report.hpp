#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ergolab/version.hpp"

namespace ergolab::report {

struct CheckRecord {
  std::string claim_anchor;
  std::string kind;       // experiment kind that produced the record
  bool exact = true;      // exact arithmetic vs Monte Carlo / floating estimate
  double value = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;  // always 0 for exact records
  bool pass = false;
  std::string note;        // free text, JSON output only
};

struct Report {
  std::string kind;
  std::uint64_t seed = 0;
  std::string base = "bit";
  std::string config_text;
  std::vector<CheckRecord> records;

  bool all_pass() const {
    for (const auto& r : records)
      if (!r.pass) return false;
    return true;
  }
};

// Every record names the claim it instantiates through one of these anchors.
// docs/claims.csv ships the same table; a test pins the two copies together.
inline const std::vector<std::pair<std::string, std::string>>& claim_index() {
  static const std::vector<std::pair<std::string, std::string>> table = {
      {"markov.kernel.value", "four-region kernel takes the stated value on each cell pair"},
      {"markov.kernel.grid-identities", "row and column Markov identities hold exactly across the parameter grid"},
      {"markov.transfer.action", "indicator basis maps to the stated action table"},
      {"markov.transfer.constants-fixed", "operator and adjoint both fix constant functions"},
      {"markov.transfer.determinant", "transfer determinant equals -2a symbolically"},
      {"markov.intertwine.exact", "window shift commutes with the tensor operator on every inner basis function"},
      {"markov.rank.full", "tensor power reaches full rank 2^w"},
      {"markov.rank.det-power", "determinant magnitude follows the closed form (2a)^w"},
      {"markov.chain.blocks", "every chain block intertwines exactly and has full rank"},
      {"markov.chain.entropy-split", "summed block entropies stay below one bit per coordinate while the output side is exactly one"},
      {"entropy.partition.value", "entropy functional takes the stated value"},
      {"entropy.separation.xi-lt-beta", "two-cell entropy at parameter a stays strictly below one bit"},
      {"entropy.beta.one-bit", "fair two-cell partition carries exactly one bit"},
      {"entropy.product.additive", "entropy adds over independent products"},
      {"entropy.plugin.mc-4sigma", "plug-in estimate falls within four bootstrap errors of the exact value"},
      {"rankone.heights.recurrence", "tower heights satisfy the cutting recurrence exactly"},
      {"rankone.tower.measure", "tower measure equals height times level width"},
      {"rankone.tower.measure-monotone", "tower measures never decrease across stages"},
      {"rankone.dynamics.measure-preserving", "set images keep their measure exactly"},
      {"rankone.dynamics.invertible", "forward then backward image returns the set exactly"},
      {"rankone.disjoint.premise", "tower translates along the scheme are pairwise disjoint"},
      {"rankone.disjoint.control", "control construction with full measure produces an overlap"},
      {"poisson.measure.formula", "cylinder measure equals the product of count weights"},
      {"poisson.measure.mc-4sigma", "sampled frequency falls within four standard errors of the formula value"},
      {"poisson.measure.normalization", "count weights sum to one within the stated tail bound"},
      {"poisson.measure.additivity", "count law of a disjoint union equals the convolution of count laws"},
      {"poisson.independence.product-identity", "joint cylinder measure equals the product of marginals within 1e-12 relative"},
      {"poisson.independence.mc-4sigma", "sampled joint frequency falls within four standard errors of the product"},
      {"pentropy.bernoulli.constant", "normalized join entropy stays at the partition entropy for every j"},
      {"pentropy.bernoulli.mc-4sigma", "plug-in join entropy falls within four bootstrap errors of the exact value"},
      {"pentropy.rotation.bound", "normalized join entropy respects the cell-count bound log(2L)/L"},
      {"pentropy.rotation.decay", "normalized join entropy falls below the target by the final j"},
      {"pentropy.rotation.search-L", "a window length L with normalized entropy below 1/j exists at desk scale"},
      {"pentropy.suspension.constant", "suspension join entropy stays at the two-cell value for every j in range"},
      {"pentropy.suspension.exactflag", "iterate family certified disjoint, so the join law is an exact product"},
      {"report.determinism.rerun", "rerunning with the same seed reproduces identical numeric content"},
  };
  return table;
}

inline bool known_anchor(const std::string& anchor) {
  for (const auto& [a, d] : claim_index())
    if (a == anchor) return true;
  return false;
}

inline void validate_anchors(const Report& rep) {
  for (const auto& r : rep.records)
    if (!known_anchor(r.claim_anchor))
      throw std::logic_error("report: unknown claim anchor '" + r.claim_anchor + "'");
}

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void write_json(const Report& rep, std::ostream& os, bool with_timestamp = true) {
  validate_anchors(rep);
  nlohmann::json j;
  j["config"] = {{"kind", rep.kind}, {"seed", rep.seed}, {"base", rep.base},
                 {"text", rep.config_text}};
  j["records"] = nlohmann::json::array();
  for (const auto& r : rep.records) {
    nlohmann::json rec = {{"claim_anchor", r.claim_anchor}, {"kind", r.kind},
                          {"exact", r.exact},               {"value", r.value},
                          {"expected", r.expected},         {"tolerance", r.tolerance},
                          {"verdict", r.pass ? "pass" : "fail"}};
    if (!r.note.empty()) rec["note"] = r.note;
    j["records"].push_back(std::move(rec));
  }
  j["meta"] = {{"version", kVersion}, {"seed", rep.seed}};
  if (with_timestamp) j["meta"]["timestamp"] = utc_timestamp();
  os << j.dump(2) << '\n';
}

inline void write_csv(const Report& rep, std::ostream& os) {
  validate_anchors(rep);
  os << "claim_anchor,kind,exact_flag,value,expected,tolerance,verdict,seed\n";
  for (const auto& r : rep.records)
    os << r.claim_anchor << ',' << r.kind << ',' << (r.exact ? "exact" : "mc") << ','
       << format_double(r.value) << ',' << format_double(r.expected) << ','
       << format_double(r.tolerance) << ',' << (r.pass ? "pass" : "fail") << ',' << rep.seed
       << '\n';
}

}  // namespace ergolab::report
