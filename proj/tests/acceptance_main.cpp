#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "ergolab/config.hpp"
#include "ergolab/entropy.hpp"
#include "ergolab/experiments.hpp"
#include "ergolab/markov.hpp"
#include "ergolab/rank_one.hpp"
#include "ergolab/rational.hpp"
#include "ergolab/report.hpp"
#include "ergolab/rng.hpp"

using namespace ergolab;

namespace {

std::string slurp(const std::string& rel) {
  std::ifstream in(std::string(ERGOLAB_SOURCE_DIR) + "/" + rel);
  if (!in) throw std::runtime_error("cannot open " + rel);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Outcome {
  bool pass = false;
  std::string artifact;
};

// 1. Kernel identities, nonnegativity and fixed constants across a 1000-point
//    rational parameter grid, everything exact.
Outcome criterion1() {
  Outcome o;
  const auto grid = markov::kernel_grid_check(1000);
  o.pass = grid.all_pass();
  std::ostringstream art;
  art << "points=" << grid.points << " failures=" << grid.failures;
  o.artifact = art.str();
  return o;
}

const std::vector<Rational>& parameter_values() {
  static const std::vector<Rational> values = {Rational(1, 4), Rational(1, 3), Rational(2, 5)};
  return values;
}

// 2. Exact intertwining on every inner-window basis function for all three
//    parameters and windows 2..8.
Outcome criterion2() {
  Outcome o;
  o.pass = true;
  std::ostringstream art;
  for (const auto& a : parameter_values()) {
    const markov::KernelSpec spec(a);
    for (std::size_t w = 2; w <= 8; ++w) {
      const auto r = markov::verify_intertwining(spec, w);
      o.pass = o.pass && r.all_pass();
      art << rational_to_string(a) << " w=" << w << " checks=" << r.checks
          << " failed=" << r.failed_basis.size() << "\n";
    }
  }
  o.artifact = art.str();
  return o;
}

// 3. Full rank 2^w on the same grid, with the determinant in closed form.
Outcome criterion3() {
  Outcome o;
  o.pass = true;
  std::ostringstream art;
  for (const auto& a : parameter_values()) {
    const markov::KernelSpec spec(a);
    const auto checks = markov::kernel_checks(spec);
    o.pass = o.pass && checks.determinant_matches;
    art << rational_to_string(a) << " det=" << rational_to_string(checks.determinant) << "\n";
    for (std::size_t w = 2; w <= 8; ++w) {
      const auto r = markov::verify_injective_dense(spec, w);
      const bool det_ok = r.det_magnitude_power == pow_rational(2 * a, static_cast<unsigned>(w));
      o.pass = o.pass && r.full_rank() && det_ok;
      art << rational_to_string(a) << " w=" << w << " rank=" << r.rank << "/" << r.dimension
          << " |det|=" << rational_to_string(r.det_magnitude_power) << "\n";
    }
  }
  o.artifact = art.str();
  return o;
}

// 4. Two-cell entropy stays strictly below one bit off the midpoint; the fair
//    split sits at one bit to 1e-12.
Outcome criterion4() {
  Outcome o;
  o.pass = true;
  double worst = 0.0;
  for (int i = 1; i <= 1000; ++i) {
    const Rational a(i, 2002);
    const double h = partition_entropy(ProbabilityVector({a, Rational(1) - a}), LogBase::binary);
    o.pass = o.pass && h < 1.0;
    worst = std::max(worst, h);
  }
  for (const auto& a : parameter_values()) {
    const double h = partition_entropy(ProbabilityVector({a, Rational(1) - a}), LogBase::binary);
    o.pass = o.pass && h < 1.0;
    worst = std::max(worst, h);
  }
  const double beta = partition_entropy(ProbabilityVector::uniform(2), LogBase::binary);
  o.pass = o.pass && std::fabs(beta - 1.0) <= 1e-12;
  std::ostringstream art;
  art << "worst=" << report::format_double(worst) << " beta=" << report::format_double(beta);
  o.artifact = art.str();
  return o;
}

// 5. Height recurrence, exact, on fifty seeded random constructions.
Outcome criterion5() {
  Outcome o;
  o.pass = true;
  Rng rng(91101);
  std::ostringstream art;
  for (int s = 0; s < 50; ++s) {
    const std::size_t stages = 2 + static_cast<std::size_t>(rng.next_below(7));
    rankone::RankOneParams params;
    for (std::size_t t = 1; t < stages; ++t) {
      rankone::StageParams st;
      st.cuts = 2 + static_cast<long long>(rng.next_below(3));
      for (long long c = 0; c < st.cuts; ++c)
        st.spacers.push_back(static_cast<long long>(rng.next_below(6)));
      params.transitions.push_back(std::move(st));
    }
    const auto hs = rankone::RankOneState::build(params).heights();
    long long h = 1;
    bool ok = hs.front() == 1;
    for (std::size_t t = 0; t < params.transitions.size(); ++t) {
      long long sum = 0;
      for (long long sp : params.transitions[t].spacers) sum += sp;
      h = params.transitions[t].cuts * h + sum;
      ok = ok && hs[t + 1] == h;
    }
    o.pass = o.pass && ok;
    art << "set" << s << ":";
    for (long long v : hs) art << " " << v;
    art << "\n";
  }
  o.artifact = art.str();
  return o;
}

// 6. Margin spacer schedules make every scheme translate disjoint, exactly;
//    the zero-spacer control overlaps, exactly.
Outcome criterion6() {
  Outcome o;
  o.pass = true;
  std::ostringstream art;
  struct RuleDef {
    const char* name;
    std::function<long long(long long)> L;
  };
  const std::vector<RuleDef> rules = {
      {"L=1", [](long long) -> long long { return 1; }},
      {"L=2", [](long long) -> long long { return 2; }},
      {"L=j", [](long long j) { return j; }},
  };
  for (const auto& rule : rules) {
    const auto params = rankone::spacer_params_for(rule.L, [](long long) { return 2; }, 6);
    const auto state = rankone::RankOneState::build(params);
    for (std::size_t j = 1; j <= 5; ++j) {
      const auto dr = state.verify_translate_disjointness(j, rule.L(static_cast<long long>(j)));
      o.pass = o.pass && dr.disjoint && dr.fully_settled;
      art << rule.name << " j=" << j << " disjoint=" << (dr.disjoint ? 1 : 0) << "\n";
    }
  }
  rankone::RankOneParams odo;
  for (int t = 1; t < 6; ++t) odo.transitions.push_back({2, {0, 0}});
  const auto control = rankone::RankOneState::build(odo).verify_translate_disjointness(1, 1);
  o.pass = o.pass && !control.disjoint;
  art << "control disjoint=" << (control.disjoint ? 1 : 0)
      << " witness=" << rational_to_string(control.witness_measure) << "\n";
  o.artifact = art.str();
  return o;
}

// 7. Twenty cylinder events: closed form against a million samples each, plus
//    the independence product identity at 1e-12 relative.
Outcome criterion7() {
  Outcome o;
  experiments::RunOptions opt;
  opt.seed = 6071;
  opt.config_text = slurp("configs/poisson-accept.cfg");
  const auto rep = experiments::run_experiment("poisson-measure",
                                               config::parse_config_text(opt.config_text), opt);
  std::size_t formula = 0, mc = 0;
  for (const auto& r : rep.records) {
    if (r.claim_anchor == "poisson.measure.formula") ++formula;
    if (r.claim_anchor == "poisson.measure.mc-4sigma") ++mc;
  }

  experiments::RunOptions iopt;
  iopt.seed = 6071;
  iopt.config_text = slurp("configs/poisson-independence.cfg");
  const auto irep = experiments::run_experiment("poisson-independence",
                                                config::parse_config_text(iopt.config_text), iopt);

  o.pass = rep.all_pass() && irep.all_pass() && formula == 20 && mc == 20;
  std::ostringstream art;
  report::write_csv(rep, art);
  report::write_csv(irep, art);
  o.artifact = art.str();
  return o;
}

// 8. One report holding all three normalized-entropy columns: constant
//    positive, decaying below the target, constant again.
Outcome criterion8() {
  Outcome o;
  experiments::RunOptions opt;
  opt.seed = 6071;
  opt.config_text = slurp("configs/pentropy-accept.cfg");
  const auto rep = experiments::run_experiment("pentropy",
                                               config::parse_config_text(opt.config_text), opt);
  std::size_t bernoulli = 0, bound = 0, decay = 0, search = 0, suspension = 0, exactflag = 0;
  for (const auto& r : rep.records) {
    if (r.claim_anchor == "pentropy.bernoulli.constant") ++bernoulli;
    if (r.claim_anchor == "pentropy.rotation.bound") ++bound;
    if (r.claim_anchor == "pentropy.rotation.decay") ++decay;
    if (r.claim_anchor == "pentropy.rotation.search-L") ++search;
    if (r.claim_anchor == "pentropy.suspension.constant") ++suspension;
    if (r.claim_anchor == "pentropy.suspension.exactflag") ++exactflag;
  }
  o.pass = rep.all_pass() && bernoulli == 8 && bound == 64 && decay == 1 && search == 2 &&
           suspension == 5 && exactflag == 5;
  std::ostringstream art;
  report::write_csv(rep, art);
  o.artifact = art.str();
  return o;
}

}  // namespace

int main() {
  using clock = std::chrono::steady_clock;
  const std::vector<std::function<Outcome()>> criteria = {
      criterion1, criterion2, criterion3, criterion4,
      criterion5, criterion6, criterion7, criterion8};
  const std::vector<const char*> labels = {
      "kernel grid identities, exact",
      "intertwining on every inner basis",
      "tensor rank and determinant",
      "entropy stays below one bit",
      "height recurrence on random rules",
      "translate disjointness and control",
      "cylinder measures versus sampling",
      "three-column entropy report",
  };
  const std::vector<double> budgets = {1.0, 10.0, 0.0, 0.0, 0.0, 30.0, 60.0, 0.0};

  int passed = 0;
  bool all = true;
  std::vector<std::string> artifacts;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = clock::now();
    Outcome out;
    try {
      out = criteria[i]();
    } catch (const std::exception& e) {
      out.pass = false;
      out.artifact = std::string("exception: ") + e.what();
    }
    const double dt = std::chrono::duration<double>(clock::now() - t0).count();
    const bool ok = out.pass && (budgets[i] == 0.0 || dt < budgets[i]);
    std::printf("%s criterion %zu: %s (%.2f s)\n", ok ? "PASS" : "FAIL", i + 1, labels[i], dt);
    std::fflush(stdout);
    artifacts.push_back(std::move(out.artifact));
    if (ok) ++passed;
    all = all && ok;
  }

  // 9. Determinism: the same seeds reproduce every numeric artifact byte for
  //    byte.
  const auto t0 = clock::now();
  bool identical = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    try {
      identical = identical && criteria[i]().artifact == artifacts[i];
    } catch (const std::exception&) {
      identical = false;
    }
  }
  const double dt = std::chrono::duration<double>(clock::now() - t0).count();
  std::printf("%s criterion 9: byte-identical rerun (%.2f s)\n", identical ? "PASS" : "FAIL", dt);
  if (identical) ++passed;
  all = all && identical;

  std::printf("acceptance: %d of 9 criteria passed\n", passed);
  return all ? 0 : 1;
}
