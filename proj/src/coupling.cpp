#include "entrolab/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <nlohmann/json.hpp>

#include "entrolab/parallel.hpp"
#include "entrolab/rng.hpp"

namespace entrolab {

double CouplingSeed::rate_of(int g, int gbar) const {
  for (const auto& e : entries)
    if (e.g == g && e.gbar == gbar) return e.rate;
  return 0.0;
}

void CouplingSeed::add(int g, int gbar, double rate) {
  if (rate == 0.0) return;
  for (auto& e : entries)
    if (e.g == g && e.gbar == gbar) {
      e.rate += rate;
      return;
    }
  entries.push_back(CouplingEntry{g, gbar, rate});
}

const CouplingSeed* CouplingRates::find(int state, int move) const {
  for (const auto& s : seeds)
    if (s.state == state && s.move == move) return &s;
  return nullptr;
}

CouplingRates trivial_coupling(const Generator& gen) {
  int e = gen.null_move_index();
  if (e < 0) throw Error("trivial_coupling: generator lacks the null move");
  CouplingRates cr;
  for (int s = 0; s < gen.size(); ++s) {
    for (const auto& tr : gen.transitions(s)) {
      if (tr.target == s || tr.rate <= 0) continue;
      CouplingSeed seed;
      seed.state = s;
      seed.move = tr.move;
      // Identity-acting entries (retained wall rates) still count in the
      // marginals, so every positive rate contributes.
      for (const auto& a : gen.transitions(s)) seed.add(a.move, e, a.rate);
      for (const auto& b : gen.transitions(tr.target)) seed.add(e, b.move, b.rate);
      cr.seeds.push_back(std::move(seed));
    }
  }
  return cr;
}

AdmissibilityReport check_admissible(const CouplingRates& cr, const Generator& gen,
                                     double tol) {
  AdmissibilityReport report;
  const int e = gen.null_move_index();
  const int n_moves = static_cast<int>(gen.moves().size());
  double worst = -1.0;
  for (int k = 0; k < static_cast<int>(cr.seeds.size()); ++k) {
    const auto& seed = cr.seeds[k];
    if (seed.state < 0 || seed.state >= gen.size())
      throw UnknownSeedError("check_admissible: seed state out of range");
    double c_seed = gen.rate(seed.state, seed.move);
    int target = gen.apply_move(seed.state, seed.move);
    if (c_seed <= 0 || target == seed.state)
      throw UnknownSeedError("check_admissible: seed (" +
                             std::to_string(seed.state) + ", " +
                             gen.moves()[seed.move].id + ") is not in S");
    std::vector<double> row(n_moves, 0.0), col(n_moves, 0.0);
    for (const auto& entry : seed.entries) {
      if (entry.rate < 0)
        throw NegativeCouplingRateError(
            "check_admissible: negative rate " + std::to_string(entry.rate) +
            " at seed (" + std::to_string(seed.state) + ", " +
            gen.moves()[seed.move].id + ")");
      row[entry.g] += entry.rate;
      col[entry.gbar] += entry.rate;
    }
    for (int m = 0; m < n_moves; ++m) {
      if (m == e) continue;
      double rv = std::abs(row[m] - gen.rate(seed.state, m));
      double cv = std::abs(col[m] - gen.rate(target, m));
      report.max_row_violation = std::max(report.max_row_violation, rv);
      report.max_col_violation = std::max(report.max_col_violation, cv);
      if (std::max(rv, cv) > worst) {
        worst = std::max(rv, cv);
        report.worst_seed = k;
      }
    }
  }
  report.passed =
      report.max_row_violation <= tol && report.max_col_violation <= tol;
  return report;
}

Generator coupled_generator(const CouplingRates& cr, const Generator& gen,
                            int max_pairs) {
  auto adm = check_admissible(cr, gen);
  if (!adm.passed)
    throw InadmissibleCouplingError("coupled_generator: marginal violation " +
                                    std::to_string(std::max(adm.max_row_violation,
                                                            adm.max_col_violation)));
  const int e = gen.null_move_index();
  const int d = gen.dim();

  auto pair_config = [&](int a, int b) {
    Configuration c = gen.state(a);
    const Configuration& s = gen.state(b);
    c.insert(c.end(), s.begin(), s.end());
    return c;
  };

  // BFS over reachable pairs.
  std::map<std::pair<int, int>, int> seen;
  std::vector<std::pair<int, int>> pairs;
  auto visit = [&](int a, int b) {
    auto [it, inserted] = seen.try_emplace({a, b}, static_cast<int>(pairs.size()));
    if (inserted) {
      pairs.emplace_back(a, b);
      if (static_cast<int>(pairs.size()) > max_pairs)
        throw Error("coupled_generator: pair space exceeds cap");
    }
    return it->second;
  };

  struct PairTransition {
    int src, g, gbar, dst;
    double rate;
  };
  std::vector<PairTransition> ptrans;

  auto expand = [&](int idx) {
    auto [a, b] = pairs[idx];
    const CouplingSeed* seed = nullptr;
    for (const auto& s : cr.seeds)
      if (s.state == a && gen.apply_move(a, s.move) == b) {
        seed = &s;
        break;
      }
    if (seed != nullptr) {
      for (const auto& entry : seed->entries) {
        if (entry.rate <= 0) continue;
        int ta = gen.apply_move(a, entry.g);
        int tb = gen.apply_move(b, entry.gbar);
        if (ta == a && tb == b) continue;  // (e,e)-type self loop
        int dst = visit(ta, tb);
        ptrans.push_back({idx, entry.g, entry.gbar, dst, entry.rate});
      }
      return;
    }
    if (a == b) {  // synchronous motion keeps the diagonal absorbing
      for (const auto& tr : gen.transitions(a)) {
        if (tr.target == a) continue;
        int dst = visit(tr.target, tr.target);
        ptrans.push_back({idx, tr.move, tr.move, dst, tr.rate});
      }
      return;
    }
    for (const auto& tr : gen.transitions(a)) {  // independent fallback
      if (tr.target == a) continue;
      int dst = visit(tr.target, b);
      ptrans.push_back({idx, tr.move, e, dst, tr.rate});
    }
    for (const auto& tr : gen.transitions(b)) {
      if (tr.target == b) continue;
      int dst = visit(a, tr.target);
      ptrans.push_back({idx, e, tr.move, dst, tr.rate});
    }
  };

  for (const auto& s : cr.seeds) visit(s.state, gen.apply_move(s.state, s.move));
  for (int idx = 0; idx < static_cast<int>(pairs.size()); ++idx) expand(idx);

  // Product moves labeled by the component move ids.
  std::map<std::pair<int, int>, int> move_index;
  std::vector<Move> pair_moves;
  auto product_move = [&](int g, int gbar) {
    auto [it, inserted] = move_index.try_emplace({g, gbar},
                                                 static_cast<int>(pair_moves.size()));
    if (inserted) {
      const Move& mg = gen.moves()[g];
      const Move& mb = gen.moves()[gbar];
      Move mv;
      mv.id = "(" + mg.id + "," + mb.id + ")";
      mv.inverse_id = "(" + mg.inverse_id + "," + mb.inverse_id + ")";
      pair_moves.push_back(std::move(mv));
    }
    return it->second;
  };
  for (const auto& pt : ptrans) product_move(pt.g, pt.gbar);

  std::vector<Configuration> states(pairs.size(), Configuration(2 * d, 0));
  for (std::size_t i = 0; i < pairs.size(); ++i)
    states[i] = pair_config(pairs[i].first, pairs[i].second);

  Generator coupled(std::move(states), std::move(pair_moves));
  for (const auto& pt : ptrans)
    coupled.add_transition(pt.src, move_index.at({pt.g, pt.gbar}), pt.dst, pt.rate);
  return coupled;
}

namespace {

struct OrganizerTerms {
  double full = 0.0;
  double diagonal = 0.0;
  double gradient_sum = 0.0;     // sum c c_cpl grad_{g,gbar} f^phi m
  double diag_improvement = 0.0; // diagonal convexity terms
  double min_slack = std::numeric_limits<double>::infinity();
};

OrganizerTerms organizer_terms(const Generator& gen, const Measure& m,
                               const CouplingRates& cr, const PhiFamily& phi,
                               std::span<const double> f) {
  OrganizerTerms acc;
  for (const auto& seed : cr.seeds) {
    int eta = seed.state;
    int seta = gen.apply_move(eta, seed.move);
    double c = gen.rate(eta, seed.move);
    double phi_base = phi.big_phi(f[eta], f[seta]);
    auto dp = phi.dbig_phi(f[eta], f[seta]);
    for (const auto& entry : seed.entries) {
      if (entry.rate == 0.0) continue;
      int a = gen.apply_move(eta, entry.g);
      int b = gen.apply_move(seta, entry.gbar);
      double weight = c * entry.rate * m(eta);
      double linear = dp[0] * (f[a] - f[eta]) + dp[1] * (f[b] - f[seta]);
      double jump = phi.big_phi(f[a], f[b]) - phi_base;  // grad_{g,gbar} f^phi
      double slack = jump - linear;
      acc.full += weight * linear;
      acc.gradient_sum += weight * jump;
      acc.min_slack = std::min(acc.min_slack, slack);
      if (a == b) {
        acc.diagonal += weight * linear;
        acc.diag_improvement += weight * slack;
      }
    }
  }
  if (!std::isfinite(acc.min_slack)) acc.min_slack = 0.0;
  return acc;
}

}  // namespace

OrganizerDecomposition organize_terms(const Generator& gen, const Measure& m,
                                      const CouplingRates& cr, const PhiFamily& phi,
                                      std::span<const double> f) {
  auto adm = check_admissible(cr, gen);
  if (!adm.passed)
    throw InadmissibleCouplingError("organize_terms: coupling fails Def. 1.1");
  for (double x : f)
    if (!(x > 0)) throw NonPositiveFError("organize_terms: f must be positive");
  auto terms = organizer_terms(gen, m, cr, phi, f);
  OrganizerDecomposition out;
  out.full_derivative = terms.full;
  out.diagonal_part = terms.diagonal;
  out.off_part = terms.full - terms.diagonal;
  out.bound = terms.gradient_sum - terms.diag_improvement;
  out.min_convexity_slack = terms.min_slack;
  return out;
}

SufficientConditionReport verify_sufficient_condition(
    const Generator& gen, const Measure& m, const CouplingRates& cr,
    const std::vector<PhiFamily>& phi_list, int num_f, std::uint64_t seed) {
  auto adm = check_admissible(cr, gen);
  if (!adm.passed)
    throw InadmissibleCouplingError("verify_sufficient_condition: inadmissible");
  const int e = gen.null_move_index();
  SufficientConditionReport report;
  report.kappa_two_prime = std::numeric_limits<double>::infinity();
  report.kappa_three_prime = std::numeric_limits<double>::infinity();
  for (const auto& s : cr.seeds) {
    int inv = gen.inverse_move(s.move);
    double matched = std::min(s.rate_of(s.move, e), inv >= 0 ? s.rate_of(e, inv) : 0.0);
    report.kappa_two_prime = std::min(report.kappa_two_prime, matched);
    int seta = gen.apply_move(s.state, s.move);
    double merging = 0.0;
    for (const auto& entry : s.entries)
      if (gen.apply_move(s.state, entry.g) == gen.apply_move(seta, entry.gbar))
        merging += entry.rate;
    report.kappa_three_prime = std::min(report.kappa_three_prime, merging);
  }
  if (cr.seeds.empty()) report.kappa_two_prime = report.kappa_three_prime = 0.0;

  for (const auto& phi : phi_list) {
    SufficientConditionReport::PerPhi row;
    row.phi = phi.name();
    row.alpha = phi.is_alpha() ? phi.alpha_value() : 0.0;
    std::vector<double> ratios(num_f);
    parallel_for(num_f, [&](long i) {
      Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
      auto f = rng.positive_vector(gen.size());
      auto terms = organizer_terms(gen, m, cr, phi, f);
      double energy = dirichlet_phi(gen, m, phi, f);
      ratios[i] = -terms.gradient_sum / (2.0 * energy);
    });
    row.kappa_prime_emp = *std::min_element(ratios.begin(), ratios.end());
    row.kappa_phi = row.kappa_prime_emp;
    row.kappa_1 = row.kappa_prime_emp + 2.0 * report.kappa_two_prime;
    row.kappa_alpha = phi.is_alpha()
                          ? row.kappa_prime_emp +
                                (phi.alpha_value() - 1.0) * report.kappa_three_prime
                          : row.kappa_prime_emp;
    report.per_phi.push_back(std::move(row));
  }
  return report;
}

nlohmann::json coupling_to_json(const CouplingRates& cr, const Generator& gen) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& seed : cr.seeds) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : seed.entries)
      entries.push_back({gen.moves()[e.g].id, gen.moves()[e.gbar].id, e.rate});
    j.push_back({{"eta", seed.state},
                 {"sigma", gen.moves()[seed.move].id},
                 {"entries", entries}});
  }
  return j;
}

}  // namespace entrolab
