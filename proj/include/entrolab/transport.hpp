#pragma once

#include <array>
#include <span>
#include <vector>

#include "entrolab/chain.hpp"
#include "entrolab/models.hpp"

namespace entrolab {

/// l1 distance on configurations: sum_i |eta_i - etabar_i|.
int graph_distance(const Configuration& a, const Configuration& b);

/// Probability weights over Generator states.
struct DiscreteLaw {
  std::vector<double> weights;

  static DiscreteLaw dirac(const Generator& gen, int state);
  double mass() const;
};

struct PlanEntry {
  int src, dst;
  double mass;
};

struct TransportPlan {
  std::vector<PlanEntry> entries;
  double p = 1.0;
  double cost = 0.0;  // sum mass * d(src,dst)^p

  double marginal_residual(const Generator& gen, const DiscreteLaw& mu,
                           const DiscreteLaw& nu) const;
};

struct WassersteinResult {
  double value = 0.0;  // cost^(1/p)
  TransportPlan plan;
};

/// Exact transportation LP (successive shortest augmenting paths on the
/// bipartite support graph) with cost d^p. No regularization.
WassersteinResult wasserstein_p(const Generator& gen, const DiscreteLaw& mu,
                                const DiscreteLaw& nu, double p,
                                int support_cap = 2000);

/// One-jump approximation: (1 - t sum_g c(eta,g)) delta_eta + t sum
/// c(eta,g) delta_{g eta}. Requires t * total rate <= 1.
DiscreteLaw one_jump_law(const Generator& gen, int state, double t);

struct NeighborCoupling {
  TransportPlan plan;
  DiscreteLaw mu_bar, nu_bar;  // one-jump laws of eta and gamma_i^+ eta
};

/// The explicit six-branch optimal coupling between the one-jump laws of a
/// neighbor pair (eta, gamma_i^+ eta); its d^p cost equals
/// 1 - t (kappa+ + kappa-) for every p.
NeighborCoupling neighbor_optimal_coupling(const ZooInstance& irw,
                                           const Configuration& eta, int coord,
                                           double t);

struct CyclicalReport {
  bool passed = true;
  double worst_slack = 0.0;               // min of rhs - lhs over pairs
  std::array<int, 4> violation{-1, -1, -1, -1};  // src1,dst1,src2,dst2
};

/// Pairwise cyclical monotonicity of the support:
/// d^p(x1,y1) + d^p(x2,y2) <= d^p(x2,y1) + d^p(x1,y2) + 1e-12.
CyclicalReport check_cyclical_monotonicity(const Generator& gen,
                                           const TransportPlan& plan, double p);

struct ContractionReport {
  struct Row {
    double t, wp, bound, ratio;
  };
  std::vector<Row> rows;
  double w0 = 0.0;
  double kappa_emp = 0.0;  // -p * slope of log W_p vs t
  double mass_leak = 0.0;  // largest wall mass seen along the grid
  bool passed = true;
};

/// Evolves both laws with uniformization (tolerance 1e-12), computes exact
/// W_p at each t and compares with exp(-kappa t / p) W_p(mu, nu).
ContractionReport contraction_check(const ZooInstance& irw, const DiscreteLaw& mu,
                                    const DiscreteLaw& nu, double p,
                                    std::span<const double> t_grid);

/// CSV rows "src_state,dst_state,mass,distance"; states printed as
/// space-separated occupation vectors.
std::vector<std::string> plan_to_csv(const Generator& gen, const TransportPlan& plan);

}  // namespace entrolab
