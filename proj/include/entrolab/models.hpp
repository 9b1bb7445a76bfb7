#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "entrolab/chain.hpp"
#include "entrolab/coupling.hpp"
#include "entrolab/phi.hpp"

namespace entrolab {

struct Graph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;

  static Graph cycle(int length);
  static Graph single_edge();

  std::vector<std::vector<int>> adjacency() const;
  int max_degree() const;
  bool connected() const;
  void validate() const;  // simple, connected, at least two vertices
};

/// Certified decay constants of a model family, with the per-phi constants
/// the family's decay theory implies: kappa_phi = kappa, kappa_1 as stated,
/// kappa_alpha(a) = alpha_slope * a + alpha_offset.
struct KappaReport {
  double kappa = std::numeric_limits<double>::quiet_NaN();
  double kappa_bar = std::numeric_limits<double>::quiet_NaN();
  double kappa_1 = std::numeric_limits<double>::quiet_NaN();
  double alpha_slope = 0.0;
  double alpha_offset = 0.0;
  bool hypotheses_ok = true;
  std::string failed_hypothesis;

  double kappa_phi() const { return kappa; }
  double kappa_alpha(double alpha) const { return alpha_slope * alpha + alpha_offset; }
  /// Constant claimed for the given phi: kappa_1 for phi_1, kappa_alpha for
  /// the alpha family, kappa for anything else satisfying H2.
  double for_phi(const PhiFamily& phi) const;
};

/// Untruncated rate formulas of an interacting random walk; the coupling
/// tables and curvature gradients always evaluate these, never the stored
/// transition table, so walls do not distort them.
struct IrwModel {
  int d = 1;
  int n = 1;
  std::function<double(const Configuration&, int)> rate_plus;   // c(eta, gamma_i^+)
  std::function<double(const Configuration&, int)> rate_minus;  // c(eta, gamma_i^-)
  std::function<double(const Configuration&)> log_weight;       // -V+ - V-

  double rate(const Configuration& eta, int coord, bool plus) const {
    return plus ? rate_plus(eta, coord) : rate_minus(eta, coord);
  }
  // grad_i^+ c(eta, gamma_j^{+/-}) as an exact difference of rate values.
  double grad_plus(const Configuration& eta, int i, int j, bool plus) const;
  double kappa_plus(const Configuration& eta, int i) const;
  double kappa_minus(const Configuration& eta, int i) const;
};

struct IrwKappaTables {
  struct Row {
    Configuration eta;
    int coord;
    double kplus, kminus;
    bool interior;
  };
  std::vector<Row> rows;
  double kappa_interior = std::numeric_limits<double>::infinity();
  double kappa_boundary = std::numeric_limits<double>::infinity();
  bool h33_ok = true;  // all kappa+ and kappa- nonnegative on the scanned box
};

struct ZooInstance {
  std::string name;
  std::string family;
  Generator gen;
  Measure measure;
  CouplingRates coupling;
  KappaReport kappa;

  // family extras; NaN / empty when not applicable
  std::shared_ptr<IrwModel> irw;
  IrwKappaTables irw_tables;
  double kappa_exhaustive = std::numeric_limits<double>::quiet_NaN();
  double kappa_bar_exhaustive = std::numeric_limits<double>::quiet_NaN();
  std::function<double(int)> f_cw;  // Curie-Weiss f_{CW,beta,N}(m)
  double measured_c = std::numeric_limits<double>::quiet_NaN();      // zero range
  double measured_delta = std::numeric_limits<double>::quiet_NaN();  // zero range
};

// ---- interacting random walks (section 3) ----

/// General double-potential walk; constants from the kappa+/kappa- tables.
ZooInstance build_irw(std::function<double(const Configuration&)> vplus,
                      std::function<double(const Configuration&)> vminus, int d, int n,
                      const std::string& name = "irw");

/// V+ = V, V- = sum_i log(lambda) eta_i + log(eta_i!): rates exp(-grad V),
/// lambda eta_i with reversible measure exp(-V) times Poisson weights.
ZooInstance build_irw_poisson(std::function<double(const Configuration&)> v,
                              double lambda, int d, int n,
                              const std::string& name = "irw-poisson");

/// Symmetric interaction V(eta) = beta h(|eta|); closed-form constant
/// kappa = inf_m lambda - (d-2)[exp(-beta grad h(m)) - exp(-beta grad h(m+1))].
ZooInstance build_irw_symmetric(std::function<double(int)> h, double beta,
                                double lambda, int d, int n,
                                const std::string& name = "irw-symmetric");

IrwKappaTables irw_kappas(const IrwModel& model);

struct OddlyConvexReport {
  KappaReport report;
  double kappa_scan = 0.0;     // infimum of the per-state expression on the box
  bool origin_condition = false;
  double kappa_origin = 0.0;   // min_i lambda - sum_{j != i} exp(-grad_j V(0))
};

/// Pointwise-nonnegative mixed increments plus a local condition at the
/// origin; throws HessianSignViolation if some mixed increment is negative.
OddlyConvexReport oddly_convex_kappa(
    const std::function<double(const Configuration&)>& v, double lambda, int d, int n);

struct TildeH {
  int m_eps = 0;
  std::function<double(int)> h;  // the surgered potential
  bool verified = false;         // grad+ exp(-beta grad+ h~) >= -eps/(d-1)
};

/// Linearizes h below the smallest M beyond which h is convex and the
/// rate decrements stay above -eps/(d-1). NoSuchM if the scan cap is hit.
TildeH tilde_h(const std::function<double(int)>& h, double beta, int d, double eps,
               int scan_cap = 4096, int window = 64);

// ---- Glauber dynamics (section 4) ----

/// Spin flips with rates exp(-(beta/2) grad_sigma H); kappa(eta, sigma) per
/// the spin curvature formula, constants from the exhaustive infimum.
ZooInstance build_glauber(const std::function<double(const Configuration&)>& h,
                          double beta, int sites,
                          const std::string& name = "glauber");

ZooInstance curie_weiss(int sites, double beta);
/// Largest beta with (N-1)(exp(2 beta/N) - 1) <= 1.
double curie_weiss_boundary_beta(int sites);

ZooInstance ising(const Graph& graph, double beta);
/// Root of 2d(1 - exp(-2 beta)) exp(4 d beta) = 1.
double ising_boundary_beta(int dim);

// ---- classical models (section 5) ----

ZooInstance hardcore(const Graph& graph, double rho);

ZooInstance bernoulli_laplace(int sites, int particles);

/// Per-site expulsion rates c_x; constants from the measured increment range
/// [c, c+delta] on occupations up to N.
ZooInstance zero_range(int sites, int particles,
                       const std::vector<std::function<double(int)>>& site_rates);
ZooInstance zero_range_linear(int sites, int particles);

/// Spin cancellation sum of the organizing lemma: exactly zero in exact
/// arithmetic for reversible spin systems.
double spin_cancellation_sum(const Generator& gen, const Measure& m,
                             const PhiFamily& phi, std::span<const double> f);

/// Zero-range neutral-term sum: exactly zero in exact arithmetic.
double zero_range_neutral_sum(const ZooInstance& zr, const PhiFamily& phi,
                              std::span<const double> f);

}  // namespace entrolab
