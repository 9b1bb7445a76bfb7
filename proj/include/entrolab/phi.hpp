#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "entrolab/chain.hpp"

namespace entrolab {

/// A convex entropy kernel phi with the two-argument form
/// Phi(a,b) = (phi'(b) - phi'(a))(b - a) and its Jacobian. The alpha family
/// interpolates MLSI (alpha = 1) and Poincare (alpha = 2).
class PhiFamily {
 public:
  static PhiFamily alpha(double a);
  static PhiFamily custom(std::string name, std::function<double(double)> phi,
                          std::function<double(double)> dphi,
                          std::function<double(double)> d2phi,
                          std::function<double(double)> d3phi = nullptr);

  double phi(double a) const;
  double dphi(double a) const;
  double d2phi(double a) const;

  double big_phi(double a, double b) const;
  /// [d/da Phi, d/db Phi]
  std::array<double, 2> dbig_phi(double a, double b) const;
  /// Row-major 2x2 Hessian of Phi; finite differences when phi''' is unknown.
  std::array<double, 4> hess_big_phi(double a, double b) const;

  bool is_alpha() const { return is_alpha_; }
  double alpha_value() const { return alpha_; }
  const std::string& name() const { return name_; }

 private:
  PhiFamily() = default;
  static void check_domain(double a);

  bool is_alpha_ = false;
  double alpha_ = 0.0;
  std::string name_;
  std::function<double(double)> phi_, dphi_, d2phi_, d3phi_;
};

/// H^phi(f|m) = sum phi(f) m - phi(sum f m). Nonnegative by Jensen.
double phi_entropy(std::span<const double> f, const Measure& m, const PhiFamily& phi);

/// E(f,g) = -sum g (Lf) m, cross-checked against the symmetric gradient form
/// (the reversibility identity); FormMismatch beyond 1e-9 relative.
double dirichlet_form(const Generator& gen, const Measure& m, std::span<const double> f,
                      std::span<const double> g);

/// E(phi'(f), f) evaluated as (1/2) sum c(eta,sigma) Phi(f, f o sigma) m.
double dirichlet_phi(const Generator& gen, const Measure& m, const PhiFamily& phi,
                     std::span<const double> f);

struct LemmaA1Report {
  double alpha = 0.0;
  int samples = 0;
  double min_hessian_eig_rel = 0.0;  // min eigenvalue over ||Hess||
  double min_beckner_slack = 0.0;    // relative to the inequality scale
  double min_mlsi_slack = 0.0;       // alpha = 1 only; 0 otherwise
  bool passed = false;
};

/// Samples (a,b,a') log-uniform on (1e-3, 1e3) and checks convexity of
/// Phi_alpha plus the Beckner/MLSI improvement inequalities.
LemmaA1Report check_lemma_A1(double alpha, int num_samples, std::uint64_t seed);

struct EntropyReport {
  double entropy = 0.0;
  double dirichlet = 0.0;
  double slack = 0.0;
  bool passed = false;
};

/// slack = E(phi'(f), f) - kappa H^phi(f|m); passes if >= -1e-9 max(1, E).
EntropyReport csi_check(const Generator& gen, const Measure& m, const PhiFamily& phi,
                        double kappa, std::span<const double> f);

/// (t, H^phi(S_t f | m)) along t_grid.
std::vector<std::pair<double, double>> decay_curve(const Generator& gen,
                                                   const Measure& m,
                                                   const PhiFamily& phi,
                                                   std::span<const double> f,
                                                   std::span<const double> t_grid,
                                                   double tol);

struct DecayFit {
  double rate = 0.0;      // kappa estimate: -slope of log H vs t
  double residual = 0.0;  // max abs residual of the fit
};

DecayFit fit_decay_rate(const std::vector<std::pair<double, double>>& curve);

struct BestConstantOptions {
  int restarts = 8;
  int steps = 400;
  std::uint64_t seed = 1;
  int state_cap = 5000;
};

struct BestConstantEstimate {
  double value = 0.0;
  bool converged = true;
  std::string method;  // "eigen" (phi2, exact 2*gap) or "projected-gradient"
};

/// phi2: exactly 2 lambda_1 of -L in the m-inner product. Otherwise a
/// projected-gradient upper bound on the optimal kappa_phi.
BestConstantEstimate estimate_best_constant(const Generator& gen, const Measure& m,
                                            const PhiFamily& phi,
                                            const BestConstantOptions& opts = {});

/// Smallest nonzero eigenvalue of -L in the m-weighted inner product.
double spectral_gap(const Generator& gen, const Measure& m);

struct SecondDerivativeOptions {
  bool cross_validate = true;
  double fd_step = 1e-4;
  double fd_rtol = 1e-5;
  double evolve_tol = 1e-13;
};

struct DerivativeProbe {
  std::vector<double> f_mid;  // S_{3h} f, the stencil midpoint
  double finite_difference;   // seven-point centered estimate of d/dt 2E at 3h
};

/// Centered finite difference of t -> 2E(phi'(f_t), f_t) with step h: the
/// seven-point stencil at t0 = 3h keeps the evaluation inside t >= 0.
DerivativeProbe dirichlet_derivative_probe(const Generator& gen, const Measure& m,
                                           const PhiFamily& phi,
                                           std::span<const double> f, double step,
                                           double evolve_tol);

/// d/dt 2E(phi'(f_t), f_t) at t=0:
///   sum c(eta,sigma) DPhi(f(eta), f(sigma eta)) . (Lf(eta), Lf(sigma eta)) m(eta),
/// cross-validated against a centered finite difference of the evolved form.
double entropy_second_derivative(const Generator& gen, const Measure& m,
                                 const PhiFamily& phi, std::span<const double> f,
                                 const SecondDerivativeOptions& opts = {});

}  // namespace entrolab
