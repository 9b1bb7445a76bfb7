#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "entrolab/errors.hpp"

#include <nlohmann/json_fwd.hpp>

namespace entrolab {

/// An integer occupation/spin vector of fixed length d.
using Configuration = std::vector<int>;

/// A deterministic state map together with its inverse label. `apply` may be
/// empty for generators reconstructed from serialized transition tables.
struct Move {
  std::string id;
  std::string inverse_id;
  std::function<Configuration(const Configuration&)> apply;

  bool is_null() const { return id == "e"; }
};

/// The null move e: identity on every configuration, its own inverse.
Move null_move();

struct Transition {
  int move;
  int target;  // equals the source index when the move acts as identity
  double rate;
};

/// How build_generator treats a move whose image is not an enumerated state.
enum class BoundaryPolicy {
  Error,     // TargetOutsideSpace
  Identity,  // move acts as identity, rate retained (localization convention)
};

/// A finite continuous-time Markov chain: enumerated states, a move set G*
/// and per-state transition lists. Immutable after construction; safe to
/// share read-only across threads.
class Generator {
 public:
  Generator() = default;
  Generator(std::vector<Configuration> states, std::vector<Move> moves);

  int size() const { return static_cast<int>(states_.size()); }
  int dim() const { return states_.empty() ? 0 : static_cast<int>(states_[0].size()); }
  const std::vector<Configuration>& states() const { return states_; }
  const Configuration& state(int i) const { return states_[i]; }
  int index_of(const Configuration& c) const;  // -1 if absent

  const std::vector<Move>& moves() const { return moves_; }
  int move_index(const std::string& id) const;  // -1 if absent
  int null_move_index() const { return null_move_; }
  int inverse_move(int m) const;  // -1 if the inverse id is not in the set

  const std::vector<Transition>& transitions(int s) const { return transitions_[s]; }
  int transition_count() const;

  /// Rate c(eta, sigma); includes identity-acting entries retained by
  /// truncation. 0 when no entry exists.
  double rate(int s, int m) const;

  /// Image of state s under move m: recorded target if a transition exists,
  /// otherwise the move map (identity if it leaves the space or is absent).
  int apply_move(int s, int m) const;

  double exit_rate(int s) const;  // sum over real jumps out of s
  double max_exit_rate() const;

  void add_transition(int s, int m, int t, double rate);

 private:
  std::vector<Configuration> states_;
  std::map<Configuration, int> index_;
  std::vector<Move> moves_;
  int null_move_ = -1;
  std::vector<std::vector<Transition>> transitions_;
};

/// Probability weights indexed by Generator states.
struct Measure {
  std::vector<double> weights;

  double operator()(int i) const { return weights[i]; }
  int size() const { return static_cast<int>(weights.size()); }
};

/// Normalize exp(log_w) into a Measure.
Measure measure_from_log_weights(const std::vector<double>& log_w);

Generator build_generator(
    std::vector<Configuration> states, std::vector<Move> moves,
    const std::function<double(const Configuration&, const Move&)>& rate_fn,
    BoundaryPolicy policy = BoundaryPolicy::Error);

/// A model on N^d described by moves, a rate function and an unnormalized
/// log reversible weight; truncate() localizes it to the box {0..n}^d.
struct LatticeModel {
  int d = 1;
  std::vector<Move> moves;
  std::function<double(const Configuration&, const Move&)> rate_fn;
  std::function<double(const Configuration&)> log_weight;
};

/// Localized chain on Omega^n = {eta : eta_i <= n}. Out-of-box moves act as
/// identity with their rate retained; in-box rates equal the model's.
Generator truncate(const LatticeModel& model, int n);

/// Conditioned reversible measure of a truncated LatticeModel.
Measure truncated_measure(const LatticeModel& model, const Generator& gen);

/// Invariant vector of the rate matrix, normalized. Throws Reducible if the
/// numerical null space is not one-dimensional.
Measure stationary_measure(const Generator& gen);

struct ReversibilityReport {
  double max_violation = 0.0;
  int worst_state = -1;
  int worst_move = -1;
  bool passed = true;
};

/// Detailed balance sweep: max over positive-rate transitions of
/// |m(eta)c(eta,s) - m(s eta)c(s eta, s^-1)|.
ReversibilityReport check_reversibility(const Generator& gen, const Measure& m,
                                        double tol = 1e-10);

namespace serial {
std::vector<double> apply_generator(const Generator& gen, std::span<const double> f);
std::vector<double> evolve(const Generator& gen, std::span<const double> f, double t,
                           double tol);
}  // namespace serial

/// (Lf)(eta) = sum_sigma c(eta,sigma)(f(sigma eta) - f(eta)).
std::vector<double> apply_generator(const Generator& gen, std::span<const double> f);

/// S_t f by uniformization: Poisson mixture of powers of P = I + Q/Lambda,
/// truncated when the Poisson tail drops below tol. Positivity preserving.
std::vector<double> evolve(const Generator& gen, std::span<const double> f, double t,
                           double tol);

/// Law evolution (adjoint kernel): weights of mu S_t at uniformization
/// tolerance tol. Mass deficit beyond 1e-9 raises MassLeak.
std::vector<double> evolve_law(const Generator& gen, std::span<const double> law,
                               double t, double tol);

nlohmann::json generator_to_json(const Generator& gen);
Generator generator_from_json(const nlohmann::json& j);

}  // namespace entrolab
