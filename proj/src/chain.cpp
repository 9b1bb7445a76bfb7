#include "entrolab/chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "entrolab/parallel.hpp"

namespace entrolab {

Move null_move() {
  return Move{"e", "e", [](const Configuration& c) { return c; }};
}

Generator::Generator(std::vector<Configuration> states, std::vector<Move> moves)
    : states_(std::move(states)), moves_(std::move(moves)) {
  for (int i = 0; i < static_cast<int>(states_.size()); ++i) {
    if (!states_[i].empty() && states_[i].size() != states_[0].size())
      throw DimensionMismatchError("Generator: states have mixed dimensions");
    index_[states_[i]] = i;
  }
  if (index_.size() != states_.size())
    throw Error("Generator: duplicate states in enumeration");
  for (int m = 0; m < static_cast<int>(moves_.size()); ++m)
    if (moves_[m].is_null()) null_move_ = m;
  transitions_.resize(states_.size());
}

int Generator::index_of(const Configuration& c) const {
  auto it = index_.find(c);
  return it == index_.end() ? -1 : it->second;
}

int Generator::move_index(const std::string& id) const {
  for (int m = 0; m < static_cast<int>(moves_.size()); ++m)
    if (moves_[m].id == id) return m;
  return -1;
}

int Generator::inverse_move(int m) const { return move_index(moves_[m].inverse_id); }

double Generator::rate(int s, int m) const {
  for (const auto& tr : transitions_[s])
    if (tr.move == m) return tr.rate;
  return 0.0;
}

int Generator::apply_move(int s, int m) const {
  for (const auto& tr : transitions_[s])
    if (tr.move == m) return tr.target;
  if (m == null_move_) return s;
  if (moves_[m].apply) {
    int t = index_of(moves_[m].apply(states_[s]));
    return t >= 0 ? t : s;
  }
  return s;
}

double Generator::exit_rate(int s) const {
  double total = 0.0;
  for (const auto& tr : transitions_[s])
    if (tr.target != s) total += tr.rate;
  return total;
}

double Generator::max_exit_rate() const {
  double lambda = 0.0;
  for (int s = 0; s < size(); ++s) lambda = std::max(lambda, exit_rate(s));
  return lambda;
}

int Generator::transition_count() const {
  int n = 0;
  for (const auto& ts : transitions_) n += static_cast<int>(ts.size());
  return n;
}

void Generator::add_transition(int s, int m, int t, double rate) {
  if (!std::isfinite(rate))
    throw NonFiniteError("add_transition: non-finite rate");
  if (rate < 0)
    throw NegativeRateError("add_transition: negative rate at state " +
                            std::to_string(s) + ", move " + moves_[m].id);
  transitions_[s].push_back(Transition{m, t, rate});
}

Generator build_generator(
    std::vector<Configuration> states, std::vector<Move> moves,
    const std::function<double(const Configuration&, const Move&)>& rate_fn,
    BoundaryPolicy policy) {
  Generator gen(std::move(states), std::move(moves));
  for (int s = 0; s < gen.size(); ++s) {
    const Configuration& eta = gen.state(s);
    for (int m = 0; m < static_cast<int>(gen.moves().size()); ++m) {
      const Move& mv = gen.moves()[m];
      double r = rate_fn(eta, mv);
      if (!std::isfinite(r))
        throw NonFiniteError("build_generator: non-finite rate at move " + mv.id);
      if (r < 0)
        throw NegativeRateError("build_generator: negative rate " +
                                std::to_string(r) + " at state " +
                                std::to_string(s) + ", move " + mv.id);
      if (r == 0) continue;
      if (mv.is_null()) {
        gen.add_transition(s, m, s, r);
        continue;
      }
      Configuration image = mv.apply(eta);
      if (image == eta) continue;  // natural identity action carries no jump
      int t = gen.index_of(image);
      if (t < 0) {
        if (policy == BoundaryPolicy::Error)
          throw TargetOutsideSpaceError("build_generator: move " + mv.id +
                                        " leaves the state space at state " +
                                        std::to_string(s));
        gen.add_transition(s, m, s, r);  // suppressed jump, rate retained
        continue;
      }
      gen.add_transition(s, m, t, r);
    }
  }
  return gen;
}

namespace {

std::vector<Configuration> enumerate_box(int d, int n) {
  std::vector<Configuration> states;
  Configuration c(d, 0);
  while (true) {
    states.push_back(c);
    int k = d - 1;
    while (k >= 0 && c[k] == n) c[k--] = 0;
    if (k < 0) break;
    ++c[k];
  }
  std::sort(states.begin(), states.end());
  return states;
}

}  // namespace

Generator truncate(const LatticeModel& model, int n) {
  if (n < 1) throw InvalidParamsError("truncate: box size must be >= 1");
  auto states = enumerate_box(model.d, n);
  return build_generator(std::move(states), model.moves, model.rate_fn,
                         BoundaryPolicy::Identity);
}

Measure measure_from_log_weights(const std::vector<double>& log_w) {
  double top = -std::numeric_limits<double>::infinity();
  for (double w : log_w) top = std::max(top, w);
  Measure m;
  m.weights.resize(log_w.size());
  double z = 0.0;
  for (std::size_t i = 0; i < log_w.size(); ++i) {
    m.weights[i] = std::exp(log_w[i] - top);
    z += m.weights[i];
  }
  for (auto& w : m.weights) w /= z;
  return m;
}

Measure truncated_measure(const LatticeModel& model, const Generator& gen) {
  std::vector<double> log_w(gen.size());
  for (int s = 0; s < gen.size(); ++s) log_w[s] = model.log_weight(gen.state(s));
  return measure_from_log_weights(log_w);
}

Measure stationary_measure(const Generator& gen) {
  const int n = gen.size();
  if (n == 0) throw ReducibleError("stationary_measure: empty state space");
  Eigen::MatrixXd qt = Eigen::MatrixXd::Zero(n, n);  // Q^T
  for (int s = 0; s < n; ++s) {
    for (const auto& tr : gen.transitions(s)) {
      if (tr.target == s) continue;
      qt(tr.target, s) += tr.rate;
      qt(s, s) -= tr.rate;
    }
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(qt);
  lu.setThreshold(1e-9 * std::max(1.0, gen.max_exit_rate()));
  if (lu.dimensionOfKernel() != 1)
    throw ReducibleError("stationary_measure: null space dimension " +
                         std::to_string(lu.dimensionOfKernel()));
  Eigen::VectorXd v = lu.kernel().col(0);
  if (v.sum() < 0) v = -v;
  double total = v.sum();
  Measure m;
  m.weights.resize(n);
  for (int i = 0; i < n; ++i) m.weights[i] = v(i) / total;

  double residual = 0.0;
  for (int j = 0; j < n; ++j) {
    double row = 0.0;
    for (int i = 0; i < n; ++i) row += m.weights[i] * qt(j, i);
    residual = std::max(residual, std::abs(row));
  }
  if (residual > 1e-10)
    throw ReducibleError("stationary_measure: residual " + std::to_string(residual));
  return m;
}

ReversibilityReport check_reversibility(const Generator& gen, const Measure& m,
                                        double tol) {
  ReversibilityReport report;
  for (int s = 0; s < gen.size(); ++s) {
    for (const auto& tr : gen.transitions(s)) {
      if (tr.target == s || tr.rate <= 0) continue;
      int inv = gen.inverse_move(tr.move);
      if (inv < 0)
        throw MissingInverseError("check_reversibility: move " +
                                  gen.moves()[tr.move].id + " has no inverse");
      double forward = m(s) * tr.rate;
      double backward = m(tr.target) * gen.rate(tr.target, inv);
      double violation = std::abs(forward - backward);
      if (violation > report.max_violation) {
        report.max_violation = violation;
        report.worst_state = s;
        report.worst_move = tr.move;
      }
    }
  }
  report.passed = report.max_violation <= tol;
  return report;
}

namespace serial {

std::vector<double> apply_generator(const Generator& gen, std::span<const double> f) {
  if (static_cast<int>(f.size()) != gen.size())
    throw DimensionMismatchError("apply_generator: f has wrong length");
  std::vector<double> out(gen.size(), 0.0);
  for (int s = 0; s < gen.size(); ++s) {
    double acc = 0.0;
    for (const auto& tr : gen.transitions(s))
      if (tr.target != s) acc += tr.rate * (f[tr.target] - f[s]);
    out[s] = acc;
  }
  return out;
}

}  // namespace serial

std::vector<double> apply_generator(const Generator& gen, std::span<const double> f) {
  if (static_cast<int>(f.size()) != gen.size())
    throw DimensionMismatchError("apply_generator: f has wrong length");
  std::vector<double> out(gen.size(), 0.0);
  parallel_for(gen.size(), [&](long s) {
    double acc = 0.0;
    for (const auto& tr : gen.transitions(s))
      if (tr.target != static_cast<int>(s)) acc += tr.rate * (f[tr.target] - f[s]);
    out[s] = acc;
  });
  return out;
}

namespace {

// One uniformization sweep with Lambda*t <= split threshold. `transpose`
// applies P^T (law evolution) instead of P.
template <bool Transpose>
std::vector<double> uniformize(const Generator& gen, std::span<const double> f,
                               double t, double tol, double lambda) {
  const int n = gen.size();
  std::vector<double> acc(f.begin(), f.end());
  if (lambda <= 0.0 || t == 0.0) return acc;

  const double lt = lambda * t;
  std::vector<double> cur(f.begin(), f.end()), next(n);
  double weight = std::exp(-lt);  // Poisson(lt) at k = 0
  double cumulative = weight;
  for (int i = 0; i < n; ++i) acc[i] = weight * cur[i];
  for (int k = 1; cumulative < 1.0 - tol; ++k) {
    // next = P cur  (or P^T cur), P = I + Q/lambda
    if constexpr (Transpose) {
      parallel_for(n, [&](long s) { next[s] = cur[s] * (1.0 - gen.exit_rate(s) / lambda); });
      for (int s = 0; s < n; ++s)
        for (const auto& tr : gen.transitions(s))
          if (tr.target != s) next[tr.target] += (tr.rate / lambda) * cur[s];
    } else {
      parallel_for(n, [&](long s) {
        double acc_s = cur[s];
        for (const auto& tr : gen.transitions(s))
          if (tr.target != static_cast<int>(s))
            acc_s += (tr.rate / lambda) * (cur[tr.target] - cur[s]);
        next[s] = acc_s;
      });
    }
    std::swap(cur, next);
    weight *= lt / k;
    cumulative += weight;
    for (int i = 0; i < n; ++i) acc[i] += weight * cur[i];
    if (k > 10 * (lt + 50)) break;  // tail stalls only if tol underflows
  }
  return acc;
}

template <bool Transpose>
std::vector<double> evolve_impl(const Generator& gen, std::span<const double> f,
                                double t, double tol) {
  if (t < 0) throw InvalidParamsError("evolve: negative time");
  if (tol <= 0) throw InvalidParamsError("evolve: tolerance must be positive");
  if (static_cast<int>(f.size()) != gen.size())
    throw DimensionMismatchError("evolve: f has wrong length");
  double lambda = gen.max_exit_rate();
  if (!std::isfinite(lambda)) throw NonFiniteError("evolve: infinite exit rate");
  std::vector<double> cur(f.begin(), f.end());
  if (t == 0.0 || lambda == 0.0) return cur;

  // Split so the Poisson weights stay representable.
  int chunks = std::max(1, static_cast<int>(std::ceil(lambda * t / 500.0)));
  double dt = t / chunks;
  double chunk_tol = tol / chunks;
  for (int c = 0; c < chunks; ++c)
    cur = uniformize<Transpose>(gen, cur, dt, chunk_tol, lambda);
  return cur;
}

}  // namespace

namespace serial {

std::vector<double> evolve(const Generator& gen, std::span<const double> f, double t,
                           double tol) {
  int saved = job_override();
  set_jobs(1);
  auto out = entrolab::evolve(gen, f, t, tol);
  set_jobs(saved);
  return out;
}

}  // namespace serial

std::vector<double> evolve(const Generator& gen, std::span<const double> f, double t,
                           double tol) {
  return evolve_impl<false>(gen, f, t, tol);
}

std::vector<double> evolve_law(const Generator& gen, std::span<const double> law,
                               double t, double tol) {
  auto out = evolve_impl<true>(gen, law, t, tol);
  double total = 0.0;
  for (double w : out) total += w;
  double deficit = std::abs(1.0 - total);
  if (deficit >= 1e-9)
    throw MassLeakError("evolve_law: mass deficit " + std::to_string(deficit));
  for (auto& w : out) w /= total;
  return out;
}

nlohmann::json generator_to_json(const Generator& gen) {
  nlohmann::json j;
  j["states"] = gen.states();
  auto& moves = j["moves"] = nlohmann::json::array();
  for (const auto& mv : gen.moves())
    moves.push_back({{"id", mv.id}, {"inverse", mv.inverse_id}});
  auto& trans = j["transitions"] = nlohmann::json::array();
  for (int s = 0; s < gen.size(); ++s)
    for (const auto& tr : gen.transitions(s))
      trans.push_back({s, tr.move, tr.target, tr.rate});
  return j;
}

Generator generator_from_json(const nlohmann::json& j) {
  std::vector<Configuration> states = j.at("states").get<std::vector<Configuration>>();
  std::vector<Move> moves;
  for (const auto& mj : j.at("moves")) {
    Move mv;
    mv.id = mj.at("id").get<std::string>();
    mv.inverse_id = mj.at("inverse").get<std::string>();
    if (mv.is_null()) mv.apply = [](const Configuration& c) { return c; };
    moves.push_back(std::move(mv));
  }
  Generator gen(std::move(states), std::move(moves));
  for (const auto& tj : j.at("transitions"))
    gen.add_transition(tj.at(0).get<int>(), tj.at(1).get<int>(), tj.at(2).get<int>(),
                       tj.at(3).get<double>());
  return gen;
}

}  // namespace entrolab
