#include "entrolab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>

#include "entrolab/phi.hpp"

namespace entrolab {

int graph_distance(const Configuration& a, const Configuration& b) {
  if (a.size() != b.size())
    throw DimensionMismatchError("graph_distance: dimension mismatch");
  int d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

DiscreteLaw DiscreteLaw::dirac(const Generator& gen, int state) {
  DiscreteLaw law;
  law.weights.assign(gen.size(), 0.0);
  law.weights.at(state) = 1.0;
  return law;
}

double DiscreteLaw::mass() const {
  double total = 0.0;
  for (double w : weights) total += w;
  return total;
}

double TransportPlan::marginal_residual(const Generator& gen, const DiscreteLaw& mu,
                                        const DiscreteLaw& nu) const {
  std::vector<double> row(gen.size(), 0.0), col(gen.size(), 0.0);
  for (const auto& e : entries) {
    row[e.src] += e.mass;
    col[e.dst] += e.mass;
  }
  double residual = 0.0;
  for (int i = 0; i < gen.size(); ++i) {
    residual = std::max(residual, std::abs(row[i] - mu.weights[i]));
    residual = std::max(residual, std::abs(col[i] - nu.weights[i]));
  }
  return residual;
}

WassersteinResult wasserstein_p(const Generator& gen, const DiscreteLaw& mu,
                                const DiscreteLaw& nu, double p, int support_cap) {
  if (p < 1.0) throw InvalidParamsError("wasserstein_p: p must be >= 1");
  if (static_cast<int>(mu.weights.size()) != gen.size() ||
      static_cast<int>(nu.weights.size()) != gen.size())
    throw DimensionMismatchError("wasserstein_p: laws must index generator states");
  if (std::abs(mu.mass() - nu.mass()) > 1e-9)
    throw InfeasibleMarginalsError("wasserstein_p: masses differ by " +
                                   std::to_string(std::abs(mu.mass() - nu.mass())));

  std::vector<int> src, dst;
  for (int i = 0; i < gen.size(); ++i) {
    if (mu.weights[i] > 0) src.push_back(i);
    if (nu.weights[i] > 0) dst.push_back(i);
  }
  const int ns = static_cast<int>(src.size()), nt = static_cast<int>(dst.size());
  if (ns > support_cap || nt > support_cap)
    throw InvalidParamsError("wasserstein_p: support exceeds cap");

  WassersteinResult result;
  result.plan.p = p;
  if (ns == 0 || nt == 0) return result;

  std::vector<std::vector<double>> cost(ns, std::vector<double>(nt));
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < nt; ++j)
      cost[i][j] = std::pow(graph_distance(gen.state(src[i]), gen.state(dst[j])), p);

  std::vector<double> supply(ns), demand(nt);
  for (int i = 0; i < ns; ++i) supply[i] = mu.weights[src[i]];
  for (int j = 0; j < nt; ++j) demand[j] = nu.weights[dst[j]];

  // Successive shortest paths with potentials; reduced costs stay >= 0 so
  // plain Dijkstra applies. Nodes: 0..ns-1 sources, ns..ns+nt-1 sinks.
  const int n = ns + nt;
  std::vector<double> pot(n, 0.0);
  std::vector<std::vector<double>> flow(ns, std::vector<double>(nt, 0.0));
  const double inf = std::numeric_limits<double>::infinity();

  double remaining = 0.0;
  for (double s : supply) remaining += s;
  int guard = 4 * (ns + nt) + 16;
  while (remaining > 1e-12 && guard-- > 0) {
    std::vector<double> dist(n, inf);
    std::vector<int> parent(n, -1);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> queue;
    for (int i = 0; i < ns; ++i)
      if (supply[i] > 0) {
        dist[i] = 0.0;
        queue.push({0.0, i});
      }
    while (!queue.empty()) {
      auto [d, v] = queue.top();
      queue.pop();
      if (d > dist[v]) continue;
      if (v < ns) {
        for (int j = 0; j < nt; ++j) {
          double rc = cost[v][j] + pot[v] - pot[ns + j];
          if (dist[v] + rc < dist[ns + j] - 1e-15) {
            dist[ns + j] = dist[v] + rc;
            parent[ns + j] = v;
            queue.push({dist[ns + j], ns + j});
          }
        }
      } else {
        int j = v - ns;
        for (int i = 0; i < ns; ++i) {
          if (flow[i][j] <= 0) continue;
          double rc = -cost[i][j] + pot[v] - pot[i];
          if (dist[v] + rc < dist[i] - 1e-15) {
            dist[i] = dist[v] + rc;
            parent[i] = v;
            queue.push({dist[i], i});
          }
        }
      }
    }
    int best = -1;
    double best_d = inf;
    for (int j = 0; j < nt; ++j)
      if (demand[j] > 0 && dist[ns + j] < best_d) {
        best_d = dist[ns + j];
        best = j;
      }
    if (best < 0)
      throw InfeasibleMarginalsError("wasserstein_p: no augmenting path");
    for (int v = 0; v < n; ++v)
      if (dist[v] < inf) pot[v] += std::min(dist[v], best_d);

    // Bottleneck along the path, then augment.
    double push = demand[best];
    int v = ns + best;
    while (parent[v] != -1) {
      int u = parent[v];
      if (u < ns && v >= ns) {
        if (parent[u] == -1) push = std::min(push, supply[u]);
      } else {
        push = std::min(push, flow[v][u - ns]);  // backward arc v(source)<-u(sink)
      }
      v = u;
    }
    v = ns + best;
    while (parent[v] != -1) {
      int u = parent[v];
      if (u < ns && v >= ns)
        flow[u][v - ns] += push;
      else
        flow[v][u - ns] -= push;
      v = u;
    }
    supply[v] -= push;
    demand[best] -= push;
    remaining -= push;
  }
  if (remaining > 1e-9)
    throw InfeasibleMarginalsError("wasserstein_p: unshipped mass " +
                                   std::to_string(remaining));

  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < nt; ++j)
      if (flow[i][j] > 0) {
        result.plan.entries.push_back({src[i], dst[j], flow[i][j]});
        result.plan.cost += flow[i][j] * cost[i][j];
      }
  result.value = std::pow(result.plan.cost, 1.0 / p);
  return result;
}

DiscreteLaw one_jump_law(const Generator& gen, int state, double t) {
  if (t < 0) throw InvalidParamsError("one_jump_law: negative time");
  double total = 0.0;
  for (const auto& tr : gen.transitions(state)) total += tr.rate;
  if (t * total > 1.0)
    throw TimeTooLargeError("one_jump_law: t * total rate = " +
                            std::to_string(t * total) + " > 1");
  DiscreteLaw law;
  law.weights.assign(gen.size(), 0.0);
  law.weights[state] = 1.0 - t * total;
  for (const auto& tr : gen.transitions(state)) law.weights[tr.target] += t * tr.rate;
  return law;
}

NeighborCoupling neighbor_optimal_coupling(const ZooInstance& irw,
                                           const Configuration& eta, int coord,
                                           double t) {
  if (!irw.irw) throw InvalidParamsError("neighbor_optimal_coupling: not an irw instance");
  const IrwModel& model = *irw.irw;
  const Generator& gen = irw.gen;
  for (int x : eta)
    if (x > model.n - 2)
      throw InvalidParamsError("neighbor_optimal_coupling: state too close to the wall");
  int s = gen.index_of(eta);
  if (s < 0) throw InvalidParamsError("neighbor_optimal_coupling: state not in the box");
  Configuration up = eta;
  ++up[coord];
  int su = gen.index_of(up);

  double kplus = model.kappa_plus(eta, coord);
  double kminus = model.kappa_minus(eta, coord);
  if (kplus < 0 || kminus < 0)
    throw HypothesisViolationError("neighbor_optimal_coupling: H3.3 fails at the pair");

  NeighborCoupling out;
  out.mu_bar = one_jump_law(gen, s, t);
  out.nu_bar = one_jump_law(gen, su, t);
  double diag = out.mu_bar.weights[s] - t * kminus;
  if (diag < 0)
    throw TimeTooLargeError("neighbor_optimal_coupling: diagonal entry negative");

  std::map<std::pair<int, int>, double> mass;
  auto deposit = [&](int a, int b, double m) {
    if (m != 0.0) mass[{a, b}] += m;
  };
  const int d = model.d;
  auto move_of = [&](int j, bool plus) {
    return gen.move_index((plus ? "inc" : "dec") + std::to_string(j));
  };
  for (int j = 0; j < d; ++j)
    for (bool plus : {true, false}) {
      int mv = move_of(j, plus);
      double sync = std::min(model.rate(eta, j, plus), model.rate(up, j, plus));
      deposit(gen.apply_move(s, mv), gen.apply_move(su, mv), t * sync);
      if (j == coord) continue;
      double g = model.grad_plus(eta, coord, j, plus);
      if (g > 0) deposit(su, gen.apply_move(su, mv), t * g);
      if (g < 0) deposit(gen.apply_move(s, mv), s, -t * g);
    }
  deposit(su, su, t * kplus);
  deposit(s, s, t * kminus);
  deposit(s, su, diag);

  out.plan.p = 1.0;  // the cost is p-independent: support lives at distance <= 1
  for (const auto& [key, m] : mass) {
    out.plan.entries.push_back({key.first, key.second, m});
    out.plan.cost += m * graph_distance(gen.state(key.first), gen.state(key.second));
  }
  return out;
}

CyclicalReport check_cyclical_monotonicity(const Generator& gen,
                                           const TransportPlan& plan, double p) {
  if (plan.entries.size() > 1000)
    throw InvalidParamsError("check_cyclical_monotonicity: support too large");
  CyclicalReport report;
  report.worst_slack = std::numeric_limits<double>::infinity();
  auto dp = [&](int a, int b) {
    return std::pow(graph_distance(gen.state(a), gen.state(b)), p);
  };
  for (const auto& e1 : plan.entries)
    for (const auto& e2 : plan.entries) {
      double lhs = dp(e1.src, e1.dst) + dp(e2.src, e2.dst);
      double rhs = dp(e2.src, e1.dst) + dp(e1.src, e2.dst);
      double slack = rhs - lhs;
      if (slack < report.worst_slack) {
        report.worst_slack = slack;
        if (slack < -1e-12) {
          report.passed = false;
          report.violation = {e1.src, e1.dst, e2.src, e2.dst};
        }
      }
    }
  if (plan.entries.empty()) report.worst_slack = 0.0;
  return report;
}

ContractionReport contraction_check(const ZooInstance& irw, const DiscreteLaw& mu,
                                    const DiscreteLaw& nu, double p,
                                    std::span<const double> t_grid) {
  const Generator& gen = irw.gen;
  const int n = irw.irw ? irw.irw->n : 0;
  auto wall_mass = [&](const DiscreteLaw& law) {
    double leak = 0.0;
    for (int s = 0; s < gen.size(); ++s) {
      const Configuration& c = gen.state(s);
      if (*std::max_element(c.begin(), c.end()) >= n) leak += law.weights[s];
    }
    return leak;
  };

  ContractionReport report;
  const double kappa = irw.kappa.kappa;
  report.w0 = wasserstein_p(gen, mu, nu, p).value;
  std::vector<std::pair<double, double>> curve;
  for (double t : t_grid) {
    DiscreteLaw mu_t{evolve_law(gen, mu.weights, t, 1e-12)};
    DiscreteLaw nu_t{evolve_law(gen, nu.weights, t, 1e-12)};
    report.mass_leak = std::max(report.mass_leak,
                                std::max(wall_mass(mu_t), wall_mass(nu_t)));
    if (report.mass_leak >= 1e-6)
      throw MassLeakError("contraction_check: wall mass " +
                          std::to_string(report.mass_leak));
    double wt = wasserstein_p(gen, mu_t, nu_t, p).value;
    double bound = std::exp(-kappa * t / p) * report.w0;
    ContractionReport::Row row{t, wt, bound, 0.0};
    if (report.w0 == 0.0) {
      row.ratio = 0.0;  // 0/0 pair: trivially contracting
    } else {
      row.ratio = wt / bound;
      if (wt > bound * (1.0 + 1e-6)) report.passed = false;
      if (wt > 0) curve.emplace_back(t, std::log(wt));
    }
    report.rows.push_back(row);
  }
  if (curve.size() >= 2) {
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (auto& [t, y] : curve) {
      st += t;
      sy += y;
      stt += t * t;
      sty += t * y;
    }
    double m = static_cast<double>(curve.size());
    double slope = (m * sty - st * sy) / (m * stt - st * st);
    report.kappa_emp = -p * slope;
  }
  return report;
}

std::vector<std::string> plan_to_csv(const Generator& gen, const TransportPlan& plan) {
  std::vector<std::string> rows{"src_state,dst_state,mass,distance"};
  char buf[160];
  auto render = [](const Configuration& c) {
    std::string out;
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (i) out += ' ';
      out += std::to_string(c[i]);
    }
    return out;
  };
  for (const auto& e : plan.entries) {
    std::snprintf(buf, sizeof(buf), "%.17g,%d", e.mass,
                  graph_distance(gen.state(e.src), gen.state(e.dst)));
    rows.push_back(render(gen.state(e.src)) + "," + render(gen.state(e.dst)) + "," +
                   buf);
  }
  return rows;
}

}  // namespace entrolab
