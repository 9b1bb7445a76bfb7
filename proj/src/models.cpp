#include "entrolab/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace entrolab {

// ---------------------------------------------------------------- graph

Graph Graph::cycle(int length) {
  Graph g;
  g.n = length;
  for (int i = 0; i < length; ++i) g.edges.emplace_back(i, (i + 1) % length);
  return g;
}

Graph Graph::single_edge() {
  Graph g;
  g.n = 2;
  g.edges.emplace_back(0, 1);
  return g;
}

std::vector<std::vector<int>> Graph::adjacency() const {
  std::vector<std::vector<int>> adj(n);
  for (auto [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  return adj;
}

int Graph::max_degree() const {
  auto adj = adjacency();
  int deg = 0;
  for (const auto& nb : adj) deg = std::max(deg, static_cast<int>(nb.size()));
  return deg;
}

bool Graph::connected() const {
  if (n == 0) return false;
  auto adj = adjacency();
  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int w : adj[v])
      if (!seen[w]) {
        seen[w] = 1;
        stack.push_back(w);
      }
  }
  return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
}

void Graph::validate() const {
  if (n < 2) throw InvalidParamsError("graph: need at least two vertices");
  std::set<std::pair<int, int>> seen;
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n || b >= n)
      throw NonSimpleGraphError("graph: edge endpoint out of range");
    if (a == b) throw NonSimpleGraphError("graph: self loop");
    auto key = std::minmax(a, b);
    if (!seen.insert({key.first, key.second}).second)
      throw NonSimpleGraphError("graph: duplicate edge");
  }
  if (!connected()) throw InvalidParamsError("graph: not connected");
}

// ---------------------------------------------------------------- kappa report

double KappaReport::for_phi(const PhiFamily& phi) const {
  if (phi.is_alpha()) {
    double a = phi.alpha_value();
    if (std::abs(a - 1.0) < 1e-12) return kappa_1;
    return kappa_alpha(a);
  }
  return kappa;
}

// ---------------------------------------------------------------- helpers

namespace {

std::string inc_id(int i) { return "inc" + std::to_string(i); }
std::string dec_id(int i) { return "dec" + std::to_string(i); }

Configuration shifted(const Configuration& eta, int i, int by) {
  Configuration c = eta;
  c[i] += by;
  return c;
}

std::vector<Move> irw_moves(int d) {
  std::vector<Move> moves;
  for (int i = 0; i < d; ++i)
    moves.push_back(Move{inc_id(i), dec_id(i),
                         [i](const Configuration& c) { return shifted(c, i, 1); }});
  for (int i = 0; i < d; ++i)
    moves.push_back(Move{dec_id(i), inc_id(i), [i](const Configuration& c) {
                           return c[i] > 0 ? shifted(c, i, -1) : c;
                         }});
  moves.push_back(null_move());
  return moves;
}

std::vector<Configuration> all_spin_states(int sites) {
  std::vector<Configuration> states;
  for (long mask = 0; mask < (1L << sites); ++mask) {
    Configuration c(sites);
    for (int i = 0; i < sites; ++i) c[i] = (mask >> i) & 1 ? 1 : -1;
    states.push_back(std::move(c));
  }
  std::sort(states.begin(), states.end());
  return states;
}

std::vector<Configuration> binary_states_with_sum(int sites, int total) {
  std::vector<Configuration> states;
  Configuration c(sites, 0);
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == sites) {
      if (left == 0) states.push_back(c);
      return;
    }
    if (left > sites - pos) return;
    c[pos] = 0;
    rec(pos + 1, left);
    if (left > 0) {
      c[pos] = 1;
      rec(pos + 1, left - 1);
      c[pos] = 0;
    }
  };
  rec(0, total);
  std::sort(states.begin(), states.end());
  return states;
}

std::vector<Configuration> compositions(int sites, int total) {
  std::vector<Configuration> states;
  Configuration c(sites, 0);
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == sites - 1) {
      c[pos] = left;
      states.push_back(c);
      return;
    }
    for (int k = 0; k <= left; ++k) {
      c[pos] = k;
      rec(pos + 1, left - k);
    }
  };
  rec(0, total);
  std::sort(states.begin(), states.end());
  return states;
}

}  // namespace

// ---------------------------------------------------------------- irw

double IrwModel::grad_plus(const Configuration& eta, int i, int j, bool plus) const {
  return rate(shifted(eta, i, 1), j, plus) - rate(eta, j, plus);
}

double IrwModel::kappa_plus(const Configuration& eta, int i) const {
  double value = -grad_plus(eta, i, i, true);
  for (int j = 0; j < d; ++j) {
    if (j == i) continue;
    value -= std::max(grad_plus(eta, i, j, true), 0.0);
    value -= std::max(grad_plus(eta, i, j, false), 0.0);
  }
  return value;
}

double IrwModel::kappa_minus(const Configuration& eta, int i) const {
  double value = grad_plus(eta, i, i, false);
  for (int j = 0; j < d; ++j) {
    if (j == i) continue;
    value -= std::max(-grad_plus(eta, i, j, true), 0.0);
    value -= std::max(-grad_plus(eta, i, j, false), 0.0);
  }
  return value;
}

IrwKappaTables irw_kappas(const IrwModel& model) {
  IrwKappaTables tables;
  Configuration eta(model.d, 0);
  bool more = true;
  while (more) {
    for (int i = 0; i < model.d; ++i) {
      IrwKappaTables::Row row;
      row.eta = eta;
      row.coord = i;
      row.kplus = model.kappa_plus(eta, i);
      row.kminus = model.kappa_minus(eta, i);
      int top = *std::max_element(eta.begin(), eta.end());
      row.interior = top <= model.n - 1 && eta[i] <= model.n - 2;
      if (row.kplus < 0 || row.kminus < 0) tables.h33_ok = false;
      double sum = row.kplus + row.kminus;
      if (row.interior)
        tables.kappa_interior = std::min(tables.kappa_interior, sum);
      else
        tables.kappa_boundary = std::min(tables.kappa_boundary, sum);
      tables.rows.push_back(std::move(row));
    }
    int k = model.d - 1;
    while (k >= 0 && eta[k] == model.n) eta[k--] = 0;
    if (k < 0)
      more = false;
    else {
      ++eta[k];
      std::fill(eta.begin() + k + 1, eta.end(), 0);
    }
  }
  return tables;
}

namespace {

// Coupling table of an increment seed (eta, gamma_i^+) per the five-case
// construction; decrement seeds mirror it.
CouplingSeed irw_increment_table(const IrwModel& model, const Generator& gen,
                                 int state, int i) {
  const Configuration& eta = gen.state(state);
  Configuration up = shifted(eta, i, 1);
  const int d = model.d;
  const int e = gen.null_move_index();
  auto midx = [&](int j, bool plus) {
    return gen.move_index(plus ? inc_id(j) : dec_id(j));
  };

  CouplingSeed seed;
  seed.state = state;
  seed.move = midx(i, true);
  for (int j = 0; j < d; ++j) {
    for (bool plus : {true, false}) {
      double r = std::min(model.rate(eta, j, plus), model.rate(up, j, plus));
      if (r != 0.0) seed.add(midx(j, plus), midx(j, plus), r);
      if (j == i) continue;
      double g = model.grad_plus(eta, i, j, plus);
      if (g > 0.0) seed.add(midx(i, true), midx(j, plus), g);
      if (g < 0.0) seed.add(midx(j, plus), midx(i, false), -g);
    }
  }
  seed.add(midx(i, true), e, model.kappa_plus(eta, i));
  seed.add(e, midx(i, false), model.kappa_minus(eta, i));
  return seed;
}

CouplingRates irw_coupling(const IrwModel& model, const Generator& gen) {
  CouplingRates cr;
  for (int s = 0; s < gen.size(); ++s) {
    for (const auto& tr : gen.transitions(s)) {
      if (tr.target == s || tr.rate <= 0) continue;
      const std::string& id = gen.moves()[tr.move].id;
      int coord = std::stoi(id.substr(3));
      if (id[0] == 'i') {
        cr.seeds.push_back(irw_increment_table(model, gen, s, coord));
      } else {
        CouplingSeed mirror = irw_increment_table(model, gen, tr.target, coord);
        CouplingSeed seed;
        seed.state = s;
        seed.move = tr.move;
        for (const auto& entry : mirror.entries)
          seed.add(entry.gbar, entry.g, entry.rate);
        cr.seeds.push_back(std::move(seed));
      }
    }
  }
  return cr;
}

ZooInstance assemble_irw(IrwModel model, const std::string& name) {
  LatticeModel lattice;
  lattice.d = model.d;
  lattice.moves = irw_moves(model.d);
  const IrwModel* mp = nullptr;  // filled after the shared_ptr exists
  auto shared = std::make_shared<IrwModel>(std::move(model));
  mp = shared.get();
  lattice.rate_fn = [mp](const Configuration& eta, const Move& mv) {
    if (mv.is_null()) return 0.0;
    int coord = std::stoi(mv.id.substr(3));
    return mp->rate(eta, coord, mv.id[0] == 'i');
  };
  lattice.log_weight = [mp](const Configuration& eta) { return mp->log_weight(eta); };

  ZooInstance zoo;
  zoo.name = name;
  zoo.family = "irw";
  zoo.gen = truncate(lattice, shared->n);
  zoo.measure = truncated_measure(lattice, zoo.gen);
  zoo.irw = shared;
  zoo.irw_tables = irw_kappas(*shared);
  zoo.coupling = irw_coupling(*shared, zoo.gen);
  zoo.kappa.kappa = zoo.irw_tables.kappa_interior;
  zoo.kappa.kappa_1 = zoo.kappa.kappa;  // Thm: MLSI holds with kappa_1 = kappa
  zoo.kappa.alpha_slope = zoo.kappa.kappa;
  zoo.kappa.alpha_offset = 0.0;
  if (!zoo.irw_tables.h33_ok) {
    zoo.kappa.hypotheses_ok = false;
    zoo.kappa.failed_hypothesis = "H3.3: some kappa+/kappa- negative on the box";
  }
  return zoo;
}

}  // namespace

ZooInstance build_irw(std::function<double(const Configuration&)> vplus,
                      std::function<double(const Configuration&)> vminus, int d, int n,
                      const std::string& name) {
  IrwModel model;
  model.d = d;
  model.n = n;
  model.rate_plus = [vplus](const Configuration& eta, int i) {
    return std::exp(-(vplus(shifted(eta, i, 1)) - vplus(eta)));
  };
  model.rate_minus = [vminus](const Configuration& eta, int i) {
    if (eta[i] <= 0) return 0.0;
    return std::exp(-(vminus(shifted(eta, i, -1)) - vminus(eta)));
  };
  model.log_weight = [vplus, vminus](const Configuration& eta) {
    return -vplus(eta) - vminus(eta);
  };
  return assemble_irw(std::move(model), name);
}

ZooInstance build_irw_poisson(std::function<double(const Configuration&)> v,
                              double lambda, int d, int n, const std::string& name) {
  if (lambda <= 0) throw InvalidParamsError("build_irw_poisson: lambda must be > 0");
  IrwModel model;
  model.d = d;
  model.n = n;
  model.rate_plus = [v](const Configuration& eta, int i) {
    return std::exp(-(v(shifted(eta, i, 1)) - v(eta)));
  };
  model.rate_minus = [lambda](const Configuration& eta, int i) {
    return lambda * eta[i];
  };
  model.log_weight = [v, lambda](const Configuration& eta) {
    double w = -v(eta);
    for (int x : eta) w -= std::log(lambda) * x + std::lgamma(x + 1.0);
    return w;
  };
  return assemble_irw(std::move(model), name);
}

ZooInstance build_irw_symmetric(std::function<double(int)> h, double beta,
                                double lambda, int d, int n,
                                const std::string& name) {
  auto v = [h, beta](const Configuration& eta) {
    int total = std::accumulate(eta.begin(), eta.end(), 0);
    return beta * h(total);
  };
  ZooInstance zoo = build_irw_poisson(v, lambda, d, n, name);

  // Cor. 3.2 closed form: scan the occupancy levels reachable on the box
  // plus a margin (the difference sequence is monotone for convex h).
  auto diff = [&](int m) {
    return std::exp(-beta * (h(m + 1) - h(m))) - std::exp(-beta * (h(m + 2) - h(m + 1)));
  };
  int scan = d * n + 64;
  double worst = -std::numeric_limits<double>::infinity();
  double kappa = std::numeric_limits<double>::infinity();
  for (int m = 0; m <= scan; ++m) {
    worst = std::max(worst, diff(m));
    kappa = std::min(kappa, lambda - (d - 2) * diff(m));
  }
  if (lambda - (d - 1) * worst < 0) {
    zoo.kappa.hypotheses_ok = false;
    zoo.kappa.failed_hypothesis = "symmetric interaction condition";
  }
  zoo.kappa.kappa = kappa;
  zoo.kappa.kappa_1 = kappa;
  zoo.kappa.alpha_slope = kappa;
  zoo.kappa.alpha_offset = 0.0;
  return zoo;
}

OddlyConvexReport oddly_convex_kappa(
    const std::function<double(const Configuration&)>& v, double lambda, int d,
    int n) {
  auto grad = [&](const Configuration& eta, int j) {
    return v(shifted(eta, j, 1)) - v(eta);
  };
  // Mixed increments must be nonnegative on the box.
  Configuration eta(d, 0);
  bool more = true;
  OddlyConvexReport out;
  out.kappa_scan = std::numeric_limits<double>::infinity();
  bool general_condition = true;
  while (more) {
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double mixed = grad(shifted(eta, i, 1), j) - grad(eta, j);
        double scale = std::max({1.0, std::abs(v(eta)), std::abs(grad(eta, j))});
        if (mixed < -1e-12 * scale)
          throw HessianSignViolationError(
              "oddly_convex_kappa: negative mixed increment at (i,j)=(" +
              std::to_string(i) + "," + std::to_string(j) + ")");
      }
    for (int i = 0; i < d; ++i) {
      double cross = 0.0;
      for (int j = 0; j < d; ++j) {
        if (j == i) continue;
        cross += std::exp(-grad(eta, j)) - std::exp(-grad(shifted(eta, i, 1), j));
      }
      double own = std::exp(-grad(eta, i)) - std::exp(-grad(shifted(eta, i, 1), i));
      out.kappa_scan = std::min(out.kappa_scan, lambda + own - cross);
      if (lambda - cross < 0) general_condition = false;
    }
    int k = d - 1;
    while (k >= 0 && eta[k] == n) eta[k--] = 0;
    if (k < 0)
      more = false;
    else {
      ++eta[k];
      std::fill(eta.begin() + k + 1, eta.end(), 0);
    }
  }
  Configuration origin(d, 0);
  out.kappa_origin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < d; ++i) {
    double sum = 0.0;
    for (int j = 0; j < d; ++j)
      if (j != i) sum += std::exp(-grad(origin, j));
    out.kappa_origin = std::min(out.kappa_origin, lambda - sum);
  }
  out.origin_condition = out.kappa_origin >= 0;
  out.report.kappa = out.kappa_scan;
  out.report.kappa_1 = out.kappa_scan;
  out.report.alpha_slope = out.kappa_scan;
  out.report.hypotheses_ok = general_condition;
  if (!general_condition)
    out.report.failed_hypothesis = "oddly convex general condition";
  return out;
}

TildeH tilde_h(const std::function<double(int)>& h, double beta, int d, double eps,
               int scan_cap, int window) {
  if (eps <= 0) throw InvalidParamsError("tilde_h: eps must be positive");
  if (d < 2) throw InvalidParamsError("tilde_h: needs d >= 2");
  auto dec = [&](int m) {  // grad+ exp(-beta grad+ h(m))
    return std::exp(-beta * (h(m + 2) - h(m + 1))) -
           std::exp(-beta * (h(m + 1) - h(m)));
  };
  auto convex_at = [&](int m) {
    return h(m + 2) - h(m + 1) >= h(m + 1) - h(m);
  };
  const double floor_value = -eps / (d - 1);
  int m_eps = -1;
  for (int candidate = 0; candidate <= scan_cap; ++candidate) {
    bool ok = true;
    for (int m = candidate; m <= candidate + window && ok; ++m)
      ok = convex_at(m) && dec(m) >= floor_value;
    if (ok) {
      m_eps = candidate;
      break;
    }
  }
  if (m_eps < 0) throw NoSuchMError("tilde_h: scan cap reached");

  TildeH out;
  out.m_eps = m_eps;
  double slope = h(m_eps + 1) - h(m_eps);
  double anchor = h(m_eps);
  out.h = [h, m_eps, slope, anchor](int m) {
    if (m >= m_eps) return h(m);
    return anchor - slope * (m_eps - m);
  };
  out.verified = true;
  auto dec_tilde = [&](int m) {
    return std::exp(-beta * (out.h(m + 2) - out.h(m + 1))) -
           std::exp(-beta * (out.h(m + 1) - out.h(m)));
  };
  for (int m = 0; m <= m_eps + window; ++m)
    if (dec_tilde(m) < floor_value - 1e-12) out.verified = false;
  return out;
}

// ---------------------------------------------------------------- glauber

namespace {

struct SpinContext {
  Generator gen;
  Measure measure;
  std::vector<std::vector<double>> kappa_table;  // kappa(eta, sigma_x)
};

std::string flip_id(int x) { return "flip" + std::to_string(x); }

SpinContext build_spin_context(const std::function<double(const Configuration&)>& h,
                               double beta, int sites) {
  if (sites < 1 || sites > 24)
    throw InvalidParamsError("build_glauber: unsupported site count");
  std::vector<Move> moves;
  for (int x = 0; x < sites; ++x)
    moves.push_back(Move{flip_id(x), flip_id(x), [x](const Configuration& c) {
                           Configuration out = c;
                           out[x] = -out[x];
                           return out;
                         }});
  moves.push_back(null_move());

  auto rate_fn = [h, beta](const Configuration& eta, const Move& mv) {
    if (mv.is_null()) return 0.0;
    return std::exp(-0.5 * beta * (h(mv.apply(eta)) - h(eta)));
  };
  SpinContext ctx{build_generator(all_spin_states(sites), moves, rate_fn), {}, {}};

  std::vector<double> log_w(ctx.gen.size());
  for (int s = 0; s < ctx.gen.size(); ++s) log_w[s] = -beta * h(ctx.gen.state(s));
  ctx.measure = measure_from_log_weights(log_w);

  ctx.kappa_table.assign(ctx.gen.size(), std::vector<double>(sites, 0.0));
  for (int s = 0; s < ctx.gen.size(); ++s) {
    for (int x = 0; x < sites; ++x) {
      int mx = ctx.gen.move_index(flip_id(x));
      int t = ctx.gen.apply_move(s, mx);
      double value = ctx.gen.rate(t, mx);  // c(sigma eta, sigma)
      for (int y = 0; y < sites; ++y) {
        if (y == x) continue;
        int my = ctx.gen.move_index(flip_id(y));
        double grad = ctx.gen.rate(t, my) - ctx.gen.rate(s, my);
        value -= std::max(-grad, 0.0);
      }
      ctx.kappa_table[s][x] = value;
    }
  }
  return ctx;
}

CouplingRates spin_coupling(const Generator& gen,
                            const std::vector<std::vector<double>>& kappa_table,
                            int sites) {
  const int e = gen.null_move_index();
  CouplingRates cr;
  for (int s = 0; s < gen.size(); ++s) {
    for (int x = 0; x < sites; ++x) {
      int mx = gen.move_index(flip_id(x));
      int t = gen.apply_move(s, mx);
      CouplingSeed seed;
      seed.state = s;
      seed.move = mx;
      for (int y = 0; y < sites; ++y) {
        if (y == x) continue;
        int my = gen.move_index(flip_id(y));
        seed.add(my, my, std::min(gen.rate(t, my), gen.rate(s, my)));
        double grad = gen.rate(t, my) - gen.rate(s, my);
        if (grad < 0) seed.add(my, mx, -grad);
        if (grad > 0) seed.add(mx, my, grad);
      }
      seed.add(mx, e, kappa_table[t][x]);
      seed.add(e, mx, kappa_table[s][x]);
      cr.seeds.push_back(std::move(seed));
    }
  }
  return cr;
}

void fill_spin_constants(ZooInstance& zoo,
                         const std::vector<std::vector<double>>& kappa_table,
                         int sites) {
  double kappa = std::numeric_limits<double>::infinity();
  double kappa_bar = std::numeric_limits<double>::infinity();
  bool h44 = true;
  for (int s = 0; s < zoo.gen.size(); ++s)
    for (int x = 0; x < sites; ++x) {
      int t = zoo.gen.apply_move(s, zoo.gen.move_index(flip_id(x)));
      double k = kappa_table[s][x];
      kappa = std::min(kappa, k + kappa_table[t][x]);
      kappa_bar = std::min(kappa_bar, k);
      if (k < 0) h44 = false;
    }
  zoo.kappa_exhaustive = kappa;
  zoo.kappa_bar_exhaustive = kappa_bar;
  if (!h44) {
    zoo.kappa.hypotheses_ok = false;
    zoo.kappa.failed_hypothesis = "H4.4: some kappa(eta, sigma) negative";
  }
}

}  // namespace

ZooInstance build_glauber(const std::function<double(const Configuration&)>& h,
                          double beta, int sites, const std::string& name) {
  SpinContext ctx = build_spin_context(h, beta, sites);
  ZooInstance zoo;
  zoo.name = name;
  zoo.family = "glauber";
  zoo.gen = std::move(ctx.gen);
  zoo.measure = std::move(ctx.measure);
  zoo.coupling = spin_coupling(zoo.gen, ctx.kappa_table, sites);
  fill_spin_constants(zoo, ctx.kappa_table, sites);
  zoo.kappa.kappa = zoo.kappa_exhaustive;
  zoo.kappa.kappa_bar = zoo.kappa_bar_exhaustive;
  zoo.kappa.kappa_1 = zoo.kappa.kappa + 2.0 * zoo.kappa.kappa_bar;
  zoo.kappa.alpha_slope = zoo.kappa.kappa;
  return zoo;
}

double curie_weiss_boundary_beta(int sites) {
  return 0.5 * sites * std::log(1.0 + 1.0 / (sites - 1));
}

ZooInstance curie_weiss(int sites, double beta) {
  if (sites < 2) throw InvalidParamsError("curie_weiss: need N >= 2");
  auto h = [sites](const Configuration& eta) {
    double total = std::accumulate(eta.begin(), eta.end(), 0.0);
    return -total * total / (2.0 * sites);
  };
  ZooInstance zoo = build_glauber(h, beta, sites, "curie-weiss-N" + std::to_string(sites));
  zoo.family = "curie_weiss";

  const double u = std::exp(2.0 * beta / sites) - 1.0;
  auto f_cw = [beta, sites, u](int m) {
    double x = beta / sites * (sites - 1.0 - 2.0 * m);
    return std::exp(-x) * (1.0 - (sites - 1.0 - m) * u) + std::exp(x) * (1.0 - m * u);
  };
  zoo.f_cw = f_cw;

  bool condition = (sites - 1) * u <= 1.0;
  zoo.kappa.kappa = f_cw((sites - 1) / 2);
  zoo.kappa.kappa_bar = std::exp(-beta * (sites - 1.0) / sites) * (1.0 - (sites - 1.0) * u);
  zoo.kappa.kappa_1 = zoo.kappa.kappa + 2.0 * zoo.kappa.kappa_bar;
  zoo.kappa.alpha_slope = zoo.kappa.kappa;
  if (!condition) {
    zoo.kappa.hypotheses_ok = false;
    zoo.kappa.failed_hypothesis = "curie condition (N-1)(e^{2b/N}-1) <= 1";
  }
  return zoo;
}

double ising_boundary_beta(int dim) {
  auto g = [dim](double b) {
    return 2.0 * dim * (1.0 - std::exp(-2.0 * b)) * std::exp(4.0 * dim * b) - 1.0;
  };
  double lo = 0.0, hi = 1.0;
  while (g(hi) < 0) hi *= 2;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (g(mid) < 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

ZooInstance ising(const Graph& graph, double beta) {
  graph.validate();
  int dim = (graph.max_degree() + 1) / 2;
  auto edges = graph.edges;
  auto h = [edges](const Configuration& eta) {
    double acc = 0.0;
    for (auto [a, b] : edges) acc -= eta[a] * eta[b];
    return acc;
  };
  ZooInstance zoo = build_glauber(h, beta, graph.n,
                                  "ising-n" + std::to_string(graph.n));
  zoo.family = "ising";

  double pre = 2.0 * dim * (1.0 - std::exp(-2.0 * beta));
  bool condition = pre * std::exp(4.0 * dim * beta) <= 1.0;
  zoo.kappa.kappa = 2.0 - pre * std::exp(2.0 * beta * dim);
  zoo.kappa.kappa_bar = std::exp(-2.0 * beta * dim) - pre * std::exp(2.0 * beta * dim);
  zoo.kappa.kappa_1 = zoo.kappa.kappa + 2.0 * zoo.kappa.kappa_bar;
  zoo.kappa.alpha_slope = zoo.kappa.kappa;
  zoo.kappa.hypotheses_ok = condition;
  if (!condition) zoo.kappa.failed_hypothesis = "Ising condition 2d(1-e^{-2b})e^{4db} <= 1";
  return zoo;
}

// ---------------------------------------------------------------- hardcore

namespace {
std::string arr_id(int x) { return "arr" + std::to_string(x); }
std::string dep_id(int x) { return "dep" + std::to_string(x); }
}  // namespace

ZooInstance hardcore(const Graph& graph, double rho) {
  graph.validate();
  if (rho <= 0) throw InvalidParamsError("hardcore: rho must be positive");
  auto adj = graph.adjacency();
  const int nv = graph.n;
  const int delta = graph.max_degree();

  std::vector<Configuration> states;
  for (long mask = 0; mask < (1L << nv); ++mask) {
    Configuration c(nv);
    for (int i = 0; i < nv; ++i) c[i] = (mask >> i) & 1;
    bool independent = true;
    for (auto [a, b] : graph.edges) independent = independent && !(c[a] && c[b]);
    if (independent) states.push_back(std::move(c));
  }
  std::sort(states.begin(), states.end());

  std::vector<Move> moves;
  for (int x = 0; x < nv; ++x)
    moves.push_back(Move{arr_id(x), dep_id(x), [x, adj](const Configuration& c) {
                           if (c[x]) return c;
                           for (int y : adj[x])
                             if (c[y]) return c;
                           Configuration out = c;
                           out[x] = 1;
                           return out;
                         }});
  for (int x = 0; x < nv; ++x)
    moves.push_back(Move{dep_id(x), arr_id(x), [x](const Configuration& c) {
                           if (!c[x]) return c;
                           Configuration out = c;
                           out[x] = 0;
                           return out;
                         }});
  moves.push_back(null_move());

  auto rate_fn = [rho, adj](const Configuration& eta, const Move& mv) {
    if (mv.is_null()) return 0.0;
    int x = std::stoi(mv.id.substr(3));
    if (mv.id[0] == 'd') return static_cast<double>(eta[x]);
    if (eta[x]) return 0.0;
    for (int y : adj[x])
      if (eta[y]) return 0.0;
    return rho;
  };

  ZooInstance zoo;
  zoo.name = "hardcore-n" + std::to_string(nv);
  zoo.family = "hardcore";
  zoo.gen = build_generator(std::move(states), moves, rate_fn);
  std::vector<double> log_w(zoo.gen.size());
  for (int s = 0; s < zoo.gen.size(); ++s) {
    int occupied = std::accumulate(zoo.gen.state(s).begin(), zoo.gen.state(s).end(), 0);
    log_w[s] = occupied * std::log(rho);
  }
  zoo.measure = measure_from_log_weights(log_w);

  const Generator& gen = zoo.gen;
  const int e = gen.null_move_index();
  auto increment_table = [&](int s, int x) {
    CouplingSeed seed;
    seed.state = s;
    seed.move = gen.move_index(arr_id(x));
    int t = gen.apply_move(s, seed.move);
    for (int m = 0; m < static_cast<int>(gen.moves().size()); ++m) {
      if (m == e) continue;
      double r = std::min(gen.rate(s, m), gen.rate(t, m));
      if (r > 0) seed.add(m, m, r);
    }
    int merging = 0;
    for (int y : adj[x]) {
      if (gen.rate(s, gen.move_index(arr_id(y))) > 0) {
        seed.add(gen.move_index(arr_id(y)), gen.move_index(dep_id(x)), rho);
        ++merging;
      }
    }
    seed.add(gen.move_index(arr_id(x)), e, rho);
    seed.add(e, gen.move_index(dep_id(x)), 1.0 - rho * merging);
    return seed;
  };
  for (int s = 0; s < gen.size(); ++s)
    for (const auto& tr : gen.transitions(s)) {
      if (tr.target == s || tr.rate <= 0) continue;
      int x = std::stoi(gen.moves()[tr.move].id.substr(3));
      if (gen.moves()[tr.move].id[0] == 'a') {
        zoo.coupling.seeds.push_back(increment_table(s, x));
      } else {
        CouplingSeed mirror = increment_table(tr.target, x);
        CouplingSeed seed;
        seed.state = s;
        seed.move = tr.move;
        for (const auto& entry : mirror.entries) seed.add(entry.gbar, entry.g, entry.rate);
        zoo.coupling.seeds.push_back(std::move(seed));
      }
    }

  zoo.kappa.kappa = 1.0 - rho * (delta - 1);
  zoo.kappa.kappa_bar = std::min(rho, 1.0 - rho * delta);
  zoo.kappa.kappa_1 = zoo.kappa.kappa + 2.0 * zoo.kappa.kappa_bar;
  zoo.kappa.alpha_slope = zoo.kappa.kappa;
  if (rho * delta > 1.0) {
    zoo.kappa.hypotheses_ok = false;
    zoo.kappa.failed_hypothesis = "hardcore condition rho * Delta <= 1";
  }
  return zoo;
}

// ---------------------------------------------------------------- Bernoulli-Laplace

namespace {
std::string swap_id(int i, int j) {
  return "sw" + std::to_string(i) + "_" + std::to_string(j);
}
}  // namespace

ZooInstance bernoulli_laplace(int sites, int particles) {
  if (!(particles > 0 && particles < sites))
    throw InvalidParamsError("bernoulli_laplace: need 0 < N < L");
  std::vector<Move> moves;
  for (int i = 0; i < sites; ++i)
    for (int j = 0; j < sites; ++j) {
      if (i == j) continue;
      moves.push_back(Move{swap_id(i, j), swap_id(j, i), [i, j](const Configuration& c) {
                             if (!(c[i] == 1 && c[j] == 0)) return c;
                             Configuration out = c;
                             out[i] = 0;
                             out[j] = 1;
                             return out;
                           }});
    }
  moves.push_back(null_move());

  auto rate_fn = [](const Configuration& eta, const Move& mv) {
    if (mv.is_null()) return 0.0;
    auto sep = mv.id.find('_');
    int i = std::stoi(mv.id.substr(2, sep - 2));
    int j = std::stoi(mv.id.substr(sep + 1));
    return static_cast<double>(eta[i] * (1 - eta[j]));
  };

  ZooInstance zoo;
  zoo.name = "bernoulli-laplace-L" + std::to_string(sites) + "-N" + std::to_string(particles);
  zoo.family = "bernoulli_laplace";
  zoo.gen = build_generator(binary_states_with_sum(sites, particles), moves, rate_fn);
  zoo.measure.weights.assign(zoo.gen.size(), 1.0 / zoo.gen.size());

  const Generator& gen = zoo.gen;
  const int e = gen.null_move_index();
  for (int s = 0; s < gen.size(); ++s) {
    const Configuration& eta = gen.state(s);
    for (const auto& tr : gen.transitions(s)) {
      if (tr.target == s || tr.rate <= 0) continue;
      const std::string& id = gen.moves()[tr.move].id;
      auto sep = id.find('_');
      int i = std::stoi(id.substr(2, sep - 2));
      int j = std::stoi(id.substr(sep + 1));
      CouplingSeed seed;
      seed.state = s;
      seed.move = tr.move;
      for (const auto& a : gen.transitions(s)) {
        if (a.target == s) continue;
        if (gen.rate(tr.target, a.move) > 0) seed.add(a.move, a.move, 1.0);
      }
      seed.add(tr.move, e, 1.0);
      seed.add(e, gen.move_index(swap_id(j, i)), 1.0);
      for (int l = 0; l < sites; ++l) {
        if (l == i || l == j) continue;
        if (eta[l] == 0)
          seed.add(gen.move_index(swap_id(i, l)), gen.move_index(swap_id(j, l)), 1.0);
        if (eta[l] == 1)
          seed.add(gen.move_index(swap_id(l, j)), gen.move_index(swap_id(l, i)), 1.0);
      }
      zoo.coupling.seeds.push_back(std::move(seed));
    }
  }

  zoo.kappa.kappa = sites;
  zoo.kappa.kappa_bar = 1.0;
  zoo.kappa.kappa_1 = sites + 2.0;
  zoo.kappa.alpha_slope = sites;
  return zoo;
}

// ---------------------------------------------------------------- zero range

namespace {
std::string transfer_id(int x, int y) {
  return "tr" + std::to_string(x) + "_" + std::to_string(y);
}
}  // namespace

ZooInstance zero_range(int sites, int particles,
                       const std::vector<std::function<double(int)>>& site_rates) {
  if (sites < 2 || particles < 1)
    throw InvalidParamsError("zero_range: need L >= 2 and N >= 1");
  if (static_cast<int>(site_rates.size()) != sites)
    throw InvalidParamsError("zero_range: one rate function per site");
  for (const auto& cx : site_rates)
    if (cx(0) != 0.0) throw InvalidParamsError("zero_range: c_x(0) must be 0");

  double cmin = std::numeric_limits<double>::infinity(), cmax = 0.0;
  for (int x = 0; x < sites; ++x)
    for (int k = 0; k < particles; ++k) {
      double inc = site_rates[x](k + 1) - site_rates[x](k);
      cmin = std::min(cmin, inc);
      cmax = std::max(cmax, inc);
    }
  const double c = cmin, delta = cmax - cmin;

  std::vector<Move> moves;
  for (int x = 0; x < sites; ++x)
    for (int y = 0; y < sites; ++y) {
      if (x == y) continue;
      moves.push_back(Move{transfer_id(x, y), transfer_id(y, x),
                           [x, y](const Configuration& cfg) {
                             if (cfg[x] == 0) return cfg;
                             Configuration out = cfg;
                             --out[x];
                             ++out[y];
                             return out;
                           }});
    }
  moves.push_back(null_move());

  auto rate_fn = [&site_rates, sites](const Configuration& eta, const Move& mv) {
    if (mv.is_null()) return 0.0;
    auto sep = mv.id.find('_');
    int x = std::stoi(mv.id.substr(2, sep - 2));
    return site_rates[x](eta[x]) / sites;
  };

  ZooInstance zoo;
  zoo.name = "zero-range-L" + std::to_string(sites) + "-N" + std::to_string(particles);
  zoo.family = "zero_range";
  zoo.gen = build_generator(compositions(sites, particles), moves, rate_fn);
  std::vector<double> log_w(zoo.gen.size());
  for (int s = 0; s < zoo.gen.size(); ++s) {
    double w = 0.0;
    const Configuration& eta = zoo.gen.state(s);
    for (int x = 0; x < sites; ++x)
      for (int k = 1; k <= eta[x]; ++k) w -= std::log(site_rates[x](k));
    log_w[s] = w;
  }
  zoo.measure = measure_from_log_weights(log_w);
  zoo.measured_c = c;
  zoo.measured_delta = delta;

  const Generator& gen = zoo.gen;
  const int e = gen.null_move_index();
  const double invL = 1.0 / sites;
  for (int s = 0; s < gen.size(); ++s) {
    const Configuration& eta = gen.state(s);
    for (const auto& tr : gen.transitions(s)) {
      if (tr.target == s || tr.rate <= 0) continue;
      const std::string& id = gen.moves()[tr.move].id;
      auto sep = id.find('_');
      int x = std::stoi(id.substr(2, sep - 2));
      int y = std::stoi(id.substr(sep + 1));
      const Configuration& after = gen.state(tr.target);
      CouplingSeed seed;
      seed.state = s;
      seed.move = tr.move;
      for (int z = 0; z < sites; ++z) {
        double r = std::min(site_rates[z](eta[z]), site_rates[z](after[z])) * invL;
        if (r <= 0) continue;
        for (int w = 0; w < sites; ++w)
          if (w != z) seed.add(gen.move_index(transfer_id(z, w)),
                               gen.move_index(transfer_id(z, w)), r);
      }
      double dx = site_rates[x](eta[x]) - site_rates[x](eta[x] - 1);
      double dy = site_rates[y](eta[y] + 1) - site_rates[y](eta[y]);
      for (int w = 0; w < sites; ++w) {
        if (w == x || w == y) continue;
        seed.add(gen.move_index(transfer_id(x, w)), e, (dx - c) * invL);
        seed.add(e, gen.move_index(transfer_id(y, w)), (dy - c) * invL);
        seed.add(gen.move_index(transfer_id(x, w)), gen.move_index(transfer_id(y, w)),
                 c * invL);
      }
      seed.add(tr.move, e, dx * invL);
      seed.add(e, gen.move_index(transfer_id(y, x)), dy * invL);
      zoo.coupling.seeds.push_back(std::move(seed));
    }
  }

  zoo.kappa.kappa = c - delta;
  zoo.kappa.kappa_1 = c - delta;
  zoo.kappa.alpha_slope = c;
  zoo.kappa.alpha_offset = -delta;
  if (!(delta <= c) || c <= 0) {
    zoo.kappa.hypotheses_ok = false;
    zoo.kappa.failed_hypothesis = "zero range increment condition delta <= c";
  }
  return zoo;
}

ZooInstance zero_range_linear(int sites, int particles) {
  std::vector<std::function<double(int)>> rates(
      sites, [](int k) { return static_cast<double>(k); });
  ZooInstance zoo = zero_range(sites, particles, rates);
  zoo.name += "-linear";
  return zoo;
}

// ---------------------------------------------------------------- cancellation sums

namespace {

double same_move_sum(const Generator& gen, const Measure& m, const PhiFamily& phi,
                     std::span<const double> f, bool exclude_same_move) {
  double acc = 0.0;
  for (int s = 0; s < gen.size(); ++s) {
    for (const auto& tr : gen.transitions(s)) {
      if (tr.target == s || tr.rate <= 0) continue;
      double base = phi.big_phi(f[s], f[tr.target]);
      for (const auto& g : gen.transitions(s)) {
        if (g.target == s) continue;
        if (exclude_same_move && g.move == tr.move) continue;
        double r = std::min(g.rate, gen.rate(tr.target, g.move));
        if (r <= 0) continue;
        int a = g.target;
        int b = gen.apply_move(tr.target, g.move);
        acc += tr.rate * r * (phi.big_phi(f[a], f[b]) - base) * m(s);
      }
    }
  }
  return acc;
}

}  // namespace

double spin_cancellation_sum(const Generator& gen, const Measure& m,
                             const PhiFamily& phi, std::span<const double> f) {
  return same_move_sum(gen, m, phi, f, true);
}

double zero_range_neutral_sum(const ZooInstance& zr, const PhiFamily& phi,
                              std::span<const double> f) {
  return same_move_sum(zr.gen, zr.measure, phi, f, false);
}

}  // namespace entrolab
