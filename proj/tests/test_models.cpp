#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "entrolab/models.hpp"
#include "entrolab/phi.hpp"
#include "entrolab/rng.hpp"

using namespace entrolab;

TEST_CASE("graph validation") {
  Graph g = Graph::cycle(5);
  CHECK(g.max_degree() == 2);
  CHECK(g.connected());
  CHECK_NOTHROW(g.validate());

  Graph loop;
  loop.n = 2;
  loop.edges = {{0, 0}};
  CHECK_THROWS_AS(loop.validate(), NonSimpleGraphError);

  Graph split;
  split.n = 3;
  split.edges = {{0, 1}};
  CHECK_THROWS_AS(split.validate(), InvalidParamsError);  // isolated vertex
}

TEST_CASE("Poisson walk: kappa+ = 0, kappa- = lambda") {
  ZooInstance zoo = build_irw_poisson([](const Configuration&) { return 0.0; }, 1.0,
                                      1, 6, "poisson");
  for (const auto& row : zoo.irw_tables.rows) {
    CHECK(row.kplus == 0.0);
    CHECK(row.kminus == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK(zoo.kappa.kappa == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(zoo.irw_tables.h33_ok);
  CHECK(check_reversibility(zoo.gen, zoo.measure, 1e-12).passed);
}

TEST_CASE("symmetric interaction: closed-form constant and hypothesis") {
  // d = 2 makes the (d-2) term vanish: kappa = lambda for any admissible beta.
  ZooInstance zoo = build_irw_symmetric([](int m) { return double(m) * m; }, 0.5,
                                        1.0, 2, 4);
  CHECK(zoo.kappa.kappa == 1.0);
  CHECK(zoo.kappa.hypotheses_ok);
  CHECK(check_reversibility(zoo.gen, zoo.measure, 1e-12).passed);

  // Interior kappa tables agree with the closed form at d = 2.
  CHECK(zoo.irw_tables.kappa_interior == doctest::Approx(1.0).epsilon(1e-12));

  // d = 3 strictly increasing h in the low-temperature regime: the scan
  // dominates the explicit bound lambda - (d-2) exp(-beta grad h(0)).
  int d = 3;
  double lambda = 1.0, beta = 1.2;
  REQUIRE(beta >= (std::log(d - 1.0) - std::log(lambda)) / 1.0);
  ZooInstance low = build_irw_symmetric([](int m) { return double(m) * m; }, beta,
                                        lambda, d, 3);
  double explicit_bound = lambda - (d - 2) * std::exp(-beta);
  CHECK(low.kappa.hypotheses_ok);
  CHECK(low.kappa.kappa >= explicit_bound - 1e-12);
}

TEST_CASE("double-potential walk: measure, coupling, curvature tables") {
  auto vplus = [](const Configuration& eta) {
    double total = eta[0] + eta[1];
    return 0.2 * total * total;
  };
  auto vminus = [](const Configuration& eta) {
    double w = 0.0;
    for (int x : eta) w += 0.8 * x + std::lgamma(x + 1.0);
    return w;
  };
  ZooInstance walk = build_irw(vplus, vminus, 2, 4, "double-potential");
  CHECK(walk.kappa.hypotheses_ok);
  CHECK(check_reversibility(walk.gen, walk.measure, 1e-12).passed);
  CHECK(check_admissible(walk.coupling, walk.gen).passed);

  // Independent evaluation of the per-state curvature quantities straight
  // from the rate definitions.
  auto rate = [&](Configuration eta, int j, bool plus) {
    if (plus) {
      Configuration up = eta;
      ++up[j];
      return std::exp(-(vplus(up) - vplus(eta)));
    }
    if (eta[j] <= 0) return 0.0;
    Configuration dn = eta;
    --dn[j];
    return std::exp(-(vminus(dn) - vminus(eta)));
  };
  auto grad = [&](const Configuration& eta, int i, int j, bool plus) {
    Configuration up = eta;
    ++up[i];
    return rate(up, j, plus) - rate(eta, j, plus);
  };
  for (const auto& row : walk.irw_tables.rows) {
    double kplus = -grad(row.eta, row.coord, row.coord, true);
    double kminus = grad(row.eta, row.coord, row.coord, false);
    for (int j = 0; j < 2; ++j) {
      if (j == row.coord) continue;
      kplus -= std::max(grad(row.eta, row.coord, j, true), 0.0);
      kplus -= std::max(grad(row.eta, row.coord, j, false), 0.0);
      kminus -= std::max(-grad(row.eta, row.coord, j, true), 0.0);
      kminus -= std::max(-grad(row.eta, row.coord, j, false), 0.0);
    }
    CHECK(row.kplus == doctest::Approx(kplus).epsilon(1e-12));
    CHECK(row.kminus == doctest::Approx(kminus).epsilon(1e-12));
  }

  // The certified constant backs the convex Sobolev inequality on the box.
  for (double alpha : {1.0, 2.0}) {
    PhiFamily phi = PhiFamily::alpha(alpha);
    double kappa = walk.kappa.for_phi(phi);
    CHECK(kappa > 0.0);
    for (int i = 0; i < 60; ++i) {
      Rng rng = Rng::stream(88, i);
      auto f = rng.positive_vector(walk.gen.size());
      CHECK(csi_check(walk.gen, walk.measure, phi, kappa, f).passed);
    }
  }
}

TEST_CASE("oddly convex potentials") {
  // V = 0: the origin condition gives lambda - (d-1); the scan gives lambda.
  auto zero = [](const Configuration&) { return 0.0; };
  auto report = oddly_convex_kappa(zero, 2.5, 3, 3);
  CHECK(report.origin_condition);
  CHECK(report.kappa_origin == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(report.kappa_scan == doctest::Approx(2.5).epsilon(1e-14));

  // V = c x1 x2: nonnegative mixed increments; scan matches the kappa tables
  // of the same walk (independent evaluation of the same curvature).
  auto bilinear = [](const Configuration& eta) { return 0.3 * eta[0] * eta[1]; };
  auto rep2 = oddly_convex_kappa(bilinear, 1.5, 2, 3);
  ZooInstance walk = build_irw_poisson(bilinear, 1.5, 2, 3, "bilinear");
  double table_min = std::numeric_limits<double>::infinity();
  for (const auto& row : walk.irw_tables.rows)
    table_min = std::min(table_min, row.kplus + row.kminus);
  CHECK(rep2.kappa_scan == doctest::Approx(table_min).epsilon(1e-12));

  auto bad = [](const Configuration& eta) { return -0.5 * eta[0] * eta[1]; };
  CHECK_THROWS_AS(oddly_convex_kappa(bad, 1.0, 2, 3), HessianSignViolationError);
}

TEST_CASE("tilde_h surgery") {
  // Convex increasing h whose decrements already satisfy the floor: no surgery.
  auto h1 = [](int m) { return static_cast<double>(m) * m; };
  TildeH keep = tilde_h(h1, 1.0, 2, 0.5);
  CHECK(keep.m_eps == 0);
  CHECK(keep.verified);
  for (int m = 0; m < 10; ++m) CHECK(keep.h(m) == h1(m));

  // Parabola with a dip: linear extension below M_eps, exact flat decrements.
  auto h2 = [](int m) { return (m - 3.0) * (m - 3.0); };
  TildeH surgered = tilde_h(h2, 1.0, 2, 0.05);
  CHECK(surgered.m_eps > 0);
  CHECK(surgered.verified);
  int m_eps = surgered.m_eps;
  double slope = h2(m_eps + 1) - h2(m_eps);
  for (int m = 0; m < m_eps; ++m)
    CHECK(surgered.h(m) ==
          doctest::Approx(h2(m_eps) - slope * (m_eps - m)).epsilon(1e-14));
  auto dec = [&](int m) {
    return std::exp(-(surgered.h(m + 2) - surgered.h(m + 1))) -
           std::exp(-(surgered.h(m + 1) - surgered.h(m)));
  };
  for (int m = 0; m + 1 <= m_eps - 1; ++m) CHECK(dec(m) == 0.0);

  auto concave = [](int m) { return -static_cast<double>(m) * m; };
  CHECK_THROWS_AS(tilde_h(concave, 1.0, 2, 0.1, 64, 8), NoSuchMError);
}

TEST_CASE("glauber at infinite temperature") {
  auto h = [](const Configuration& eta) {
    return -0.7 * eta[0] * (eta.size() > 1 ? eta[1] : 1);
  };
  ZooInstance zoo = build_glauber(h, 0.0, 3, "beta0");
  CHECK(zoo.kappa.kappa == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(zoo.kappa.kappa_bar == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(zoo.kappa.kappa_1 == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(check_admissible(zoo.coupling, zoo.gen).passed);
}

TEST_CASE("single spin: kappa(eta, sigma) = c(sigma eta, sigma)") {
  ZooInstance zoo = build_glauber(
      [](const Configuration& eta) { return 0.4 * eta[0]; }, 1.0, 1, "one-spin");
  const Generator& gen = zoo.gen;
  int flip = gen.move_index("flip0");
  int e = gen.null_move_index();
  for (const auto& seed : zoo.coupling.seeds) {
    int t = gen.apply_move(seed.state, seed.move);
    CHECK(seed.rate_of(e, flip) == doctest::Approx(gen.rate(t, flip)).epsilon(1e-14));
  }
}

TEST_CASE("Curie-Weiss constants") {
  // beta = 0 collapses all exponentials.
  ZooInstance free = curie_weiss(4, 0.0);
  CHECK(free.f_cw(0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(free.kappa.kappa == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(free.kappa.kappa_bar == doctest::Approx(1.0).epsilon(1e-14));

  // N = 5, beta = 0.2: midpoint closed form.
  ZooInstance cw5 = curie_weiss(5, 0.2);
  double expect = 2.0 * (1.0 - 2.0 * (std::exp(0.08) - 1.0));
  CHECK(cw5.kappa.kappa == doctest::Approx(expect).epsilon(1e-13));
  CHECK(cw5.kappa.hypotheses_ok);

  // Exhaustive minimum over the full space equals the closed form, and the
  // kappa(eta, sigma_i) + kappa(sigma_i eta, sigma_i) sum is f_CW(m).
  for (int n : {3, 4, 5}) {
    ZooInstance cw = curie_weiss(n, 0.8 * curie_weiss_boundary_beta(n));
    CHECK(cw.kappa_exhaustive == doctest::Approx(cw.kappa.kappa).epsilon(1e-12));
    CHECK(cw.kappa_bar_exhaustive ==
          doctest::Approx(cw.kappa.kappa_bar).epsilon(1e-12));
  }

  ZooInstance hot = curie_weiss(5, 3.0);
  CHECK_FALSE(hot.kappa.hypotheses_ok);
}

TEST_CASE("CW generic curvature equals f_CW(m) state by state") {
  int n = 3;
  double beta = 0.25;
  ZooInstance cw = curie_weiss(n, beta);
  const Generator& gen = cw.gen;
  int e = gen.null_move_index();
  for (const auto& seed : cw.coupling.seeds) {
    const Configuration& eta = gen.state(seed.state);
    int x = seed.move;  // flips are listed first, index == site
    int site = std::stoi(gen.moves()[x].id.substr(4));
    int m = 0;
    for (int j = 0; j < n; ++j)
      if (j != site && eta[j] * eta[site] == 1) ++m;
    int t = gen.apply_move(seed.state, seed.move);
    const CouplingSeed* mirror = cw.coupling.find(t, seed.move);
    REQUIRE(mirror != nullptr);
    double sum = seed.rate_of(e, x) + mirror->rate_of(e, x);
    CHECK(sum == doctest::Approx(cw.f_cw(m)).epsilon(1e-12));
  }
}

TEST_CASE("Ising constants and exhaustive domination") {
  ZooInstance free = ising(Graph::cycle(4), 0.0);
  CHECK(free.kappa.kappa == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(free.kappa.kappa_bar == doctest::Approx(1.0).epsilon(1e-14));

  ZooInstance cold = ising(Graph::cycle(4), 0.05);
  CHECK(cold.kappa.hypotheses_ok);
  // The closed forms are worst-case: the exhaustive minima dominate them.
  CHECK(cold.kappa_exhaustive >= cold.kappa.kappa - 1e-12);
  CHECK(cold.kappa_bar_exhaustive >= cold.kappa.kappa_bar - 1e-12);
  CHECK(check_admissible(cold.coupling, cold.gen).passed);
  CHECK(check_reversibility(cold.gen, cold.measure, 1e-12).passed);

  double boundary = ising_boundary_beta(1);
  CHECK(2.0 * (1 - std::exp(-2 * boundary)) * std::exp(4 * boundary) ==
        doctest::Approx(1.0).epsilon(1e-12));
  ZooInstance edge = ising(Graph::cycle(4), boundary);
  CHECK(std::abs(edge.kappa.kappa_bar) <= 1e-9);  // boundary: kappa_bar = 0

  ZooInstance hot = ising(Graph::cycle(4), 0.5);
  CHECK_FALSE(hot.kappa.hypotheses_ok);

  // A path is a box in Z^1 without wrap-around: corner sites have degree 1,
  // and the worst-case closed forms still sit below the exhaustive minima.
  Graph path;
  path.n = 4;
  path.edges = {{0, 1}, {1, 2}, {2, 3}};
  ZooInstance open_chain = ising(path, 0.08);
  CHECK(open_chain.kappa.hypotheses_ok);
  CHECK(open_chain.kappa_exhaustive >= open_chain.kappa.kappa - 1e-12);
  CHECK(open_chain.kappa_bar_exhaustive >= open_chain.kappa.kappa_bar - 1e-12);
  for (int i = 0; i < 100; ++i) {
    Rng rng = Rng::stream(77, i);
    auto f = rng.positive_vector(open_chain.gen.size());
    CHECK(csi_check(open_chain.gen, open_chain.measure, PhiFamily::alpha(1.0),
                    open_chain.kappa.kappa_1, f)
              .passed);
  }
}

TEST_CASE("hardcore: constants, state space, limits") {
  ZooInstance pair = hardcore(Graph::single_edge(), 0.5);
  CHECK(pair.gen.size() == 3);  // empty, left, right
  CHECK(pair.kappa.kappa == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(pair.kappa.kappa_bar == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(pair.kappa.kappa_1 == doctest::Approx(2.0).epsilon(1e-14));

  ZooInstance cycle = hardcore(Graph::cycle(5), 0.15);
  CHECK(cycle.gen.size() == 11);
  CHECK(cycle.kappa.kappa == doctest::Approx(0.85).epsilon(1e-14));
  CHECK(cycle.kappa.kappa_bar == doctest::Approx(0.15).epsilon(1e-14));
  CHECK(check_reversibility(cycle.gen, cycle.measure, 1e-12).passed);
  CHECK(check_admissible(cycle.coupling, cycle.gen).passed);

  ZooInstance dilute = hardcore(Graph::cycle(5), 1e-4);
  CHECK(dilute.kappa.kappa == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(dilute.kappa.kappa_bar == doctest::Approx(1e-4).epsilon(1e-10));

  ZooInstance packed = hardcore(Graph::cycle(5), 0.6);
  CHECK_FALSE(packed.kappa.hypotheses_ok);

  Graph lone;
  lone.n = 1;
  CHECK_THROWS_AS(hardcore(lone, 0.5), InvalidParamsError);  // Delta undefined
}

TEST_CASE("Bernoulli-Laplace: uniform measure and certified constants") {
  ZooInstance bl = bernoulli_laplace(4, 2);
  CHECK(bl.gen.size() == 6);
  Measure m = stationary_measure(bl.gen);
  for (int s = 0; s < bl.gen.size(); ++s)
    CHECK(m(s) == doctest::Approx(1.0 / 6).epsilon(1e-12));
  CHECK(bl.kappa.kappa == 4.0);
  CHECK(bl.kappa.kappa_1 == 6.0);
  CHECK(bl.kappa.kappa_alpha(2.0) == 8.0);
  CHECK(check_reversibility(bl.gen, bl.measure, 1e-12).passed);
  CHECK(check_admissible(bl.coupling, bl.gen).passed);

  ZooInstance tiny = bernoulli_laplace(2, 1);
  CHECK(tiny.gen.size() == 2);
  for (const auto& seed : tiny.coupling.seeds)
    CHECK(seed.entries.size() == 2);  // matched pair only; no third sites

  CHECK_THROWS_AS(bernoulli_laplace(3, 3), InvalidParamsError);
}

TEST_CASE("zero range: measured increments and factorial measure") {
  ZooInstance zr = zero_range_linear(3, 4);
  CHECK(zr.gen.size() == 15);
  CHECK(zr.measured_c == 1.0);
  CHECK(zr.measured_delta == 0.0);
  CHECK(zr.kappa.kappa_1 == 1.0);
  CHECK(zr.kappa.kappa_alpha(1.5) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(zr.kappa.kappa_alpha(2.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(check_reversibility(zr.gen, zr.measure, 1e-12).passed);
  CHECK(check_admissible(zr.coupling, zr.gen).passed);
  Measure m = stationary_measure(zr.gen);
  for (int s = 0; s < zr.gen.size(); ++s)
    CHECK(m(s) == doctest::Approx(zr.measure(s)).epsilon(1e-9));

  // A site with steeper increments: c stays 1, delta picks up the excess,
  // and the alpha constants shift to alpha c - delta.
  std::vector<std::function<double(int)>> rates{
      [](int k) { return 1.2 * k; }, [](int k) { return double(k); },
      [](int k) { return double(k); }};
  ZooInstance skew = zero_range(3, 3, rates);
  CHECK(skew.measured_c == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(skew.measured_delta == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(skew.kappa.hypotheses_ok);
  CHECK(skew.kappa.kappa_1 == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(skew.kappa.kappa_alpha(2.0) == doctest::Approx(1.8).epsilon(1e-12));
  CHECK(check_admissible(skew.coupling, skew.gen).passed);
  CHECK(check_reversibility(skew.gen, skew.measure, 1e-12).passed);
  for (double alpha : {1.0, 1.5, 2.0}) {
    PhiFamily phi = PhiFamily::alpha(alpha);
    double kappa = skew.kappa.for_phi(phi);
    for (int i = 0; i < 100; ++i) {
      Rng rng = Rng::stream(55, i);
      auto f = rng.positive_vector(skew.gen.size());
      CHECK(csi_check(skew.gen, skew.measure, phi, kappa, f).passed);
    }
  }

  CHECK_THROWS_AS(zero_range(2, 2, {std::function<double(int)>([](int k) {
                                      return k + 1.0;  // c_x(0) != 0
                                    }),
                                    std::function<double(int)>([](int k) {
                                      return double(k);
                                    })}),
                  InvalidParamsError);
}

TEST_CASE("cancellation sums vanish on their instances") {
  ZooInstance cw = curie_weiss(4, 0.3);
  ZooInstance is = ising(Graph::cycle(4), 0.1);
  ZooInstance zr = zero_range_linear(3, 3);
  for (double alpha : {1.0, 1.5, 2.0}) {
    PhiFamily phi = PhiFamily::alpha(alpha);
    for (int i = 0; i < 20; ++i) {
      Rng rng = Rng::stream(777, i);
      auto f1 = rng.positive_vector(cw.gen.size());
      CHECK(std::abs(spin_cancellation_sum(cw.gen, cw.measure, phi, f1)) <= 1e-10);
      auto f2 = rng.positive_vector(is.gen.size());
      CHECK(std::abs(spin_cancellation_sum(is.gen, is.measure, phi, f2)) <= 1e-10);
      auto f3 = rng.positive_vector(zr.gen.size());
      CHECK(std::abs(zero_range_neutral_sum(zr, phi, f3)) <= 1e-10);
    }
  }
}

TEST_CASE("zoo instances satisfy their convex Sobolev inequalities") {
  std::vector<ZooInstance> zoo;
  zoo.push_back(build_irw_symmetric([](int m) { return double(m) * m; }, 0.5, 1.0, 2, 4));
  zoo.push_back(curie_weiss(4, 0.8 * curie_weiss_boundary_beta(4)));
  zoo.push_back(ising(Graph::cycle(4), 0.05));
  zoo.push_back(hardcore(Graph::cycle(5), 0.15));
  zoo.push_back(bernoulli_laplace(4, 2));
  zoo.push_back(zero_range_linear(3, 4));
  for (const auto& inst : zoo) {
    REQUIRE(inst.kappa.hypotheses_ok);
    for (double alpha : {1.0, 1.5, 2.0}) {
      PhiFamily phi = PhiFamily::alpha(alpha);
      double kappa = inst.kappa.for_phi(phi);
      for (int i = 0; i < 50; ++i) {
        Rng rng = Rng::stream(31 + static_cast<int>(alpha * 4), i);
        auto f = rng.positive_vector(inst.gen.size());
        CHECK(csi_check(inst.gen, inst.measure, phi, kappa, f).passed);
      }
    }
  }
}
