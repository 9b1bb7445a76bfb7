#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <nlohmann/json.hpp>

#include "entrolab/chain.hpp"
#include "entrolab/parallel.hpp"

using namespace entrolab;

namespace {

// Two states, one involutive flip, unit rates both ways.
Generator two_state_flip() {
  std::vector<Move> moves;
  moves.push_back(Move{"flip", "flip", [](const Configuration& c) {
                         return Configuration{-c[0]};
                       }});
  moves.push_back(null_move());
  return build_generator({{-1}, {1}}, moves,
                         [](const Configuration&, const Move& mv) {
                           return mv.is_null() ? 0.0 : 1.0;
                         });
}

LatticeModel poisson_model(double lambda) {
  LatticeModel model;
  model.d = 1;
  model.moves.push_back(Move{"inc0", "dec0", [](const Configuration& c) {
                               return Configuration{c[0] + 1};
                             }});
  model.moves.push_back(Move{"dec0", "inc0", [](const Configuration& c) {
                               return c[0] > 0 ? Configuration{c[0] - 1} : c;
                             }});
  model.moves.push_back(null_move());
  model.rate_fn = [lambda](const Configuration& eta, const Move& mv) {
    if (mv.is_null()) return 0.0;
    return mv.id == "inc0" ? 1.0 : lambda * eta[0];
  };
  model.log_weight = [lambda](const Configuration& eta) {
    return -(std::log(lambda) * eta[0] + std::lgamma(eta[0] + 1.0));
  };
  return model;
}

}  // namespace

TEST_CASE("birth-death on {0..5} enumerates boundary-retained transitions") {
  std::vector<Configuration> states;
  for (int k = 0; k <= 5; ++k) states.push_back({k});
  auto model = poisson_model(1.0);
  Generator gen = build_generator(states, model.moves, model.rate_fn,
                                  BoundaryPolicy::Identity);
  // 5 up-moves, 5 down-moves, plus the suppressed increment at the top.
  CHECK(gen.transition_count() == 11);
  int suppressed = 0;
  for (int s = 0; s < gen.size(); ++s)
    for (const auto& tr : gen.transitions(s))
      if (tr.target == s) ++suppressed;
  CHECK(suppressed == 1);
  CHECK(gen.rate(5, gen.move_index("inc0")) == 1.0);
}

TEST_CASE("degenerate generators") {
  Generator empty({{0}, {1}}, {});
  CHECK(empty.transition_count() == 0);
  CHECK(check_reversibility(empty, Measure{{0.5, 0.5}}).passed);  // vacuous

  Generator flip = two_state_flip();
  CHECK(flip.transition_count() == 2);
  CHECK(flip.rate(0, flip.move_index("flip")) == 1.0);
}

TEST_CASE("build_generator rejects bad rates and escapes") {
  std::vector<Move> moves{Move{"inc0", "dec0", [](const Configuration& c) {
                                 return Configuration{c[0] + 1};
                               }}};
  CHECK_THROWS_AS(build_generator({{0}, {1}}, moves,
                                  [](const Configuration&, const Move&) {
                                    return -1.0;
                                  }),
                  NegativeRateError);
  CHECK_THROWS_AS(build_generator({{0}, {1}}, moves,
                                  [](const Configuration&, const Move&) {
                                    return 1.0;
                                  }),
                  TargetOutsideSpaceError);
}

TEST_CASE("truncate boxes the model with identity walls") {
  LatticeModel model;
  model.d = 2;
  for (int i = 0; i < 2; ++i) {
    model.moves.push_back(Move{"inc" + std::to_string(i), "dec" + std::to_string(i),
                               [i](const Configuration& c) {
                                 Configuration out = c;
                                 ++out[i];
                                 return out;
                               }});
    model.moves.push_back(Move{"dec" + std::to_string(i), "inc" + std::to_string(i),
                               [i](const Configuration& c) {
                                 if (c[i] == 0) return c;
                                 Configuration out = c;
                                 --out[i];
                                 return out;
                               }});
  }
  model.rate_fn = [](const Configuration& eta, const Move& mv) {
    return mv.id[0] == 'i' ? 1.0 : static_cast<double>(eta[mv.id[3] - '0']);
  };
  Generator gen = truncate(model, 1);
  CHECK(gen.size() == 4);
  int s = gen.index_of({1, 0});
  int inc0 = gen.move_index("inc0");
  CHECK(gen.apply_move(s, inc0) == s);  // suppressed at the wall
  CHECK(gen.rate(s, inc0) == 1.0);      // rate retained
}

TEST_CASE("truncated Poisson: closed-form measure and nesting") {
  auto model = poisson_model(1.0);
  Generator gen = truncate(model, 3);
  CHECK(gen.size() == 4);

  Measure m = stationary_measure(gen);
  std::vector<double> expect{1.0, 1.0, 0.5, 1.0 / 6.0};
  double z = std::accumulate(expect.begin(), expect.end(), 0.0);
  for (int k = 0; k <= 3; ++k)
    CHECK(m(gen.index_of({k})) == doctest::Approx(expect[k] / z).epsilon(1e-12));

  Measure closed = truncated_measure(model, gen);
  auto rev = check_reversibility(gen, closed, 1e-12);
  CHECK(rev.passed);

  // Nested truncations agree strictly inside the smaller box.
  Generator small = truncate(model, 2);
  for (int s = 0; s < small.size(); ++s) {
    const Configuration& eta = small.state(s);
    if (eta[0] >= 2) continue;
    for (const auto& tr : small.transitions(s)) {
      if (tr.target == s || small.state(tr.target)[0] >= 2) continue;
      int sb = gen.index_of(eta);
      CHECK(gen.rate(sb, gen.move_index(small.moves()[tr.move].id)) == tr.rate);
    }
  }
}

TEST_CASE("reversibility check names an injected fault") {
  auto model = poisson_model(1.0);
  Generator gen = truncate(model, 3);
  Measure m = truncated_measure(model, gen);
  CHECK(check_reversibility(gen, m).passed);

  gen.add_transition(1, gen.move_index("inc0"), 2, 0.1);  // extra mass on one edge
  auto rep = check_reversibility(gen, m);
  CHECK_FALSE(rep.passed);
  CHECK(rep.worst_state == 1);
  CHECK(gen.moves()[rep.worst_move].id == "inc0");
}

TEST_CASE("stationary measure of the flip chain is uniform") {
  Generator gen = two_state_flip();
  Measure m = stationary_measure(gen);
  CHECK(m(0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(m(1) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("reducible chains are rejected") {
  // Two disconnected flip pairs: the null space of Q^T is two-dimensional.
  std::vector<Move> moves;
  moves.push_back(Move{"flip", "flip", [](const Configuration& c) {
                         Configuration out = c;
                         out[1] = -out[1];
                         return out;
                       }});
  Generator gen = build_generator({{0, -1}, {0, 1}, {1, -1}, {1, 1}}, moves,
                                  [](const Configuration&, const Move&) {
                                    return 1.0;
                                  });
  CHECK_THROWS_AS(stationary_measure(gen), ReducibleError);
}

TEST_CASE("a positive-rate move without its inverse is reported") {
  std::vector<Move> moves;
  moves.push_back(Move{"next", "prev", [](const Configuration& c) {
                         return Configuration{(c[0] + 1) % 3};
                       }});
  Generator gen = build_generator({{0}, {1}, {2}}, moves,
                                  [](const Configuration&, const Move&) {
                                    return 1.0;
                                  });
  CHECK_THROWS_AS(check_reversibility(gen, Measure{{1. / 3, 1. / 3, 1. / 3}}),
                  MissingInverseError);
}

TEST_CASE("apply_generator matches hand evaluations") {
  Generator flip = two_state_flip();
  auto lf = apply_generator(flip, std::vector<double>{0.0, 1.0});
  CHECK(lf[0] == doctest::Approx(1.0));
  CHECK(lf[1] == doctest::Approx(-1.0));

  auto constant = apply_generator(flip, std::vector<double>{3.0, 3.0});
  CHECK(constant[0] == 0.0);
  CHECK(constant[1] == 0.0);

  auto model = poisson_model(1.0);
  Generator gen = truncate(model, 3);
  std::vector<double> f(gen.size());
  for (int s = 0; s < gen.size(); ++s) f[s] = gen.state(s)[0];
  auto lf2 = apply_generator(gen, f);
  for (int s = 0; s < gen.size(); ++s) {
    int eta = gen.state(s)[0];
    double expect = (eta < 3 ? 1.0 : 0.0) - eta;
    CHECK(lf2[s] == doctest::Approx(expect).epsilon(1e-14));
  }

  CHECK_THROWS_AS(apply_generator(gen, std::vector<double>{1.0}),
                  DimensionMismatchError);
}

TEST_CASE("serial and parallel kernels agree bit for bit") {
  auto model = poisson_model(0.7);
  Generator gen = truncate(model, 12);
  std::vector<double> f(gen.size());
  for (int s = 0; s < gen.size(); ++s) f[s] = std::sin(s + 1.0) + 2.0;
  set_jobs(4);  // force the threaded path even on a single-core host
  auto a = apply_generator(gen, f);
  auto ea = evolve(gen, f, 0.7, 1e-12);
  set_jobs(0);
  auto b = serial::apply_generator(gen, f);
  auto eb = serial::evolve(gen, f, 0.7, 1e-12);
  CHECK(a == b);
  CHECK(ea == eb);
}

TEST_CASE("evolve: identity, conservation and the 2x2 closed form") {
  Generator flip = two_state_flip();
  std::vector<double> f{0.0, 1.0};
  auto f0 = evolve(flip, f, 0.0, 1e-12);
  CHECK(f0 == f);

  auto ft = evolve(flip, f, 1.0, 1e-13);
  CHECK(ft[0] == doctest::Approx(0.5 * (1 - std::exp(-2.0))).epsilon(1e-11));
  CHECK(ft[1] == doctest::Approx(0.5 * (1 + std::exp(-2.0))).epsilon(1e-11));

  std::vector<double> c{2.5, 2.5};
  auto ct = evolve(flip, c, 3.0, 1e-12);
  CHECK(ct[0] == doctest::Approx(2.5).epsilon(1e-11));

  CHECK_THROWS_AS(evolve(flip, f, -1.0, 1e-10), InvalidParamsError);
}

TEST_CASE("evolve preserves positivity and the stationary mean") {
  auto model = poisson_model(1.3);
  Generator gen = truncate(model, 6);
  Measure m = truncated_measure(model, gen);
  std::vector<double> f(gen.size());
  for (int s = 0; s < gen.size(); ++s) f[s] = 0.1 + s % 3;
  auto ft = evolve(gen, f, 1.7, 1e-11);
  double mean0 = 0.0, meant = 0.0;
  for (int s = 0; s < gen.size(); ++s) {
    CHECK(ft[s] > 0.0);
    mean0 += f[s] * m(s);
    meant += ft[s] * m(s);
  }
  CHECK(meant == doctest::Approx(mean0).epsilon(1e-9));
}

TEST_CASE("semigroup property within tolerance") {
  auto model = poisson_model(1.0);
  Generator gen = truncate(model, 5);
  std::vector<double> f(gen.size());
  for (int s = 0; s < gen.size(); ++s) f[s] = 1.0 + 0.3 * s;
  const double tol = 1e-11;
  for (double t : {0.1, 0.5})
    for (double s : {0.1, 0.5}) {
      auto once = evolve(gen, f, t + s, tol);
      auto twice = evolve(gen, evolve(gen, f, s, tol), t, tol);
      for (int i = 0; i < gen.size(); ++i)
        CHECK(std::abs(once[i] - twice[i]) <= 10 * tol);
    }
}

TEST_CASE("uniformization agrees with a dense matrix exponential") {
  for (int box : {9, 150}) {  // 10 and 151 states
    auto model = poisson_model(0.8);
    Generator gen = truncate(model, box);
    const int n = gen.size();
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
    for (int s = 0; s < n; ++s)
      for (const auto& tr : gen.transitions(s)) {
        if (tr.target == s) continue;
        q(s, tr.target) += tr.rate;
        q(s, s) -= tr.rate;
      }
    std::vector<double> f(n);
    for (int s = 0; s < n; ++s) f[s] = std::cos(0.5 * s) + 1.5;
    Eigen::MatrixXd pt = (0.6 * q).exp();
    Eigen::VectorXd oracle = pt * Eigen::Map<const Eigen::VectorXd>(f.data(), n);
    auto ours = evolve(gen, f, 0.6, 1e-12);
    for (int s = 0; s < n; ++s) CHECK(std::abs(ours[s] - oracle(s)) <= 1e-8);
  }
}

TEST_CASE("uniformization across multiple horizons") {
  auto model = poisson_model(0.8);
  Generator gen = truncate(model, 9);
  const int n = gen.size();
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  for (int s = 0; s < n; ++s)
    for (const auto& tr : gen.transitions(s)) {
      if (tr.target == s) continue;
      q(s, tr.target) += tr.rate;
      q(s, s) -= tr.rate;
    }
  std::vector<double> f(n);
  for (int s = 0; s < n; ++s) f[s] = std::cos(0.5 * s) + 1.5;
  for (double t : {0.2, 1.0, 2.5}) {
    Eigen::MatrixXd pt = (t * q).exp();
    Eigen::VectorXd fv = Eigen::Map<const Eigen::VectorXd>(f.data(), n);
    Eigen::VectorXd oracle = pt * fv;
    auto ours = evolve(gen, f, t, 1e-12);
    for (int s = 0; s < n; ++s) CHECK(std::abs(ours[s] - oracle(s)) <= 1e-8);
  }
}

TEST_CASE("generator JSON round trip is exact") {
  auto model = poisson_model(1.7);
  Generator gen = truncate(model, 4);
  nlohmann::json j = generator_to_json(gen);
  Generator back = generator_from_json(j);
  REQUIRE(back.size() == gen.size());
  CHECK(back.states() == gen.states());
  REQUIRE(back.moves().size() == gen.moves().size());
  for (int s = 0; s < gen.size(); ++s) {
    const auto& a = gen.transitions(s);
    const auto& b = back.transitions(s);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      CHECK(a[k].move == b[k].move);
      CHECK(a[k].target == b[k].target);
      CHECK(a[k].rate == b[k].rate);  // bit-exact through the decimal rendering
    }
  }
}

TEST_CASE("law evolution conserves mass") {
  auto model = poisson_model(1.0);
  Generator gen = truncate(model, 5);
  std::vector<double> law(gen.size(), 0.0);
  law[gen.index_of({2})] = 1.0;
  auto evolved = evolve_law(gen, law, 0.8, 1e-12);
  double total = std::accumulate(evolved.begin(), evolved.end(), 0.0);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  for (double w : evolved) CHECK(w >= 0.0);
}
