// Benchmark of the OpenMP kernels against their serial twins. Run with
// ENTROLAB_JOBS unset to let OpenMP pick the thread count.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include "entrolab/chain.hpp"
#include "entrolab/coupling.hpp"
#include "entrolab/models.hpp"
#include "entrolab/parallel.hpp"
#include "entrolab/phi.hpp"
#include "entrolab/rng.hpp"

using namespace entrolab;

namespace {

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch())
      .count();
}

template <typename Fn>
double timed(const Fn& fn, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    double t0 = now_ms();
    fn();
    best = std::min(best, now_ms() - t0);
  }
  return best;
}

struct Row {
  const char* name;
  double serial_ms;
  double parallel_ms;
  double check_serial;
  double check_parallel;
};

void print(const Row& row) {
  std::printf("%-28s serial %9.2f ms   parallel %9.2f ms   speedup %5.2fx   %s\n",
              row.name, row.serial_ms, row.parallel_ms,
              row.serial_ms / row.parallel_ms,
              row.check_serial == row.check_parallel ? "results match"
                                                     : "RESULTS DIFFER");
}

}  // namespace

int main() {
  std::printf("jobs: %d\n", effective_jobs());

  {  // semigroup evolution on a d=2 box
    ZooInstance walk = build_irw_symmetric([](int m) { return double(m) * m; }, 0.4,
                                           1.0, 2, 47, "bench-walk");
    std::vector<double> f(walk.gen.size());
    for (int s = 0; s < walk.gen.size(); ++s) f[s] = 1.0 + std::sin(0.1 * s);
    Row row{"evolve (2304 states)", 0, 0, 0, 0};
    int saved = job_override();
    auto sum = [](const std::vector<double>& v) {
      double acc = 0;
      for (double x : v) acc += x;
      return acc;
    };
    row.serial_ms = timed(
        [&] {
          auto out = serial::evolve(walk.gen, f, 1.0, 1e-10);
          return out;
        },
        3);
    row.check_serial = sum(serial::evolve(walk.gen, f, 1.0, 1e-10));
    set_jobs(0);
    row.parallel_ms = timed([&] { evolve(walk.gen, f, 1.0, 1e-10); }, 3);
    row.check_parallel = sum(evolve(walk.gen, f, 1.0, 1e-10));
    set_jobs(saved);
    print(row);
  }

  {  // sampled convex Sobolev slacks on Bernoulli-Laplace
    ZooInstance bl = bernoulli_laplace(10, 5);
    PhiFamily phi = PhiFamily::alpha(1.0);
    const int draws = 800;
    auto sweep = [&] {
      std::vector<double> slack(draws);
      parallel_for(draws, [&](long i) {
        Rng rng = Rng::stream(3, i);
        auto f = rng.positive_vector(bl.gen.size());
        slack[i] = csi_check(bl.gen, bl.measure, phi, 10.0, f).slack;
      });
      double worst = slack[0];
      for (double s : slack) worst = std::min(worst, s);
      return worst;
    };
    Row row{"csi sweep (252 states x800)", 0, 0, 0, 0};
    set_jobs(1);
    row.serial_ms = timed(sweep, 2);
    row.check_serial = sweep();
    set_jobs(0);
    row.parallel_ms = timed(sweep, 2);
    row.check_parallel = sweep();
    print(row);
  }

  {  // Lemma A.1 sampling
    auto sweep = [&] { return check_lemma_A1(1.5, 200000, 7).min_beckner_slack; };
    Row row{"lemma A1 (2e5 samples)", 0, 0, 0, 0};
    set_jobs(1);
    row.serial_ms = timed(sweep, 2);
    row.check_serial = sweep();
    set_jobs(0);
    row.parallel_ms = timed(sweep, 2);
    row.check_parallel = sweep();
    print(row);
  }

  {  // organizer sweep on Curie-Weiss
    ZooInstance cw = curie_weiss(8, 0.2);
    PhiFamily phi = PhiFamily::alpha(1.5);
    const int draws = 64;
    auto sweep = [&] {
      std::vector<double> vals(draws);
      parallel_for(draws, [&](long i) {
        Rng rng = Rng::stream(5, i);
        auto f = rng.positive_vector(cw.gen.size());
        vals[i] =
            organize_terms(cw.gen, cw.measure, cw.coupling, phi, f).full_derivative;
      });
      double acc = 0;
      for (double v : vals) acc = std::min(acc, v);
      return acc;
    };
    Row row{"organizer (256 states x64)", 0, 0, 0, 0};
    set_jobs(1);
    row.serial_ms = timed(sweep, 2);
    row.check_serial = sweep();
    set_jobs(0);
    row.parallel_ms = timed(sweep, 2);
    row.check_parallel = sweep();
    print(row);
  }
  return 0;
}
