#pragma once

#include <cstdlib>
#include <functional>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace entrolab {

// Worker count: ENTROLAB_JOBS overrides whatever was set programmatically.
inline int& job_override() {
  static int jobs = 0;  // 0 = library default
  return jobs;
}

inline void set_jobs(int jobs) { job_override() = jobs; }

inline int effective_jobs() {
  if (const char* env = std::getenv("ENTROLAB_JOBS")) {
    int j = std::atoi(env);
    if (j > 0) return j;
  }
  if (job_override() > 0) return job_override();
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// Static schedule so a fixed job count always partitions work the same way.
template <typename Body>
void parallel_for(long n, const Body& body) {
#ifdef _OPENMP
  const int jobs = effective_jobs();
  if (jobs > 1 && n > 1) {
#pragma omp parallel for schedule(static) num_threads(jobs)
    for (long i = 0; i < n; ++i) body(i);
    return;
  }
#endif
  for (long i = 0; i < n; ++i) body(i);
}

}  // namespace entrolab
