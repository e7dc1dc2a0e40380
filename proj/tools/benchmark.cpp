// Compares the OpenMP kernels against their serial reference implementations
// and checks that both produce identical results.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ltp/derivation.hpp"
#include "ltp/poly.hpp"
#include "ltp/random.hpp"
#include "ltp/transport.hpp"

using namespace ltp;

namespace {

double ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

CoefficientField random_field(Rng& rng, int n, int degree) {
  PolyMat entries(n, std::vector<Poly>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Poly p;
      for (int k = 0; k <= degree; ++k) p.c.push_back(rng.uniform(-1.0, 1.0));
      entries[i][j] = p;
    }
  CoefficientField g;
  g.dim = n;
  g.smoothness = Smoothness::analytic;
  g.eval = [entries](double s) { return eval(entries, s); };
  return g;
}

struct Row {
  const char* name;
  double serial_ms;
  double parallel_ms;
  bool identical;
};

void print(const Row& r) {
  std::printf("%-28s %10.1f ms %10.1f ms   x%5.2f   %s\n", r.name, r.serial_ms, r.parallel_ms,
              r.serial_ms / r.parallel_ms, r.identical ? "identical" : "MISMATCH");
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP not enabled; both columns run serially\n");
#endif
  std::printf("%-28s %13s %13s %8s\n", "kernel", "serial", "parallel", "speedup");

  Rng rng(7);
  const Interval iv{0.0, 1.0};
  const CoefficientField field = random_field(rng, 4, 3);
  const FundamentalSolution sol = solve_fundamental(field, 0.0, iv, 1e-3);
  const TransportSource src = as_source(sol);

  {
    const int samples = 200000;
    auto t0 = std::chrono::steady_clock::now();
    const AxiomReport a = check_axioms_serial(src, samples, 11);
    const double serial = ms_since(t0);
    t0 = std::chrono::steady_clock::now();
    const AxiomReport b = check_axioms(src, samples, 11);
    const double parallel = ms_since(t0);
    const bool same = a.max_composition_residual == b.max_composition_residual &&
                      a.max_identity_residual == b.max_identity_residual &&
                      a.max_inverse_residual == b.max_inverse_residual;
    print({"check_axioms (200k triples)", serial, parallel, same});
  }

  {
    auto t0 = std::chrono::steady_clock::now();
    const RoundtripResult a = roundtrip_coefficients_serial(field, iv, 1e-3, 1e-4, 20001);
    const double serial = ms_since(t0);
    t0 = std::chrono::steady_clock::now();
    const RoundtripResult b = roundtrip_coefficients(field, iv, 1e-3, 1e-4, 20001);
    const double parallel = ms_since(t0);
    print({"roundtrip (20k samples)", serial, parallel, a.max_error == b.max_error});
  }

  {
    std::vector<CoefficientField> fields;
    for (int i = 0; i < 64; ++i) fields.push_back(random_field(rng, 3, 3));
    auto t0 = std::chrono::steady_clock::now();
    const auto a = solve_fundamental_batch_serial(fields, 0.0, iv, 1e-3);
    const double serial = ms_since(t0);
    t0 = std::chrono::steady_clock::now();
    const auto b = solve_fundamental_batch(fields, 0.0, iv, 1e-3);
    const double parallel = ms_since(t0);
    bool same = true;
    for (std::size_t i = 0; i < fields.size(); ++i)
      same = same && (a[i].y(1.0) - b[i].y(1.0)).max_abs() == 0.0;
    print({"batch solve (64 fields)", serial, parallel, same});
  }

  return 0;
}
