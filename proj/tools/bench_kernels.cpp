// Compares the serial reference kernels against the OpenMP entry points and
// verifies bitwise agreement while timing both.
#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <vector>

#include "treegan/kernels.hpp"
#include "treegan/rng.hpp"

using treegan::Rng;
namespace k = treegan::kernels;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
  auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

}  // namespace

int main() {
  Rng rng(123);
  std::printf("%-16s %8s %8s %12s %12s %8s\n", "kernel", "rows", "cols", "serial_ms",
              "parallel_ms", "match");
  bool all_match = true;
  for (int n : {256, 1024, 4096}) {
    int rows = n, cols = n;
    std::vector<double> w(static_cast<size_t>(rows) * cols), x(static_cast<size_t>(cols)),
        g(static_cast<size_t>(rows));
    for (auto& v : w) v = rng.uniform(-1, 1);
    for (auto& v : x) v = rng.uniform(-1, 1);
    for (auto& v : g) v = rng.uniform(-1, 1);

    std::vector<double> y1(static_cast<size_t>(rows)), y2(static_cast<size_t>(rows));
    int reps = n <= 1024 ? 50 : 10;
    double ts = time_ms([&] { k::matvec_serial(w.data(), x.data(), y1.data(), rows, cols); }, reps);
    double tp = time_ms([&] { k::matvec(w.data(), x.data(), y2.data(), rows, cols); }, reps);
    bool match = std::memcmp(y1.data(), y2.data(), y1.size() * sizeof(double)) == 0;
    all_match &= match;
    std::printf("%-16s %8d %8d %12.4f %12.4f %8s\n", "matvec", rows, cols, ts, tp,
                match ? "yes" : "NO");

    std::vector<double> xg1(static_cast<size_t>(cols), 0.0), xg2 = xg1;
    ts = time_ms([&] { k::matvec_t_accum_serial(w.data(), g.data(), xg1.data(), rows, cols); },
                 reps);
    tp = time_ms([&] { k::matvec_t_accum(w.data(), g.data(), xg2.data(), rows, cols); }, reps);
    match = std::memcmp(xg1.data(), xg2.data(), xg1.size() * sizeof(double)) == 0;
    all_match &= match;
    std::printf("%-16s %8d %8d %12.4f %12.4f %8s\n", "matvec_t_accum", rows, cols, ts, tp,
                match ? "yes" : "NO");

    std::vector<double> wg1(w.size(), 0.0), wg2 = wg1;
    ts = time_ms([&] { k::outer_accum_serial(g.data(), x.data(), wg1.data(), rows, cols); }, reps);
    tp = time_ms([&] { k::outer_accum(g.data(), x.data(), wg2.data(), rows, cols); }, reps);
    match = std::memcmp(wg1.data(), wg2.data(), wg1.size() * sizeof(double)) == 0;
    all_match &= match;
    std::printf("%-16s %8d %8d %12.4f %12.4f %8s\n", "outer_accum", rows, cols, ts, tp,
                match ? "yes" : "NO");
  }
  if (!all_match) {
    std::fprintf(stderr, "parallel kernels diverged from the serial reference\n");
    return 1;
  }
  return 0;
}
