// Kernel benchmark: serial reference vs OpenMP for the three data-parallel
// hot paths (trajectory simulation, exact evolution, circle-grid evaluation).

#include <chrono>
#include <cstdio>

#include "qpwalk/analysis.hpp"
#include "qpwalk/constructions.hpp"
#include "qpwalk/engine.hpp"

using namespace qpwalk;
using Clock = std::chrono::steady_clock;

namespace {

double time_of(void (*fn)(Exec), Exec exec) {
    auto t0 = Clock::now();
    fn(exec);
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void bench_simulate(Exec exec) {
    Environment env = Environment::periodic({0.7, 0.45, 0.52, 0.49});
    simulate(env, 4000, 50000, 42, RecordMode::endpoints, 0, exec);
}

void bench_evolve(Exec exec) {
    Environment env = Environment::periodic({0.52, 0.48, 0.5, 0.55});
    evolve_exact(env, 250, -400000, 400000, 0, exec);
}

void bench_grid(Exec exec) {
    CircleMap p = CircleMap::logistic_of(CircleMap::harmonic(1, 0.2, 0.0, -0.4));
    drift_profile(p, Frequency::golden(), 512, 20000.0, 1e-10, exec);
}

void row(const char* name, void (*fn)(Exec)) {
    fn(Exec::serial); // warm up
    double ts = time_of(fn, Exec::serial);
    double tp = time_of(fn, Exec::openmp);
    std::printf("%-22s serial %8.3f s   openmp %8.3f s   speedup %.2fx\n", name,
                ts, tp, ts / tp);
}

} // namespace

int main() {
    std::printf("workers: %d\n", worker_count());
    row("simulate (2e8 steps)", bench_simulate);
    row("evolve (2e8 sites)", bench_evolve);
    row("drift grid (512 pts)", bench_grid);
    return 0;
}
