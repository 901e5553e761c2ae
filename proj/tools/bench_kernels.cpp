// Times the OpenMP kernels against the serial reference for growing N and
// prints a speedup table. Build target only; not part of the test suite.

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "homoflow/kernels.hpp"

namespace {

using clock_type = std::chrono::steady_clock;

std::vector<double> random_config(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> gap(0.5, 1.5);
    std::vector<double> x(static_cast<size_t>(n));
    x[0] = 0.0;
    for (int i = 1; i < n; ++i) x[static_cast<size_t>(i)] = x[static_cast<size_t>(i) - 1] + gap(rng);
    homoflow::kernels::subtract_mean(x);
    return x;
}

template <typename F>
double time_ms(int reps, F&& f) {
    const auto t0 = clock_type::now();
    for (int r = 0; r < reps; ++r) f();
    const auto t1 = clock_type::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

}  // namespace

int main() {
    const double m = 1.2, chi = 0.3, alpha = 0.1;
    std::mt19937_64 rng(42);

    std::printf("%8s %6s | %12s %12s %8s | %12s %12s %8s\n", "N", "reps", "grad_ser(ms)",
                "grad_omp(ms)", "speedup", "hess_ser(ms)", "hess_omp(ms)", "speedup");
    for (int n : {256, 1024, 4096, 16384}) {
        const auto x = random_config(n, rng);
        std::vector<double> g(static_cast<size_t>(n));
        std::vector<double> h(static_cast<size_t>(n) * static_cast<size_t>(n));
        const int reps = n <= 1024 ? 50 : (n <= 4096 ? 10 : 2);

        volatile double sink = 0;  // keep the optimizer honest
        const double gs = time_ms(reps, [&] {
            homoflow::ref::gradient(x, m, chi, alpha, g);
            sink = sink + g[0];
        });
        const double go = time_ms(reps, [&] {
            homoflow::kernels::gradient(x, m, chi, alpha, g);
            sink = sink + g[0];
        });
        const double hs = time_ms(reps, [&] {
            homoflow::ref::hessian(x, m, chi, alpha, h);
            sink = sink + h[0];
        });
        const double ho = time_ms(reps, [&] {
            homoflow::kernels::hessian(x, m, chi, alpha, h);
            sink = sink + h[0];
        });
        std::printf("%8d %6d | %12.3f %12.3f %8.2f | %12.3f %12.3f %8.2f\n", n, reps, gs, go,
                    gs / go, hs, ho, hs / ho);
    }

    // agreement spot check
    const auto x = random_config(512, rng);
    std::vector<double> a(512), b(512);
    homoflow::ref::gradient(x, m, chi, alpha, a);
    homoflow::kernels::gradient(x, m, chi, alpha, b);
    double err = 0;
    for (int i = 0; i < 512; ++i) err = std::max(err, std::abs(a[static_cast<size_t>(i)] - b[static_cast<size_t>(i)]));
    std::printf("max |serial - omp| on the gradient: %.3e\n", err);
    return 0;
}
