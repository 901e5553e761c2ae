#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "homoflow/model.hpp"

using namespace homoflow;
using testutil::random_config;
using testutil::random_unit_config;

TEST_CASE("energy breakdown: unit gap, repulsion only") {
    const auto x = Configuration::from_positions({-0.5, 0.5});
    const ModelParams p{2.0, 0.0, 0.0, 2};
    const auto b = energy_breakdown(x, p);
    CHECK(b.internal == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(b.total == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(b.interaction == 0.0);
}

TEST_CASE("energy breakdown: three-particle reference values") {
    const auto x = Configuration::from_positions({-1.0, 0.0, 1.0});
    const ModelParams p{1.2, 1.45, 0.0, 3};
    const auto b = energy_breakdown(x, p);
    // exact: 7.25 * 2 * (2 + 2^{-0.2})
    const double interaction = 7.25 * 2.0 * (2.0 + std::pow(2.0, -0.2));
    CHECK(b.internal == doctest::Approx(10.0).epsilon(1e-14));
    CHECK(b.interaction == doctest::Approx(interaction).epsilon(1e-14));
    CHECK(std::abs(b.interaction - 41.62299) < 1e-4);
    CHECK(std::abs(b.total - (-31.62299)) < 1e-4);
    CHECK(b.total == doctest::Approx(b.internal - b.interaction + b.quadratic).epsilon(1e-14));
}

TEST_CASE("homogeneity of the energy and gradient") {
    std::mt19937_64 rng(7);
    for (int n : {2, 3, 5, 10}) {
        for (double m : {1.2, 1.5, 1.9}) {
            const ModelParams p{m, 0.8, 0.0, n};
            const auto x = random_config(n, rng);
            const auto b = energy_breakdown(x, p);
            const auto g = gradient(x, p);
            for (double lam : {0.5, 2.0, 10.0}) {
                const auto xs = dilate(x, lam);
                const auto bs = energy_breakdown(xs, p);
                const double want = std::pow(lam, 1.0 - m) * b.total;
                CHECK(std::abs(bs.total - want) <= 1e-12 * std::abs(want));
                const auto gs = gradient(xs, p);
                const double gscale = std::pow(lam, -m);
                double err = 0, norm = 0;
                for (size_t i = 0; i < gs.size(); ++i) {
                    err = std::max(err, std::abs(gs[i] - gscale * g[i]));
                    norm = std::max(norm, std::abs(gscale * g[i]));
                }
                CHECK(err <= 1e-12 * norm);
            }
        }
    }
}

TEST_CASE("Euler identity and force balance") {
    std::mt19937_64 rng(13);
    for (int n : {2, 3, 5, 10}) {
        for (double m : {1.2, 1.5, 1.9}) {
            const ModelParams p{m, 0.6, 0.0, n};
            const auto x = random_config(n, rng);
            const auto b = energy_breakdown(x, p);
            const auto g = gradient(x, p);
            double dot = 0, gsum = 0, gnorm = 0;
            for (int i = 0; i < n; ++i) {
                dot += x[i] * g[static_cast<size_t>(i)];
                gsum += g[static_cast<size_t>(i)];
                gnorm = std::max(gnorm, std::abs(g[static_cast<size_t>(i)]));
            }
            CHECK(std::abs(dot + (m - 1.0) * b.total) <=
                  1e-10 * std::max(1.0, std::abs((m - 1.0) * b.total)));
            CHECK(std::abs(gsum) <= 1e-10 * gnorm);
        }
    }
}

TEST_CASE("gradient: two particles, pure repulsion") {
    const auto x = Configuration::from_positions({-0.5, 0.5});
    const ModelParams p{2.0, 0.0, 0.0, 2};
    const auto g = gradient(x, p);
    CHECK(g[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(g[1] == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("gradient matches central finite differences") {
    std::mt19937_64 rng(17);
    int checked = 0;
    for (int n : {2, 3, 5, 10}) {
        for (double m : {1.2, 1.5, 1.9}) {
            for (double alpha : {0.0, 0.7}) {
                for (int rep = 0; rep < 5; ++rep) {
                    const auto x = random_config(n, rng);
                    const ModelParams p{m, 0.4, alpha, n};
                    const auto g = gradient(x, p);
                    const double h = 1e-6 * std::max(1.0, x.scale());
                    const auto fd = testutil::fd_gradient(x.vec(), m, p.chi, alpha, h);
                    CHECK(testutil::max_rel_err(g, fd) <= 1e-6);
                    ++checked;
                }
            }
        }
    }
    CHECK(checked == 120);
}

TEST_CASE("logarithmic energy values and dilation identity") {
    const auto tight = Configuration::from_positions({-0.5, 0.5});
    CHECK(energy_log(tight, 1.0) == doctest::Approx(0.0).epsilon(1e-15));

    const auto wide = Configuration::from_positions({-1.0, 1.0});
    CHECK(energy_log(wide, 1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-14));

    // F_1(lambda x) - F_1(x) = (-(N-1) + chi N(N-1)) log(lambda)
    std::mt19937_64 rng(29);
    const int n = 3;
    const double chi = 0.5;
    const auto x = random_config(n, rng);
    const auto xs = dilate(x, std::exp(1.0));
    const double diff = energy_log(xs, chi) - energy_log(x, chi);
    const double expected = -(n - 1) + chi * n * (n - 1);  // = 1.0 here
    CHECK(expected == doctest::Approx(1.0));
    CHECK(diff == doctest::Approx(expected).epsilon(1e-12));

    // log gradient matches finite differences of the log energy
    const auto g = gradient_log(x, chi);
    std::vector<double> fd(static_cast<size_t>(n)), xp(x.vec()), xm(x.vec());
    const double h = 1e-7;
    for (int i = 0; i < n; ++i) {
        xp[static_cast<size_t>(i)] += h;
        xm[static_cast<size_t>(i)] -= h;
        fd[static_cast<size_t>(i)] =
            (kernels::log_energy(xp, chi) - kernels::log_energy(xm, chi)) / (2 * h);
        xp[static_cast<size_t>(i)] = x[i];
        xm[static_cast<size_t>(i)] = x[i];
    }
    CHECK(testutil::max_rel_err(g, fd) < 1e-6);
}

TEST_CASE("dilate and center") {
    const auto x = Configuration::from_positions({-1.0, 0.0, 1.0});
    const auto same = dilate(x, 1.0);
    for (int i = 0; i < 3; ++i) CHECK(same[i] == x[i]);

    const auto doubled = dilate(x, 2.0);
    CHECK(doubled.min_gap() == doctest::Approx(2.0 * x.min_gap()));

    const auto ab = dilate(dilate(x, 0.7), 3.0);
    const auto once = dilate(x, 2.1);
    for (int i = 0; i < 3; ++i) CHECK(ab[i] == doctest::Approx(once[i]).epsilon(1e-15));

    const std::vector<double> raw{0.0, 1.0, 2.0};
    const auto centered = center(raw);
    CHECK(centered[0] == doctest::Approx(-1.0));
    CHECK(centered[1] == doctest::Approx(0.0));
    CHECK(centered[2] == doctest::Approx(1.0));

    // idempotent, gaps unchanged
    const auto twice = center(centered.positions());
    for (int i = 0; i < 3; ++i) CHECK(twice[i] == centered[i]);
    CHECK(centered.min_gap() == doctest::Approx(1.0).epsilon(1e-15));

    CHECK_THROWS_AS(center(std::vector<double>{1.0, 0.0}), DomainError);
    CHECK_THROWS_AS(dilate(x, 0.0), DomainError);
    CHECK_THROWS_AS(dilate(x, -1.0), DomainError);
}

TEST_CASE("moments") {
    const auto pair = Configuration::from_positions({-1.0, 1.0});
    CHECK(second_moment(pair) == doctest::Approx(1.0));
    const auto triple = Configuration::from_positions({-1.0, 0.0, 1.0});
    CHECK(second_moment(triple) == doctest::Approx(1.0));
    CHECK(second_moment(dilate(pair, 2.0)) == doctest::Approx(4.0));

    // |X| = 1: f_{m+1} = 1/(m+1)
    const double a = 1.0 / std::sqrt(2.0);
    const auto unit = Configuration::from_positions({-a, a});
    CHECK(moment_power(unit, 1.2) == doctest::Approx(1.0 / 2.2).epsilon(1e-14));
    CHECK(moment_power(pair, 3.0) == doctest::Approx(1.0).epsilon(1e-14));

    // scaling multiplies f_{m+1} by lambda^{m+1}
    const double m = 1.7;
    CHECK(moment_power(dilate(pair, 3.0), m) ==
          doctest::Approx(std::pow(3.0, m + 1.0) * moment_power(pair, m)).epsilon(1e-13));

    CHECK_THROWS_AS(moment_power(pair, 1.0), std::invalid_argument);
}

TEST_CASE("deficit is nonnegative on random unit configurations") {
    std::mt19937_64 rng(41);
    const ModelParams p{1.2, 0.3, 0.0, 5};
    for (int rep = 0; rep < 1000; ++rep) {
        const auto y = random_unit_config(5, rng);
        CHECK(deficit_H(y, p) >= -1e-10);
    }
}

TEST_CASE("deficit assembles from the energy and gradient kernels") {
    // two particles: the gradient is always parallel to y, so the
    // Cauchy-Schwarz bound is tight and the deficit vanishes identically
    const double a = 1.0 / std::sqrt(2.0);
    const auto y = Configuration::from_positions({-a, a});
    const ModelParams p{1.2, 0.25, 0.0, 2};
    const double h = deficit_H(y, p);

    const auto b = energy_breakdown(y, p);
    const auto g = gradient(y, p);
    double gsq = 0;
    for (double v : g) gsq += v * v;
    const double assembled = gsq - (p.m - 1.0) * b.total * (p.m - 1.0) * b.total;
    CHECK(h == doctest::Approx(assembled).epsilon(1e-12));
    CHECK(std::abs(h) < 1e-12);
    CHECK(h >= -1e-10);
}

TEST_CASE("deficit preconditions") {
    const auto x = Configuration::from_positions({-1.0, 1.0});  // norm sqrt(2)
    const ModelParams p{1.2, 0.3, 0.0, 2};
    CHECK_THROWS_AS(deficit_H(x, p), DomainError);
    const double a = 1.0 / std::sqrt(2.0);
    const auto y = Configuration::from_positions({-a, a});
    const ModelParams confined{1.2, 0.3, 0.5, 2};
    CHECK_THROWS_AS(deficit_H(y, confined), DomainError);
}

TEST_CASE("domain and overflow errors") {
    CHECK_THROWS_AS(Configuration::from_positions({0.0, 0.0}), DomainError);
    CHECK_THROWS_AS(Configuration::from_positions({1.0, 2.0}), DomainError);  // not centered
    CHECK_THROWS_AS(Configuration::from_positions({0.5}), DomainError);

    // a 1e-160 gap with m = 3 overflows both sums
    const auto tiny = Configuration::from_positions({-5e-161, 5e-161});
    const ModelParams p{3.0, 0.5, 0.0, 2};
    CHECK_THROWS_AS(energy_breakdown(tiny, p), NumericalOverflow);
    CHECK_THROWS_AS(gradient(tiny, p), NumericalOverflow);

    const ModelParams mismatch{1.2, 0.5, 0.0, 4};
    const auto x = Configuration::from_positions({-1.0, 1.0});
    CHECK_THROWS_AS(energy_breakdown(x, mismatch), DomainError);
}
