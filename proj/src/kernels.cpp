#include "homoflow/kernels.hpp"

#include <cmath>
#include <vector>

namespace homoflow::kernels {

namespace {

// Below this size the parallel regions cost more than they save.
constexpr std::ptrdiff_t kParallelCutoff = 192;

inline double pow_gap(double g, double e) { return std::pow(g, e); }

// Serial sum of a per-index partial vector; fixed order keeps results
// independent of the thread count.
inline double reduce(const std::vector<double>& partial) {
    double s = 0.0;
    for (double v : partial) s += v;
    return s;
}

}  // namespace

double internal_sum(std::span<const double> x, double m) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
    const double e = 1.0 - m;
    double s = 0.0;
    for (std::ptrdiff_t i = 0; i + 1 < n; ++i) s += pow_gap(x[i + 1] - x[i], e);
    return s;
}

double interaction_sum(std::span<const double> x, double m) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
    const double e = 1.0 - m;
    std::vector<double> partial(static_cast<size_t>(n), 0.0);
#pragma omp parallel for schedule(static) if (n > kParallelCutoff)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::ptrdiff_t j = i + 1; j < n; ++j) s += pow_gap(x[j] - x[i], e);
        partial[static_cast<size_t>(i)] = s;
    }
    return 2.0 * reduce(partial);
}

double sum_sq(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

double energy_total(std::span<const double> x, double m, double chi, double alpha) {
    return (internal_sum(x, m) - chi * interaction_sum(x, m)) / (m - 1.0) +
           0.5 * alpha * sum_sq(x);
}

double log_energy(std::span<const double> x, double chi) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
    double internal = 0.0;
    for (std::ptrdiff_t i = 0; i + 1 < n; ++i) internal += std::log(x[i + 1] - x[i]);
    std::vector<double> partial(static_cast<size_t>(n), 0.0);
#pragma omp parallel for schedule(static) if (n > kParallelCutoff)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::ptrdiff_t j = i + 1; j < n; ++j) s += std::log(x[j] - x[i]);
        partial[static_cast<size_t>(i)] = s;
    }
    return -internal + 2.0 * chi * reduce(partial);
}

void gradient(std::span<const double> x, double m, double chi, double alpha,
              std::span<double> out) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static) if (n > kParallelCutoff)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        double g = 0.0;
        if (i + 1 < n) g += pow_gap(x[i + 1] - x[i], -m);
        if (i > 0) g -= pow_gap(x[i] - x[i - 1], -m);
        double inter = 0.0;
        for (std::ptrdiff_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double d = std::abs(x[j] - x[i]);
            inter += (j > i ? 1.0 : -1.0) * pow_gap(d, -m);
        }
        out[static_cast<size_t>(i)] = g - 2.0 * chi * inter + alpha * x[static_cast<size_t>(i)];
    }
}

void hessian(std::span<const double> x, double m, double chi, double alpha,
             std::span<double> out) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
    const double c = 2.0 * chi * m;
#pragma omp parallel for schedule(static) if (n > kParallelCutoff)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        double* row = out.data() + i * n;
        double diag = alpha;
        for (std::ptrdiff_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double w = c * pow_gap(std::abs(x[j] - x[i]), -m - 1.0);
            row[j] = w;
            diag -= w;
        }
        if (i > 0) {
            const double w = m * pow_gap(x[i] - x[i - 1], -m - 1.0);
            row[i - 1] -= w;
            diag += w;
        }
        if (i + 1 < n) {
            const double w = m * pow_gap(x[i + 1] - x[i], -m - 1.0);
            row[i + 1] -= w;
            diag += w;
        }
        row[i] = diag;
    }
}

double min_gap(std::span<const double> x) {
    double g = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i + 1 < x.size(); ++i) g = std::min(g, x[i + 1] - x[i]);
    return g;
}

double mean(std::span<const double> x) {
    // Kahan summation; the centering invariant is checked at 1e-12 * scale.
    double s = 0.0, c = 0.0;
    for (double v : x) {
        const double y = v - c;
        const double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s / static_cast<double>(x.size());
}

void subtract_mean(std::span<double> x) {
    const double mu = mean(x);
    for (double& v : x) v -= mu;
}

bool strictly_increasing(std::span<const double> x) {
    for (size_t i = 0; i + 1 < x.size(); ++i)
        if (!(x[i + 1] > x[i])) return false;
    return true;
}

bool all_finite(std::span<const double> x) {
    for (double v : x)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace homoflow::kernels

namespace homoflow::ref {

double internal_sum(std::span<const double> x, double m) {
    double s = 0.0;
    for (size_t i = 0; i + 1 < x.size(); ++i) s += std::pow(x[i + 1] - x[i], 1.0 - m);
    return s;
}

double interaction_sum(std::span<const double> x, double m) {
    const size_t n = x.size();
    double s = 0.0;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
            if (j != i) s += std::pow(std::abs(x[j] - x[i]), 1.0 - m);
    return s;
}

double energy_total(std::span<const double> x, double m, double chi, double alpha) {
    double v = 0.0;
    for (double xi : x) v += xi * xi;
    return (internal_sum(x, m) - chi * interaction_sum(x, m)) / (m - 1.0) + 0.5 * alpha * v;
}

void gradient(std::span<const double> x, double m, double chi, double alpha,
              std::span<double> out) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        double g = 0.0;
        if (i + 1 < n) g += std::pow(x[i + 1] - x[i], -m);
        if (i > 0) g -= std::pow(x[i] - x[i - 1], -m);
        for (std::ptrdiff_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double sgn = j > i ? 1.0 : -1.0;
            g -= 2.0 * chi * sgn * std::pow(std::abs(x[j] - x[i]), -m);
        }
        out[static_cast<size_t>(i)] = g + alpha * x[static_cast<size_t>(i)];
    }
}

void hessian(std::span<const double> x, double m, double chi, double alpha,
             std::span<double> out) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
    for (double& v : out) v = 0.0;
    for (std::ptrdiff_t i = 0; i + 1 < n; ++i) {
        const double w = m * std::pow(x[i + 1] - x[i], -m - 1.0);
        out[i * n + i] += w;
        out[(i + 1) * n + i + 1] += w;
        out[i * n + i + 1] -= w;
        out[(i + 1) * n + i] -= w;
    }
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        for (std::ptrdiff_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double w = 2.0 * chi * m * std::pow(std::abs(x[j] - x[i]), -m - 1.0);
            out[i * n + j] += w;
            out[i * n + i] -= w;
        }
        out[i * n + i] += alpha;
    }
}

}  // namespace homoflow::ref
