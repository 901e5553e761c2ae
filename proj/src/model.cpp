#include "homoflow/model.hpp"

#include <cmath>

#include "homoflow/kernels.hpp"

namespace homoflow {

namespace {

void check_matching(const Configuration& x, const ModelParams& p) {
    if (p.n != x.size())
        throw DomainError("params.n does not match configuration length");
}

void check_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw NumericalOverflow(std::string(what) + " is not finite");
}

}  // namespace

void ModelParams::validate() const {
    if (!(m > 1.0)) throw std::invalid_argument("ModelParams: m must be > 1");
    // chi = 0 is admitted for evaluation (pure repulsion); flows require > 0
    if (!(chi >= 0.0)) throw std::invalid_argument("ModelParams: chi must be >= 0");
    if (n < 2) throw std::invalid_argument("ModelParams: n must be >= 2");
}

Configuration Configuration::from_positions(std::vector<double> pos) {
    if (pos.size() < 2) throw DomainError("configuration needs at least 2 positions");
    if (!kernels::strictly_increasing(pos))
        throw DomainError("positions must be strictly increasing");
    double scale = 1.0;
    double sum = 0.0;
    for (double v : pos) {
        scale = std::max(scale, std::abs(v));
        sum += v;
    }
    if (std::abs(sum) > kCenterTol * scale)
        throw DomainError("positions are not centered at zero");
    return Configuration(std::move(pos));
}

double Configuration::min_gap() const { return kernels::min_gap(pos_); }

double Configuration::scale() const {
    double s = 0.0;
    for (double v : pos_) s = std::max(s, std::abs(v));
    return s;
}

double Configuration::norm() const { return std::sqrt(kernels::sum_sq(pos_)); }

Configuration center(std::span<const double> raw) {
    if (raw.size() < 2) throw DomainError("configuration needs at least 2 positions");
    if (!kernels::strictly_increasing(raw))
        throw DomainError("positions must be strictly increasing");
    std::vector<double> pos(raw.begin(), raw.end());
    kernels::subtract_mean(pos);
    // One more pass mops up the last ulp so the invariant holds exactly.
    kernels::subtract_mean(pos);
    return Configuration::unchecked(std::move(pos));
}

Configuration dilate(const Configuration& x, double lambda) {
    if (!(lambda > 0.0)) throw DomainError("dilate: lambda must be > 0");
    std::vector<double> pos(x.vec());
    for (double& v : pos) v *= lambda;
    return Configuration::unchecked(std::move(pos));
}

EnergyBreakdown energy_breakdown(const Configuration& x, const ModelParams& p) {
    p.validate();
    check_matching(x, p);
    EnergyBreakdown b;
    b.internal = kernels::internal_sum(x.positions(), p.m) / (p.m - 1.0);
    b.interaction = p.chi * kernels::interaction_sum(x.positions(), p.m) / (p.m - 1.0);
    b.quadratic = 0.5 * p.alpha * kernels::sum_sq(x.positions());
    b.total = b.internal - b.interaction + b.quadratic;
    check_finite(b.internal, "internal energy");
    check_finite(b.interaction, "interaction energy");
    check_finite(b.total, "total energy");
    return b;
}

double energy_log(const Configuration& x, double chi) {
    if (!(chi > 0.0)) throw std::invalid_argument("energy_log: chi must be > 0");
    const double v = kernels::log_energy(x.positions(), chi);
    check_finite(v, "logarithmic energy");
    return v;
}

DisplacementVector gradient(const Configuration& x, const ModelParams& p) {
    p.validate();
    check_matching(x, p);
    DisplacementVector out(static_cast<size_t>(x.size()));
    kernels::gradient(x.positions(), p.m, p.chi, p.alpha, out);
    if (!kernels::all_finite(out)) throw NumericalOverflow("gradient is not finite");
    return out;
}

DisplacementVector gradient_log(const Configuration& x, double chi) {
    if (!(chi > 0.0)) throw std::invalid_argument("gradient_log: chi must be > 0");
    DisplacementVector out(static_cast<size_t>(x.size()));
    kernels::gradient(x.positions(), 1.0, chi, 0.0, out);
    if (!kernels::all_finite(out)) throw NumericalOverflow("log gradient is not finite");
    return out;
}

double second_moment(const Configuration& x) { return 0.5 * kernels::sum_sq(x.positions()); }

double moment_power(const Configuration& x, double m) {
    if (!(m > 1.0)) throw std::invalid_argument("moment_power: m must be > 1");
    return std::pow(kernels::sum_sq(x.positions()), 0.5 * (m + 1.0)) / (m + 1.0);
}

double deficit_H(const Configuration& y, const ModelParams& p) {
    if (p.alpha != 0.0) throw DomainError("deficit_H requires alpha = 0");
    p.validate();
    check_matching(y, p);
    if (std::abs(y.norm() - 1.0) > 1e-10)
        throw DomainError("deficit_H requires a unit-norm configuration");
    DisplacementVector g(static_cast<size_t>(y.size()));
    kernels::gradient(y.positions(), p.m, p.chi, 0.0, g);
    const double f = kernels::energy_total(y.positions(), p.m, p.chi, 0.0);
    const double h = kernels::sum_sq(g) - (p.m - 1.0) * f * (p.m - 1.0) * f;
    check_finite(h, "deficit");
    return h;
}

}  // namespace homoflow
