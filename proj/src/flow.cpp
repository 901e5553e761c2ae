#include "homoflow/flow.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "homoflow/kernels.hpp"
#include "homoflow/model.hpp"

namespace homoflow {

namespace {

// Uniform view of the m > 1 power-law energy and the m = 1 logarithmic one.
// Gradient and Hessian share the same kernel (exponent m); only the energy
// value differs.
struct EnergyModel {
    double m;
    double chi;
    double alpha;
    bool logarithmic;

    double energy(std::span<const double> x) const {
        return logarithmic ? kernels::log_energy(x, chi)
                           : kernels::energy_total(x, m, chi, alpha);
    }
    void grad(std::span<const double> x, std::span<double> out) const {
        kernels::gradient(x, m, chi, alpha, out);
    }
    void hess(std::span<const double> x, std::span<double> out) const {
        kernels::hessian(x, m, chi, alpha, out);
    }
};

EnergyModel power_model(const ModelParams& p) { return {p.m, p.chi, p.alpha, false}; }

struct NewtonOutcome {
    std::vector<double> z;
    int iters = 0;
    bool converged = false;
    double residual = std::numeric_limits<double>::infinity();
};

// Damped Newton for Z - X + dt * grad F(Z) = 0. Steps that break ordering or
// produce non-finite values are halved, up to 60 times.
NewtonOutcome newton_solve(const EnergyModel& model, std::span<const double> x, double dt,
                           const NewtonOptions& opts, const std::vector<double>* guess) {
    const int n = static_cast<int>(x.size());
    NewtonOutcome out;
    out.z.assign(x.begin(), x.end());
    if (guess && kernels::strictly_increasing(*guess) && kernels::all_finite(*guess))
        out.z = *guess;

    std::vector<double> g(static_cast<size_t>(n));
    std::vector<double> r(static_cast<size_t>(n));
    std::vector<double> h(static_cast<size_t>(n) * static_cast<size_t>(n));
    std::vector<double> trial(static_cast<size_t>(n));
    Eigen::MatrixXd J(n, n);
    Eigen::VectorXd rhs(n), step(n);

    for (out.iters = 0; out.iters < opts.max_iters; ++out.iters) {
        model.grad(out.z, g);
        double rn = 0.0;
        bool finite = true;
        for (int i = 0; i < n; ++i) {
            r[static_cast<size_t>(i)] =
                out.z[static_cast<size_t>(i)] - x[static_cast<size_t>(i)] +
                dt * g[static_cast<size_t>(i)];
            if (!std::isfinite(r[static_cast<size_t>(i)])) finite = false;
            rn += r[static_cast<size_t>(i)] * r[static_cast<size_t>(i)];
        }
        out.residual = std::sqrt(rn);
        if (finite && out.residual <= opts.tol) {
            out.converged = true;
            return out;
        }
        if (!finite) return out;

        model.hess(out.z, h);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                J(i, j) = (i == j ? 1.0 : 0.0) +
                          dt * h[static_cast<size_t>(i) * static_cast<size_t>(n) +
                                 static_cast<size_t>(j)];
        for (int i = 0; i < n; ++i) rhs(i) = -r[static_cast<size_t>(i)];
        step = J.partialPivLu().solve(rhs);
        if (!step.allFinite()) return out;

        double lambda = 1.0;
        bool accepted = false;
        const int max_halvings = opts.damping ? 60 : 1;
        for (int k = 0; k < max_halvings; ++k) {
            for (int i = 0; i < n; ++i)
                trial[static_cast<size_t>(i)] = out.z[static_cast<size_t>(i)] + lambda * step(i);
            if (kernels::strictly_increasing(trial) && kernels::all_finite(trial)) {
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) return out;  // damping exhausted
        out.z = trial;
        kernels::subtract_mean(out.z);
    }
    // Final residual check after max_iters.
    model.grad(out.z, g);
    double rn = 0.0;
    for (int i = 0; i < n; ++i) {
        const double ri = out.z[static_cast<size_t>(i)] - x[static_cast<size_t>(i)] +
                          dt * g[static_cast<size_t>(i)];
        rn += ri * ri;
    }
    out.residual = std::sqrt(rn);
    out.converged = std::isfinite(out.residual) && out.residual <= opts.tol;
    return out;
}

DiagnosticsRow make_row(const EnergyModel& model, std::span<const double> x, double t,
                        double dt, int iters) {
    DiagnosticsRow row;
    row.t = t;
    row.dt = dt;
    row.newton_iters = iters;
    row.min_gap = kernels::min_gap(x);
    const double ss = kernels::sum_sq(x);
    row.f2 = 0.5 * ss;
    if (model.logarithmic) {
        row.total_energy = kernels::log_energy(x, model.chi);
        double internal = 0.0;
        for (size_t i = 0; i + 1 < x.size(); ++i) internal += std::log(x[i + 1] - x[i]);
        row.internal = -internal;
        row.interaction = row.internal - row.total_energy;  // -chi * pair-log sum
        row.fmp1 = row.f2;                                  // m + 1 = 2
    } else {
        row.internal = kernels::internal_sum(x, model.m) / (model.m - 1.0);
        row.interaction = model.chi * kernels::interaction_sum(x, model.m) / (model.m - 1.0);
        row.total_energy = row.internal - row.interaction + 0.5 * model.alpha * ss;
        row.fmp1 = std::pow(ss, 0.5 * (model.m + 1.0)) / (model.m + 1.0);
    }
    // Deficit at Y = X/|X| (alpha = 0 quantity; recorded regardless).
    const double nrm = std::sqrt(ss);
    std::vector<double> y(x.begin(), x.end());
    for (double& v : y) v /= nrm;
    std::vector<double> g(y.size());
    kernels::gradient(y, model.logarithmic ? 1.0 : model.m, model.chi, 0.0, g);
    const double f = model.logarithmic ? kernels::log_energy(y, model.chi)
                                       : kernels::energy_total(y, model.m, model.chi, 0.0);
    const double mm1 = model.logarithmic ? 0.0 : model.m - 1.0;
    row.deficit = kernels::sum_sq(g) - mm1 * f * mm1 * f;
    return row;
}

SimulationResult run_engine(const RunSpec& spec, const EnergyModel& model) {
    spec.validate();
    Configuration x0 = make_initial(spec.initial);
    std::vector<double> x(x0.vec());

    const double scale0 = x0.scale();
    const double gap_min = spec.stop.gap_min.value_or(1e-9 * scale0);
    const double t_end_tol = 1e-12 * std::max(1.0, spec.t_max);

    SimulationResult result;
    double t = 0.0;
    double dt = spec.scheduled_dt(0.0);
    int accepted = 0;
    int last_iters = 1;
    double last_dt = 0.0;
    double last_recorded_t = -1.0;

    auto record = [&](int iters, double used_dt) {
        result.rows.push_back(make_row(model, x, t, used_dt, iters));
        result.snapshots.emplace_back(t, Configuration::unchecked(std::vector<double>(x)));
        last_recorded_t = t;
    };
    record(0, 0.0);

    std::vector<double> grad_x(x.size());
    std::vector<double> predictor(x.size());

    while (true) {
        if (t >= spec.t_max - t_end_tol) {
            result.termination = {TerminationKind::Completed, spec.t_max, last_dt,
                                  kernels::min_gap(x), ""};
            result.maximal_time_estimate = std::numeric_limits<double>::infinity();
            break;
        }
        dt = std::min(dt * 1.3, spec.scheduled_dt(t));
        dt = std::min(dt, spec.t_max - t);

        bool step_done = false;
        while (!step_done) {
            const std::vector<double>* guess = nullptr;
            if (last_iters <= 3) {
                // explicit-Euler predictor from the current state
                model.grad(x, grad_x);
                for (size_t i = 0; i < x.size(); ++i) predictor[i] = x[i] - dt * grad_x[i];
                if (kernels::strictly_increasing(predictor) && kernels::all_finite(predictor))
                    guess = &predictor;
            }
            NewtonOutcome nw = newton_solve(model, x, dt, spec.newton, guess);

            bool accept = nw.converged;
            if (accept) {
                if (!kernels::all_finite(nw.z)) {
                    result.termination = {TerminationKind::Failure, t, dt, kernels::min_gap(x),
                                          "non-finite state from a converged step"};
                    result.maximal_time_estimate = t;
                    if (t != last_recorded_t) record(nw.iters, dt);
                    return result;
                }
                // minimizing-movement acceptance: reject steps that fail the
                // JKO inequality (treated like a Newton failure)
                const double f_old = model.energy(x);
                const double f_new = model.energy(nw.z);
                double disp2 = 0.0;
                for (size_t i = 0; i < x.size(); ++i) {
                    const double d = nw.z[i] - x[i];
                    disp2 += d * d;
                }
                if (!(f_new + disp2 / (2.0 * dt) <=
                      f_old + 1e-9 * std::max(1.0, std::abs(f_old))))
                    accept = false;
            }

            if (accept) {
                x = std::move(nw.z);
                t += dt;
                last_dt = dt;
                last_iters = nw.iters;
                ++accepted;
                step_done = true;
                if (accepted % spec.record_every == 0) record(nw.iters, dt);
                const double mg = kernels::min_gap(x);
                if (mg < gap_min) {
                    if (t != last_recorded_t) record(nw.iters, dt);
                    result.termination = {TerminationKind::BlowUp, t, dt, mg, "gap floor"};
                    result.maximal_time_estimate = t;
                    return result;
                }
            } else {
                dt *= 0.5;
                last_iters = spec.newton.max_iters;  // drop the predictor while struggling
                if (dt < spec.stop.dt_min) {
                    if (t != last_recorded_t) record(nw.iters, last_dt);
                    result.termination = {TerminationKind::BlowUp, t, dt,
                                          kernels::min_gap(x), "dt underflow"};
                    result.maximal_time_estimate = t;
                    return result;
                }
            }
        }
    }
    if (t != last_recorded_t) record(last_iters, last_dt);
    return result;
}

void fill_f2_slopes(SimulationResult& result) {
    result.f2_slopes.clear();
    for (size_t k = 0; k + 1 < result.rows.size(); ++k) {
        const double dtk = result.rows[k + 1].t - result.rows[k].t;
        if (dtk > 0)
            result.f2_slopes.push_back((result.rows[k + 1].f2 - result.rows[k].f2) / dtk);
    }
}

}  // namespace

void RunSpec::validate() const {
    initial.validate();
    if (params.n != initial.n)
        throw std::invalid_argument("RunSpec: params.n must equal initial.n");
    if (!(params.chi > 0)) throw std::invalid_argument("RunSpec: chi must be > 0");
    if (params.m == 1.0) {
        if (params.alpha != 0.0)
            throw std::invalid_argument("RunSpec: the m = 1 flow has no confinement term");
    } else {
        params.validate();
    }
    if (dt_schedule.empty()) throw std::invalid_argument("RunSpec: dt_schedule is empty");
    double prev = -std::numeric_limits<double>::infinity();
    for (const auto& ph : dt_schedule) {
        if (!(ph.dt > 0)) throw std::invalid_argument("RunSpec: schedule dt must be > 0");
        if (!(ph.t_until > prev))
            throw std::invalid_argument("RunSpec: schedule t_until must be strictly increasing");
        prev = ph.t_until;
    }
    if (!(t_max > 0)) throw std::invalid_argument("RunSpec: t_max must be > 0");
    if (!(stop.dt_min > 0)) throw std::invalid_argument("RunSpec: dt_min must be > 0");
    if (stop.gap_min && !(*stop.gap_min > 0))
        throw std::invalid_argument("RunSpec: gap_min must be > 0");
    if (record_every < 1) throw std::invalid_argument("RunSpec: record_every must be >= 1");
    if (newton.max_iters < 1) throw std::invalid_argument("RunSpec: newton.max_iters must be >= 1");
    if (!(newton.tol > 0)) throw std::invalid_argument("RunSpec: newton.tol must be > 0");
}

double RunSpec::scheduled_dt(double t) const {
    for (const auto& ph : dt_schedule)
        if (t < ph.t_until) return ph.dt;
    return dt_schedule.back().dt;
}

StepResult implicit_step(const Configuration& x, double dt, const ModelParams& p,
                         const NewtonOptions& opts, const std::vector<double>* initial_guess) {
    p.validate();
    if (!(dt > 0)) throw DomainError("implicit_step: dt must be > 0");
    if (p.n != x.size()) throw DomainError("implicit_step: params.n mismatch");
    NewtonOutcome nw = newton_solve(power_model(p), x.positions(), dt, opts, initial_guess);
    StepResult res;
    res.newton_iters = nw.iters;
    res.converged = nw.converged;
    res.residual_norm = nw.residual;
    if (nw.converged) {
        kernels::subtract_mean(nw.z);
        res.next = Configuration::unchecked(std::move(nw.z));
    } else {
        res.next = x;
    }
    return res;
}

Configuration explicit_step_rk4(const Configuration& x, double dt, const ModelParams& p) {
    if (p.m == 1.0) {
        // logarithmic flow: same gradient kernel with exponent 1, no confinement
        if (p.alpha != 0.0)
            throw std::invalid_argument("explicit_step_rk4: the m = 1 flow has no confinement");
        if (!(p.chi > 0)) throw std::invalid_argument("explicit_step_rk4: chi must be > 0");
    } else {
        p.validate();
    }
    if (!(dt > 0)) throw DomainError("explicit_step_rk4: dt must be > 0");
    const size_t n = static_cast<size_t>(x.size());
    auto rhs = [&](const std::vector<double>& pos, std::vector<double>& out) {
        if (!kernels::strictly_increasing(pos))
            throw DomainError("explicit_step_rk4: ordering violated at an internal stage");
        kernels::gradient(pos, p.m, p.chi, p.alpha, out);
        for (double& v : out) v = -v;
    };
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
    std::vector<double> pos(x.vec());
    rhs(pos, k1);
    for (size_t i = 0; i < n; ++i) tmp[i] = pos[i] + 0.5 * dt * k1[i];
    rhs(tmp, k2);
    for (size_t i = 0; i < n; ++i) tmp[i] = pos[i] + 0.5 * dt * k2[i];
    rhs(tmp, k3);
    for (size_t i = 0; i < n; ++i) tmp[i] = pos[i] + dt * k3[i];
    rhs(tmp, k4);
    for (size_t i = 0; i < n; ++i)
        pos[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (!kernels::strictly_increasing(pos))
        throw DomainError("explicit_step_rk4: ordering violated");
    kernels::subtract_mean(pos);
    return Configuration::unchecked(std::move(pos));
}

SimulationResult simulate(const RunSpec& spec) {
    if (spec.params.m == 1.0)
        throw std::invalid_argument("simulate: use simulate_log for m = 1");
    return run_engine(spec, power_model(spec.params));
}

SimulationResult simulate_log(const RunSpec& spec) {
    if (spec.params.m != 1.0)
        throw std::invalid_argument("simulate_log requires params.m == 1");
    EnergyModel model{1.0, spec.params.chi, 0.0, true};
    SimulationResult result = run_engine(spec, model);
    fill_f2_slopes(result);
    return result;
}

}  // namespace homoflow
