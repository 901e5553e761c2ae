#pragma once

#include <limits>
#include <optional>
#include <utility>

#include "homoflow/profile.hpp"
#include "homoflow/types.hpp"

namespace homoflow {

struct NewtonOptions {
    int max_iters = 50;
    double tol = 1e-10;  // absolute euclidean norm of the residual
    bool damping = true;
    friend bool operator==(const NewtonOptions&, const NewtonOptions&) = default;
};

struct StopRules {
    // Gap floor declaring blow-up; defaults to 1e-9 * initial scale when unset.
    std::optional<double> gap_min;
    double dt_min = 1e-10;
    friend bool operator==(const StopRules&, const StopRules&) = default;
};

// Piecewise dt: use `dt` while t < t_until. The last phase usually has
// t_until = +inf. On Newton failure dt halves; after success it regrows by
// 1.3x up to the scheduled value.
struct SchedulePhase {
    double t_until;
    double dt;
    friend bool operator==(const SchedulePhase&, const SchedulePhase&) = default;
};

struct RunSpec {
    ModelParams params;
    InitialProfile initial;
    std::vector<SchedulePhase> dt_schedule;
    double t_max = 100.0;
    NewtonOptions newton;
    StopRules stop;
    int record_every = 1;

    void validate() const;
    double scheduled_dt(double t) const;
    friend bool operator==(const RunSpec&, const RunSpec&) = default;
};

struct StepResult {
    Configuration next;
    int newton_iters = 0;
    bool converged = false;
    double residual_norm = std::numeric_limits<double>::infinity();
};

struct DiagnosticsRow {
    double t = 0;
    double dt = 0;
    double total_energy = 0;  // F
    double internal = 0;      // U
    double interaction = 0;   // the subtracted chi-term W
    double f2 = 0;
    double fmp1 = 0;
    double min_gap = 0;
    double deficit = 0;  // H^N_{m+1}(X/|X|)
    int newton_iters = 0;
};

enum class TerminationKind { Completed, BlowUp, Failure };

struct Termination {
    TerminationKind kind = TerminationKind::Completed;
    double t_estimate = 0;
    double last_dt = 0;
    double min_gap = 0;
    std::string reason;
};

struct SimulationResult {
    std::vector<DiagnosticsRow> rows;
    std::vector<std::pair<double, Configuration>> snapshots;
    Termination termination;
    // Finite last accepted time for BlowUp, +inf sentinel for Completed.
    double maximal_time_estimate = std::numeric_limits<double>::infinity();
    // Filled by simulate_log: forward-difference df2/dt between recorded rows.
    std::vector<double> f2_slopes;
};

// One implicit Euler step: solves Z - X + dt * grad F(Z) = 0 by damped Newton
// with analytic Jacobian I + dt * Hess F(Z); result re-centered. A non-null
// initial_guess warm-starts the iteration (must be strictly ordered).
StepResult implicit_step(const Configuration& x, double dt, const ModelParams& p,
                         const NewtonOptions& opts,
                         const std::vector<double>* initial_guess = nullptr);

// Classical RK4 step of dot X = -grad F(X); throws DomainError if any stage
// violates ordering. Reference integrator for cross-checks.
Configuration explicit_step_rk4(const Configuration& x, double dt, const ModelParams& p);

// Implicit-Euler time integration following the dt schedule, with adaptive
// halving on Newton failure. A converged step is accepted only if it also
// satisfies the minimizing-movement inequality
//   F(Z) + |Z-X|^2/(2 dt) <= F(X) + 1e-9 max(1, |F(X)|).
// BlowUp is declared when dt < dt_min or min_gap < gap_min.
SimulationResult simulate(const RunSpec& spec);

// Same machinery for the m = 1 energy (spec.params.m must equal 1; alpha = 0).
SimulationResult simulate_log(const RunSpec& spec);

}  // namespace homoflow
