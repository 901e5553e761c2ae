#pragma once

#include <optional>
#include <utility>

#include "homoflow/flow.hpp"
#include "homoflow/types.hpp"

namespace homoflow {

// Tail-statistic operationalization of the relative blow-up limits: the three
// conditions are tested over the last `tail` snapshots with the explicit
// thresholds below, which are echoed in every report.
struct BlowUpOptions {
    double eps_ratio = 0.05;          // boundary-ratio threshold; 1/eps_ratio bounds peer ratios
    std::optional<double> eps_abs;    // gap smallness; defaults to 1e-6 * initial scale
    int tail = 8;
    double oscillation_tol = 0.10;    // relative oscillation for profile convergence
};

// Particle indices are 1-based: I = [l, r] with gaps J = [l, r-1], matching
// the usual statement of the definitions.
struct BlowUpSet {
    int l = 0;
    int r = 0;
    std::vector<int> j_set;                        // gap indices l..r-1
    std::vector<int> boundary;                     // gaps just outside J, clipped to [1, N-1]
    std::vector<std::vector<double>> gap_ratios;   // tail-averaged gamma over J x J, diag 1
    std::vector<double> pi_norm_tail;              // Pi_I over the tail snapshots
    Configuration profile;                         // Z: centered, unit Pi-norm
    bool profile_converged = false;
    double profile_oscillation = 0;
    double eps_ratio_used = 0;
    double eps_abs_used = 0;
};

// Tests the three relative-blow-up conditions on the tail of a trajectory and
// returns maximal consecutive ranges satisfying all of them. Requires at
// least `tail` snapshots. An empty list means no vanishing gap was found.
std::vector<BlowUpSet> detect_relative_blowup(
    const std::vector<std::pair<double, Configuration>>& snapshots,
    const BlowUpOptions& opts = {});

struct LimitingProfile {
    bool converged = false;
    Configuration profile;     // last Pi-normalized shape, centered
    double oscillation = 0;    // max relative oscillation of normalized gaps over the tail
};

// Pi-normalized limit shape of the range [l, r] (1-based). NonConvergent
// (converged = false) when the normalized gaps oscillate by more than
// opts.oscillation_tol over the tail; the last profile is still returned.
LimitingProfile limiting_profile(
    const std::vector<std::pair<double, Configuration>>& snapshots,
    int l, int r, const BlowUpOptions& opts = {});

struct WeakBlowUpReport {
    std::vector<std::pair<int, int>> sets;  // maximal [l, r] particle ranges, 1-based
    double t_end = 0;
    std::vector<double> min_gap_history;    // per-gap minimum over the inspected tail
    double gap_tol_used = 0;
};

// Flags gaps whose minimum over the final 10% of recorded snapshots is below
// gap_tol and groups them into maximal consecutive particle ranges.
WeakBlowUpReport detect_weak_blowup(const SimulationResult& result, double gap_tol);

// Each snapshot re-centered on the range's mean and divided by its current
// Pi_I. Particles outside the range may diverge in rescaled coordinates.
std::vector<std::pair<double, std::vector<double>>> rescale_trajectory(
    const std::vector<std::pair<double, Configuration>>& snapshots, int l, int r);

}  // namespace homoflow
