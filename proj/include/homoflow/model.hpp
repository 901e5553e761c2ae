#pragma once

#include "homoflow/types.hpp"

namespace homoflow {

// F^N_{m,alpha}(X) with its breakdown. Throws DomainError on invalid x,
// NumericalOverflow if any contribution is non-finite.
EnergyBreakdown energy_breakdown(const Configuration& x, const ModelParams& p);

// The m = 1 energy, exactly as written: -sum log(gap) + chi sum_{i!=j} log|X_j-X_i|.
// Note the interaction enters with +chi, unlike the m > 1 convention.
double energy_log(const Configuration& x, double chi);

// Gradient of F^N_{m,alpha} (the flow right-hand side is its negation).
DisplacementVector gradient(const Configuration& x, const ModelParams& p);

// Gradient of the m = 1 energy.
DisplacementVector gradient_log(const Configuration& x, double chi);

// f_2 = |X|^2 / 2
double second_moment(const Configuration& x);

// f_{m+1} = |X|^{m+1} / (m+1), m > 1
double moment_power(const Configuration& x, double m);

// H^N_{m+1}(Y) = |grad F^N_m(Y)|^2 - ((m-1) F^N_m(Y))^2 on the unit sphere.
// Requires |y| = 1 (within 1e-10) and p.alpha = 0.
double deficit_H(const Configuration& y, const ModelParams& p);

}  // namespace homoflow
