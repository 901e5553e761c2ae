#pragma once

#include <cstddef>
#include <span>

// Low-level evaluation kernels. They are total on strictly ordered input:
// no validation, no exceptions, IEEE semantics (tiny gaps give inf/nan and
// the caller decides what that means). The pair sums follow the ordered-pair
// convention (each unordered pair counted twice).
//
// The hot loops are OpenMP-parallel; per-index partial sums are reduced
// serially so results do not depend on the thread count. homoflow::ref holds
// the plain serial reference used by tests and the kernel benchmark.

namespace homoflow::kernels {

// sum_{i<N-1} (X_{i+1}-X_i)^{1-m}
double internal_sum(std::span<const double> x, double m);

// sum_{i != j} |X_j - X_i|^{1-m}  (ordered pairs)
double interaction_sum(std::span<const double> x, double m);

double sum_sq(std::span<const double> x);

// (internal - chi * interaction) / (m-1) + alpha/2 * |x|^2
double energy_total(std::span<const double> x, double m, double chi, double alpha);

// -sum log(gap) + chi * sum_{i != j} log|X_j - X_i|
double log_energy(std::span<const double> x, double chi);

// grad_i = (X_{i+1}-X_i)^{-m} - (X_i-X_{i-1})^{-m}
//          - 2 chi sum_{j != i} sign(j-i) |X_j-X_i|^{-m} + alpha X_i
// (endpoints drop the missing gap term; m = 1 gives the logarithmic flow).
void gradient(std::span<const double> x, double m, double chi, double alpha,
              std::span<double> out);

// Hessian of the energy, row-major n*n: tridiagonal internal part plus dense
// interaction part plus alpha*I. Rows of the alpha=0 part sum to zero.
void hessian(std::span<const double> x, double m, double chi, double alpha,
             std::span<double> out);

double min_gap(std::span<const double> x);
double mean(std::span<const double> x);  // compensated
void subtract_mean(std::span<double> x);

bool strictly_increasing(std::span<const double> x);
bool all_finite(std::span<const double> x);

}  // namespace homoflow::kernels

namespace homoflow::ref {

double internal_sum(std::span<const double> x, double m);
double interaction_sum(std::span<const double> x, double m);
double energy_total(std::span<const double> x, double m, double chi, double alpha);
void gradient(std::span<const double> x, double m, double chi, double alpha,
              std::span<double> out);
void hessian(std::span<const double> x, double m, double chi, double alpha,
             std::span<double> out);

}  // namespace homoflow::ref
