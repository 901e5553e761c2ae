#pragma once

#include <cstdint>
#include <optional>

#include "homoflow/types.hpp"

namespace homoflow {

struct ThresholdOptions {
    int starts = 16;  // uniform + endpoint-skewed + randomized
    std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
    int max_ascent_iters = 5000;
    double stationarity_tol = 1e-10;
    bool newton_polish = true;
};

struct ThresholdEstimate {
    int p = 0;
    double m = 0;
    double c_p = 0;            // 1 / max ratio
    Configuration maximizer;   // unit-norm, centered
    double ratio_value = 0;    // the maximal ratio, = 1/c_p
    double kkt_residual = 0;   // ||grad ratio||_inf at the maximizer
    double mirror_defect = 0;  // max |g_i - g_{p-i}| / max_i g_i
    // Distinct local optima seen across starts (ratio values, descending).
    std::vector<double> distinct_optima;
};

// W-sum / U-sum of the discrete HLS quotient (ordered pairs); 0-homogeneous.
double hls_ratio(const Configuration& x, double m);

// C_p = 1 / max ratio over gap vectors, by multi-start projected ascent with
// Newton polish. p = 2 is exact (the ratio is identically 2).
ThresholdEstimate compute_threshold(int p, double m, const ThresholdOptions& opts = {});

// Entries for p = 2..p_max; warns on stderr if monotone non-increase is
// violated by more than 1e-8 (signals a missed global maximum).
std::vector<ThresholdEstimate> threshold_table(int p_max, double m,
                                               const ThresholdOptions& opts = {});

enum class ProfileStatus { Found, NoCriticalPoint };

struct CriticalProfile {
    ProfileStatus status = ProfileStatus::NoCriticalPoint;
    int p = 0;
    double m = 0;
    double chi = 0;
    double alpha = 0;
    Configuration positions;  // V (unit norm when alpha = 0)
    double residual = 0;      // max-norm of the gap-form critical equations
    double energy = 0;        // F^p_m(V), alpha = 0 part
};

struct ProfileOptions {
    int max_iters = 300;
    double tol = 1e-10;
    std::uint64_t seed = 0x2545f4914f6cdd1dULL;
    // Optional explicit start (gap vector, length p-1).
    std::optional<std::vector<double>> start_gaps;
};

// Solves the p-1 gap-form critical-point equations
//   (V_{k+1}-V_k)^{-m} = 2 chi S_k(V) + (alpha/p) T_k(V)
// by damped (Gauss-)Newton. Existence requires (chi = C_p, alpha = 0) or
// (chi < C_p, alpha > 0); other regimes are attempted and typically return
// NoCriticalPoint (a distinguished outcome, not an error).
CriticalProfile critical_profile(int p, double m, double chi, double alpha,
                                 const ProfileOptions& opts = {});

enum class DeltaHStatus { Ok, EmptyCone };

struct DeltaHOptions {
    int starts = 24;
    std::uint64_t seed = 0xda3e39cb94b95bdbULL;
    int max_iters = 800;
    bool allow_large_n = false;   // cost guard: n <= 8 unless set
    std::optional<double> c_n;    // precomputed C_n (computed here if unset)
};

struct DeltaHEstimate {
    DeltaHStatus status = DeltaHStatus::EmptyCone;
    double value = 0;          // best H found (an upper bound on delta_H)
    Configuration minimizer;   // unit norm
    double energy = 0;         // F^N_m at the minimizer (>= 0 up to roundoff)
};

// Upper bound on delta_H = inf { H(Y) : |Y|=1, F(Y) >= 0 } by multi-start
// projected descent on the sphere with an exact penalty on the energy
// constraint. Requires chi >= C_n.
DeltaHEstimate estimate_delta_H(int n, double m, double chi, const DeltaHOptions& opts = {});

}  // namespace homoflow
