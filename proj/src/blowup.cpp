#include "homoflow/blowup.hpp"

#include <algorithm>
#include <cmath>

#include "homoflow/kernels.hpp"

namespace homoflow {

namespace {

using Snapshots = std::vector<std::pair<double, Configuration>>;

// gaps of the tail snapshots; tail_gaps[s][i] is gap i of tail snapshot s
std::vector<std::vector<double>> tail_gap_series(const Snapshots& snapshots, int tail) {
    const size_t count = snapshots.size();
    const size_t start = count - static_cast<size_t>(tail);
    std::vector<std::vector<double>> out;
    out.reserve(static_cast<size_t>(tail));
    for (size_t s = start; s < count; ++s) {
        const auto& x = snapshots[s].second.vec();
        std::vector<double> g(x.size() - 1);
        for (size_t i = 0; i + 1 < x.size(); ++i) g[i] = x[i + 1] - x[i];
        out.push_back(std::move(g));
    }
    return out;
}

double pi_norm(const std::vector<double>& gaps, int l0, int r0) {
    // gap indices [l0, r0) 0-based
    double s = 0.0;
    for (int i = l0; i < r0; ++i) s += gaps[static_cast<size_t>(i)] * gaps[static_cast<size_t>(i)];
    return std::sqrt(s);
}

}  // namespace

std::vector<BlowUpSet> detect_relative_blowup(const Snapshots& snapshots,
                                              const BlowUpOptions& opts) {
    if (static_cast<int>(snapshots.size()) < opts.tail)
        throw DomainError("detect_relative_blowup: need at least as many snapshots as the tail length");
    const int n = snapshots.front().second.size();
    const int ngaps = n - 1;
    const double scale0 = snapshots.front().second.scale();
    const double eps_abs = opts.eps_abs.value_or(1e-6 * scale0);
    const double eps_ratio = opts.eps_ratio;

    const auto tail = tail_gap_series(snapshots, opts.tail);
    const size_t tl = tail.size();

    // (a) vanishing: last value below eps_abs and non-increasing trend
    // (b) bounded peer ratios: max over tail of gap_i/gap_k below 1/eps_ratio for all k
    std::vector<bool> vanishing(static_cast<size_t>(ngaps), false);
    std::vector<bool> fastest(static_cast<size_t>(ngaps), false);
    for (int i = 0; i < ngaps; ++i) {
        const double last = tail.back()[static_cast<size_t>(i)];
        bool trend = true;
        for (size_t s = 0; s + 1 < tl; ++s)
            if (tail[s + 1][static_cast<size_t>(i)] > tail[s][static_cast<size_t>(i)] * (1.0 + 1e-9))
                trend = false;
        vanishing[static_cast<size_t>(i)] = last < eps_abs && trend;
    }
    for (int i = 0; i < ngaps; ++i) {
        if (!vanishing[static_cast<size_t>(i)]) continue;
        bool ok = true;
        for (int k = 0; k < ngaps && ok; ++k) {
            if (k == i) continue;
            for (size_t s = 0; s < tl; ++s) {
                const double ratio = tail[s][static_cast<size_t>(i)] / tail[s][static_cast<size_t>(k)];
                if (!(ratio < 1.0 / eps_ratio)) {
                    ok = false;
                    break;
                }
            }
        }
        fastest[static_cast<size_t>(i)] = ok;
    }

    // group candidate gaps into maximal consecutive runs, then test the
    // boundary condition (c) per run
    std::vector<BlowUpSet> sets;
    int i = 0;
    while (i < ngaps) {
        if (!fastest[static_cast<size_t>(i)]) {
            ++i;
            continue;
        }
        int j = i;
        while (j + 1 < ngaps && fastest[static_cast<size_t>(j + 1)]) ++j;

        // boundary gaps (0-based indices i-1 and j+1, clipped to the valid range)
        std::vector<int> boundary0;
        if (i - 1 >= 0) boundary0.push_back(i - 1);
        if (j + 1 < ngaps) boundary0.push_back(j + 1);

        bool cond_c = true;
        for (int g = i; g <= j && cond_c; ++g)
            for (int b : boundary0) {
                const double ratio = tail.back()[static_cast<size_t>(g)] /
                                     tail.back()[static_cast<size_t>(b)];
                if (!(ratio < eps_ratio)) {
                    cond_c = false;
                    break;
                }
            }
        if (!cond_c) {
            i = j + 1;
            continue;
        }

        BlowUpSet set;
        set.l = i + 1;      // 1-based particle index
        set.r = j + 2;      // particles [i+1 .. j+2] span gaps [i .. j]
        for (int g = i; g <= j; ++g) set.j_set.push_back(g + 1);
        for (int b : boundary0) set.boundary.push_back(b + 1);
        set.eps_ratio_used = eps_ratio;
        set.eps_abs_used = eps_abs;

        const int card = j - i + 1;
        set.gap_ratios.assign(static_cast<size_t>(card),
                              std::vector<double>(static_cast<size_t>(card), 0.0));
        for (int a = 0; a < card; ++a)
            for (int b = 0; b < card; ++b) {
                if (a == b) {
                    set.gap_ratios[static_cast<size_t>(a)][static_cast<size_t>(b)] = 1.0;
                    continue;
                }
                double acc = 0.0;
                for (size_t s = 0; s < tl; ++s)
                    acc += tail[s][static_cast<size_t>(i + a)] / tail[s][static_cast<size_t>(i + b)];
                set.gap_ratios[static_cast<size_t>(a)][static_cast<size_t>(b)] =
                    acc / static_cast<double>(tl);
            }

        for (size_t s = 0; s < tl; ++s) set.pi_norm_tail.push_back(pi_norm(tail[s], i, j + 1));

        LimitingProfile lp = limiting_profile(snapshots, set.l, set.r, opts);
        set.profile = lp.profile;
        set.profile_converged = lp.converged;
        set.profile_oscillation = lp.oscillation;

        sets.push_back(std::move(set));
        i = j + 1;
    }
    return sets;
}

LimitingProfile limiting_profile(const Snapshots& snapshots, int l, int r,
                                 const BlowUpOptions& opts) {
    if (static_cast<int>(snapshots.size()) < opts.tail)
        throw DomainError("limiting_profile: not enough snapshots");
    const int n = snapshots.front().second.size();
    if (l < 1 || r <= l || r > n) throw DomainError("limiting_profile: bad range");
    const int l0 = l - 1;      // first gap, 0-based
    const int r0 = r - 1;      // one-past-last gap
    const int card = r0 - l0;  // gaps in the range

    const auto tail = tail_gap_series(snapshots, opts.tail);
    const size_t tl = tail.size();

    // normalized gap profiles over the tail
    std::vector<std::vector<double>> profiles(tl, std::vector<double>(static_cast<size_t>(card)));
    for (size_t s = 0; s < tl; ++s) {
        const double pi = pi_norm(tail[s], l0, r0);
        for (int k = 0; k < card; ++k)
            profiles[s][static_cast<size_t>(k)] = tail[s][static_cast<size_t>(l0 + k)] / pi;
    }

    double osc = 0.0;
    for (int k = 0; k < card; ++k) {
        double lo = profiles[0][static_cast<size_t>(k)], hi = lo;
        for (size_t s = 1; s < tl; ++s) {
            lo = std::min(lo, profiles[s][static_cast<size_t>(k)]);
            hi = std::max(hi, profiles[s][static_cast<size_t>(k)]);
        }
        osc = std::max(osc, (hi - lo) / std::max(hi, 1e-300));
    }

    // positions of Z from the last normalized profile, centered
    std::vector<double> z(static_cast<size_t>(card) + 1, 0.0);
    for (int k = 0; k < card; ++k) z[static_cast<size_t>(k) + 1] =
        z[static_cast<size_t>(k)] + profiles.back()[static_cast<size_t>(k)];
    kernels::subtract_mean(z);
    kernels::subtract_mean(z);

    LimitingProfile out;
    out.oscillation = osc;
    out.converged = osc <= opts.oscillation_tol;
    out.profile = Configuration::unchecked(std::move(z));
    return out;
}

WeakBlowUpReport detect_weak_blowup(const SimulationResult& result, double gap_tol) {
    WeakBlowUpReport report;
    report.gap_tol_used = gap_tol;
    const auto& snaps = result.snapshots;
    if (snaps.empty()) return report;
    report.t_end = snaps.back().first;

    const int n = snaps.front().second.size();
    const int ngaps = n - 1;
    const size_t count = snaps.size();
    const size_t tail_len = std::max<size_t>(1, (count + 9) / 10);  // final 10%, at least one
    const size_t start = count - tail_len;

    report.min_gap_history.assign(static_cast<size_t>(ngaps),
                                  std::numeric_limits<double>::infinity());
    for (size_t s = start; s < count; ++s) {
        const auto& x = snaps[s].second.vec();
        for (int i = 0; i < ngaps; ++i)
            report.min_gap_history[static_cast<size_t>(i)] =
                std::min(report.min_gap_history[static_cast<size_t>(i)],
                         x[static_cast<size_t>(i) + 1] - x[static_cast<size_t>(i)]);
    }

    int i = 0;
    while (i < ngaps) {
        if (!(report.min_gap_history[static_cast<size_t>(i)] < gap_tol)) {
            ++i;
            continue;
        }
        int j = i;
        while (j + 1 < ngaps && report.min_gap_history[static_cast<size_t>(j + 1)] < gap_tol) ++j;
        report.sets.emplace_back(i + 1, j + 2);  // particles, 1-based
        i = j + 1;
    }
    return report;
}

std::vector<std::pair<double, std::vector<double>>> rescale_trajectory(
    const Snapshots& snapshots, int l, int r) {
    if (snapshots.empty()) throw DomainError("rescale_trajectory: empty trajectory");
    const int n = snapshots.front().second.size();
    if (l < 1 || r <= l || r > n) throw DomainError("rescale_trajectory: bad range");
    const int l0 = l - 1;
    const int r0 = r - 1;

    std::vector<std::pair<double, std::vector<double>>> out;
    out.reserve(snapshots.size());
    for (const auto& [t, cfg] : snapshots) {
        const auto& x = cfg.vec();
        double mean = 0.0;
        for (int i = l0; i < r; ++i) mean += x[static_cast<size_t>(i)];
        mean /= static_cast<double>(r - l0);
        double pi = 0.0;
        for (int i = l0; i < r0; ++i) {
            const double g = x[static_cast<size_t>(i) + 1] - x[static_cast<size_t>(i)];
            pi += g * g;
        }
        pi = std::sqrt(pi);
        std::vector<double> y(x.size());
        for (size_t i = 0; i < x.size(); ++i) y[i] = (x[i] - mean) / pi;
        out.emplace_back(t, std::move(y));
    }
    return out;
}

}  // namespace homoflow
