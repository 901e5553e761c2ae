#include "homoflow/thresholds.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "homoflow/kernels.hpp"
#include "homoflow/model.hpp"

namespace homoflow {

namespace {

// --- gap-space machinery -------------------------------------------------
// Work on gap vectors g in (0,inf)^{p-1}; the ratio W/U is 0-homogeneous, so
// iterates are kept on the simplex sum g = 1. By Euler's identity g.grad = 0,
// hence stationarity on the simplex is equivalent to grad = 0 in full space.

struct RatioEval {
    double value = 0;
    std::vector<double> grad;
};

std::vector<double> positions_from_gaps(const std::vector<double>& g) {
    std::vector<double> x(g.size() + 1, 0.0);
    for (size_t i = 0; i < g.size(); ++i) x[i + 1] = x[i] + g[i];
    kernels::subtract_mean(x);
    return x;
}

RatioEval ratio_eval(const std::vector<double>& g, double m) {
    const size_t q = g.size();      // number of gaps
    const size_t p = q + 1;         // particles
    std::vector<double> x = positions_from_gaps(g);

    double u = 0.0;
    std::vector<double> du(q);
    for (size_t k = 0; k < q; ++k) {
        u += std::pow(g[k], 1.0 - m);
        du[k] = (1.0 - m) * std::pow(g[k], -m);
    }

    double w = 0.0;
    std::vector<double> diff(q + 1, 0.0);  // difference array for span sums
    for (size_t i = 0; i < p; ++i) {
        for (size_t j = i + 1; j < p; ++j) {
            const double d = x[j] - x[i];
            w += std::pow(d, 1.0 - m);
            const double dm = std::pow(d, -m);
            diff[i] += dm;
            diff[j] -= dm;
        }
    }
    w *= 2.0;

    RatioEval out;
    out.value = w / u;
    out.grad.resize(q);
    double span = 0.0;
    for (size_t k = 0; k < q; ++k) {
        span += diff[k];
        const double dw = 2.0 * (1.0 - m) * span;
        out.grad[k] = (dw - out.value * du[k]) / u;
    }
    return out;
}

// Hessian of the ratio (for the Newton polish). O(p^4) pair-span assembly;
// callers gate it to moderate p.
Eigen::MatrixXd ratio_hessian(const std::vector<double>& g, double m, const RatioEval& re) {
    const int q = static_cast<int>(g.size());
    const int p = q + 1;
    std::vector<double> x = positions_from_gaps(g);

    double u = 0.0;
    Eigen::VectorXd du(q);
    Eigen::VectorXd huu(q);  // diagonal Hess of U
    for (int k = 0; k < q; ++k) {
        u += std::pow(g[static_cast<size_t>(k)], 1.0 - m);
        du(k) = (1.0 - m) * std::pow(g[static_cast<size_t>(k)], -m);
        huu(k) = m * (m - 1.0) * std::pow(g[static_cast<size_t>(k)], -m - 1.0);
    }

    Eigen::MatrixXd hw = Eigen::MatrixXd::Zero(q, q);
    Eigen::VectorXd dw = Eigen::VectorXd::Zero(q);
    for (int i = 0; i < p; ++i) {
        for (int j = i + 1; j < p; ++j) {
            const double d = x[static_cast<size_t>(j)] - x[static_cast<size_t>(i)];
            const double dm = 2.0 * (1.0 - m) * std::pow(d, -m);
            const double dmm = 2.0 * m * (m - 1.0) * std::pow(d, -m - 1.0);
            for (int k = i; k < j; ++k) {
                dw(k) += dm;
                for (int l = i; l < j; ++l) hw(k, l) += dmm;
            }
        }
    }

    Eigen::VectorXd gr(q);
    for (int k = 0; k < q; ++k) gr(k) = re.grad[static_cast<size_t>(k)];
    Eigen::MatrixXd h = hw;
    h.diagonal() -= re.value * huu;
    h -= gr * du.transpose();
    h -= du * gr.transpose();
    h /= u;
    return h;
}

void normalize_simplex(std::vector<double>& g) {
    double s = 0.0;
    for (double v : g) s += v;
    for (double& v : g) v /= s;
}

double inf_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

struct LocalOptimum {
    double ratio = -std::numeric_limits<double>::infinity();
    std::vector<double> gaps;  // simplex-normalized
    double kkt = std::numeric_limits<double>::infinity();
};

LocalOptimum ascend(std::vector<double> g, double m, const ThresholdOptions& opts) {
    normalize_simplex(g);
    RatioEval re = ratio_eval(g, m);
    double step = 0.1;
    const double tol = opts.stationarity_tol;

    for (int it = 0; it < opts.max_ascent_iters; ++it) {
        if (inf_norm(re.grad) <= tol * std::max(1.0, re.value)) break;
        bool moved = false;
        double s = step;
        for (int bt = 0; bt < 60; ++bt) {
            std::vector<double> trial(g.size());
            bool positive = true;
            for (size_t k = 0; k < g.size(); ++k) {
                trial[k] = g[k] + s * re.grad[k];
                if (!(trial[k] > 0)) positive = false;
            }
            if (positive) {
                normalize_simplex(trial);
                RatioEval rt = ratio_eval(trial, m);
                if (rt.value > re.value) {
                    g = std::move(trial);
                    re = std::move(rt);
                    step = s * 1.5;
                    moved = true;
                    break;
                }
            }
            s *= 0.5;
        }
        if (!moved) break;
    }

    // Newton polish in the simplex tangent space (basis e_k - e_{k+1}).
    const int q = static_cast<int>(g.size());
    if (opts.newton_polish && q >= 2 && q <= 64) {
        for (int it = 0; it < 40; ++it) {
            if (inf_norm(re.grad) <= 1e-14 * std::max(1.0, re.value)) break;
            Eigen::MatrixXd h = ratio_hessian(g, m, re);
            Eigen::MatrixXd b = Eigen::MatrixXd::Zero(q, q - 1);
            for (int k = 0; k < q - 1; ++k) {
                b(k, k) = 1.0;
                b(k + 1, k) = -1.0;
            }
            Eigen::VectorXd gr(q);
            for (int k = 0; k < q; ++k) gr(k) = re.grad[static_cast<size_t>(k)];
            Eigen::MatrixXd ht = b.transpose() * h * b;
            Eigen::VectorXd gt = b.transpose() * gr;
            Eigen::VectorXd st = ht.fullPivLu().solve(-gt);
            Eigen::VectorXd dir = b * st;
            // near a regular maximum Newton contracts the gradient norm
            // quadratically; the ratio value itself saturates at roundoff,
            // so acceptance is on the gradient norm
            double s = 1.0;
            bool moved = false;
            const double gn = inf_norm(re.grad);
            for (int bt = 0; bt < 40; ++bt) {
                std::vector<double> trial(g.size());
                bool positive = true;
                for (int k = 0; k < q; ++k) {
                    trial[static_cast<size_t>(k)] = g[static_cast<size_t>(k)] + s * dir(k);
                    if (!(trial[static_cast<size_t>(k)] > 0)) positive = false;
                }
                if (positive) {
                    normalize_simplex(trial);
                    RatioEval rt = ratio_eval(trial, m);
                    if (inf_norm(rt.grad) < gn) {
                        g = std::move(trial);
                        re = std::move(rt);
                        moved = true;
                        break;
                    }
                }
                s *= 0.5;
            }
            if (!moved) break;
        }
    }

    LocalOptimum out;
    out.ratio = re.value;
    out.gaps = std::move(g);
    out.kkt = inf_norm(re.grad);
    return out;
}

std::vector<std::vector<double>> make_starts(int p, const ThresholdOptions& opts) {
    const size_t q = static_cast<size_t>(p - 1);
    std::vector<std::vector<double>> starts;
    starts.emplace_back(q, 1.0);  // uniform

    // endpoint-skewed ramps and a symmetric edge-heavy profile
    std::vector<double> ramp(q), parab(q);
    for (size_t k = 0; k < q; ++k) {
        ramp[k] = std::pow(4.0, static_cast<double>(k) / std::max<size_t>(1, q - 1));
        const double t = q == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(k) / (q - 1);
        parab[k] = 0.2 + t * t;
    }
    starts.push_back(ramp);
    std::reverse(ramp.begin(), ramp.end());
    starts.push_back(ramp);
    starts.push_back(parab);

    std::mt19937_64 rng(opts.seed + static_cast<std::uint64_t>(p) * 1000003ULL);
    std::normal_distribution<double> normal(0.0, 0.5);
    while (static_cast<int>(starts.size()) < std::max(opts.starts, 4)) {
        std::vector<double> g(q);
        for (double& v : g) v = std::exp(normal(rng));
        starts.push_back(std::move(g));
    }
    return starts;
}

// --- critical-profile machinery ------------------------------------------

struct ProfileSystem {
    int p;
    double m;
    double chi;
    double alpha;

    // res_k = g_k^{-m} - 2 chi S_k - (alpha/p) T_k over spanning pairs.
    Eigen::VectorXd residual(const std::vector<double>& g) const {
        const int q = p - 1;
        std::vector<double> x = positions_from_gaps(g);
        std::vector<double> sm(static_cast<size_t>(q) + 1, 0.0);
        std::vector<double> s1(static_cast<size_t>(q) + 1, 0.0);
        for (int i = 0; i < p; ++i) {
            for (int j = i + 1; j < p; ++j) {
                const double d = x[static_cast<size_t>(j)] - x[static_cast<size_t>(i)];
                const double dm = std::pow(d, -m);
                sm[static_cast<size_t>(i)] += dm;
                sm[static_cast<size_t>(j)] -= dm;
                s1[static_cast<size_t>(i)] += d;
                s1[static_cast<size_t>(j)] -= d;
            }
        }
        Eigen::VectorXd r(q);
        double accm = 0.0, acc1 = 0.0;
        for (int k = 0; k < q; ++k) {
            accm += sm[static_cast<size_t>(k)];
            acc1 += s1[static_cast<size_t>(k)];
            r(k) = std::pow(g[static_cast<size_t>(k)], -m) - 2.0 * chi * accm -
                   alpha / p * acc1;
        }
        return r;
    }

    Eigen::MatrixXd jacobian(const std::vector<double>& g) const {
        const int q = p - 1;
        std::vector<double> x = positions_from_gaps(g);
        Eigen::MatrixXd j = Eigen::MatrixXd::Zero(q, q);
        for (int i = 0; i < p; ++i) {
            for (int jj = i + 1; jj < p; ++jj) {
                const double d = x[static_cast<size_t>(jj)] - x[static_cast<size_t>(i)];
                const double w = 2.0 * chi * m * std::pow(d, -m - 1.0) - alpha / p;
                for (int k = i; k < jj && k < q; ++k)
                    for (int l = i; l < jj && l < q; ++l) j(k, l) += w;
            }
        }
        for (int k = 0; k < q; ++k)
            j(k, k) += -m * std::pow(g[static_cast<size_t>(k)], -m - 1.0);
        return j;
    }
};

double norm_of_positions(const std::vector<double>& g) {
    std::vector<double> x = positions_from_gaps(g);
    return std::sqrt(kernels::sum_sq(x));
}

}  // namespace

// --- public operations ----------------------------------------------------

double hls_ratio(const Configuration& x, double m) {
    if (!(m > 1.0)) throw std::invalid_argument("hls_ratio: m must be > 1");
    if (x.size() < 2) throw DomainError("hls_ratio: need at least 2 particles");
    const double u = kernels::internal_sum(x.positions(), m);
    const double w = kernels::interaction_sum(x.positions(), m);
    if (!std::isfinite(u) || !std::isfinite(w))
        throw NumericalOverflow("hls_ratio: non-finite sums");
    return w / u;
}

ThresholdEstimate compute_threshold(int p, double m, const ThresholdOptions& opts) {
    if (p < 2) throw std::invalid_argument("compute_threshold: p must be >= 2");
    if (!(m > 1.0)) throw std::invalid_argument("compute_threshold: m must be > 1");

    ThresholdEstimate est;
    est.p = p;
    est.m = m;

    if (p == 2) {
        // the quotient is identically 2: C_2 = 1/2 for every m
        est.ratio_value = 2.0;
        est.c_p = 0.5;
        est.kkt_residual = 0.0;
        est.mirror_defect = 0.0;
        est.distinct_optima = {2.0};
        const double a = 1.0 / std::sqrt(2.0);
        est.maximizer = Configuration::from_positions({-a, a});
        return est;
    }

    std::vector<LocalOptimum> optima;
    for (auto& g0 : make_starts(p, opts)) optima.push_back(ascend(std::move(g0), m, opts));

    std::sort(optima.begin(), optima.end(), [](const LocalOptimum& a, const LocalOptimum& b) {
        if (a.ratio != b.ratio) return a.ratio > b.ratio;
        return a.gaps < b.gaps;  // deterministic tie break
    });
    const LocalOptimum& best = optima.front();

    est.ratio_value = best.ratio;
    est.c_p = 1.0 / best.ratio;
    est.kkt_residual = best.kkt;

    for (const auto& o : optima) {
        bool seen = false;
        for (double v : est.distinct_optima)
            if (std::abs(v - o.ratio) <= 1e-8 * std::max(1.0, std::abs(v))) seen = true;
        if (!seen) est.distinct_optima.push_back(o.ratio);
    }

    double gmax = 0.0, defect = 0.0;
    const size_t q = best.gaps.size();
    for (size_t k = 0; k < q; ++k) {
        gmax = std::max(gmax, best.gaps[k]);
        defect = std::max(defect, std::abs(best.gaps[k] - best.gaps[q - 1 - k]));
    }
    est.mirror_defect = defect / gmax;

    std::vector<double> x = positions_from_gaps(best.gaps);
    const double nrm = std::sqrt(kernels::sum_sq(x));
    for (double& v : x) v /= nrm;
    kernels::subtract_mean(x);
    est.maximizer = Configuration::unchecked(std::move(x));
    return est;
}

std::vector<ThresholdEstimate> threshold_table(int p_max, double m,
                                               const ThresholdOptions& opts) {
    if (p_max < 2) throw std::invalid_argument("threshold_table: p_max must be >= 2");
    std::vector<ThresholdEstimate> table;
    for (int p = 2; p <= p_max; ++p) {
        table.push_back(compute_threshold(p, m, opts));
        if (table.size() >= 2) {
            const double prev = table[table.size() - 2].c_p;
            const double cur = table.back().c_p;
            if (cur > prev + 1e-8)
                std::fprintf(stderr,
                             "threshold_table warning: C_%d = %.12g exceeds C_%d = %.12g; "
                             "a global maximum was probably missed\n",
                             p, cur, p - 1, prev);
        }
    }
    return table;
}

CriticalProfile critical_profile(int p, double m, double chi, double alpha,
                                 const ProfileOptions& opts) {
    if (p < 2) throw std::invalid_argument("critical_profile: p must be >= 2");
    if (!(m > 1.0)) throw std::invalid_argument("critical_profile: m must be > 1");
    if (!(chi > 0.0)) throw std::invalid_argument("critical_profile: chi must be > 0");

    const int q = p - 1;
    ProfileSystem sys{p, m, chi, alpha};

    std::vector<double> g;
    if (opts.start_gaps) {
        if (static_cast<int>(opts.start_gaps->size()) != q)
            throw std::invalid_argument("critical_profile: start_gaps has wrong length");
        g = *opts.start_gaps;
    } else if (alpha == 0.0) {
        ThresholdOptions topts;
        topts.seed = opts.seed;
        ThresholdEstimate est = compute_threshold(p, m, topts);
        g.resize(static_cast<size_t>(q));
        for (int k = 0; k < q; ++k) g[static_cast<size_t>(k)] = est.maximizer[k + 1] - est.maximizer[k];
    } else {
        // uniform profile scaled by the self-similar balance: 1-D least squares
        // over the dilation factor on a log grid, then golden refinement
        g.assign(static_cast<size_t>(q), 1.0);
        auto cost = [&](double s) {
            std::vector<double> gs(g);
            for (double& v : gs) v *= s;
            return sys.residual(gs).squaredNorm();
        };
        double best_s = 1.0, best_c = cost(1.0);
        for (double ls = -6.0; ls <= 6.0; ls += 0.05) {
            const double s = std::exp(ls);
            const double c = cost(s);
            if (c < best_c) {
                best_c = c;
                best_s = s;
            }
        }
        for (double& v : g) v *= best_s;
    }

    // gauge for alpha = 0: solutions form rays, fix |X(g)| = 1 via an extra
    // Gauss-Newton row; alpha > 0 is a plain square system
    const bool gauge = (alpha == 0.0);
    if (gauge) {
        const double nrm = norm_of_positions(g);
        for (double& v : g) v /= nrm;
    }

    Eigen::VectorXd r = sys.residual(g);
    double best_norm = r.lpNorm<Eigen::Infinity>();
    std::vector<double> best_g = g;
    int stall = 0;

    for (int it = 0; it < opts.max_iters && best_norm > opts.tol; ++it) {
        Eigen::MatrixXd j = sys.jacobian(g);
        Eigen::VectorXd step(q);
        if (gauge) {
            Eigen::MatrixXd js(q + 1, q);
            Eigen::VectorXd rs(q + 1);
            js.topRows(q) = j;
            rs.head(q) = r;
            // d|X|^2/dg_l = (2/p) sum of spanning distances
            std::vector<double> x = positions_from_gaps(g);
            Eigen::RowVectorXd dn = Eigen::RowVectorXd::Zero(q);
            for (int i = 0; i < p; ++i)
                for (int jj = i + 1; jj < p; ++jj) {
                    const double d = x[static_cast<size_t>(jj)] - x[static_cast<size_t>(i)];
                    for (int k = i; k < jj && k < q; ++k) dn(k) += 2.0 * d / p;
                }
            const double scale = best_norm > 1.0 ? best_norm : 1.0;
            js.row(q) = scale * dn;
            rs(q) = scale * (kernels::sum_sq(x) - 1.0);
            step = js.colPivHouseholderQr().solve(-rs);
        } else {
            step = j.partialPivLu().solve(-r);
        }
        if (!step.allFinite()) break;

        double lambda = 1.0;
        bool moved = false;
        for (int bt = 0; bt < 50; ++bt) {
            std::vector<double> trial(g);
            bool positive = true;
            for (int k = 0; k < q; ++k) {
                trial[static_cast<size_t>(k)] += lambda * step(k);
                if (!(trial[static_cast<size_t>(k)] > 0)) positive = false;
            }
            if (positive) {
                Eigen::VectorXd rt = sys.residual(trial);
                if (rt.allFinite() && rt.lpNorm<Eigen::Infinity>() < r.lpNorm<Eigen::Infinity>()) {
                    g = std::move(trial);
                    r = std::move(rt);
                    moved = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if (!moved) break;

        const double rn = r.lpNorm<Eigen::Infinity>();
        if (rn < best_norm * (1.0 - 1e-3)) {
            stall = 0;
        } else if (++stall > 30) {
            break;
        }
        if (rn < best_norm) {
            best_norm = rn;
            best_g = g;
        }
    }

    CriticalProfile out;
    out.p = p;
    out.m = m;
    out.chi = chi;
    out.alpha = alpha;
    out.residual = best_norm;
    out.status = best_norm <= opts.tol ? ProfileStatus::Found : ProfileStatus::NoCriticalPoint;

    std::vector<double> x = positions_from_gaps(best_g);
    if (gauge && out.status == ProfileStatus::Found) {
        const double nrm = std::sqrt(kernels::sum_sq(x));
        for (double& v : x) v /= nrm;
        kernels::subtract_mean(x);
    }
    out.energy = kernels::energy_total(x, m, chi, 0.0);
    out.positions = Configuration::unchecked(std::move(x));
    return out;
}

DeltaHEstimate estimate_delta_H(int n, double m, double chi, const DeltaHOptions& opts) {
    if (n < 2) throw std::invalid_argument("estimate_delta_H: n must be >= 2");
    if (!(m > 1.0)) throw std::invalid_argument("estimate_delta_H: m must be > 1");
    if (n > 8 && !opts.allow_large_n)
        throw std::invalid_argument("estimate_delta_H: n > 8 requires allow_large_n (cost guard)");

    ThresholdOptions topts;
    topts.seed = opts.seed;
    std::optional<ThresholdEstimate> tn;
    if (n > 2) tn = compute_threshold(n, m, topts);  // maximizer doubles as a start
    const double c_n = opts.c_n.value_or(n == 2 ? 0.5 : tn->c_p);
    if (chi < c_n * (1.0 - 1e-12))
        throw std::invalid_argument("estimate_delta_H requires chi >= C_n");

    const size_t nn = static_cast<size_t>(n);

    auto unit = [&](std::vector<double> x) {
        kernels::subtract_mean(x);
        const double nrm = std::sqrt(kernels::sum_sq(x));
        for (double& v : x) v /= nrm;
        return x;
    };
    auto f_of = [&](const std::vector<double>& y) {
        return kernels::energy_total(y, m, chi, 0.0);
    };
    auto h_of = [&](const std::vector<double>& y) {
        std::vector<double> g(nn);
        kernels::gradient(y, m, chi, 0.0, g);
        const double f = f_of(y);
        return kernels::sum_sq(g) - (m - 1.0) * f * (m - 1.0) * f;
    };

    // exact-penalty objective and its euclidean gradient
    auto phi_grad = [&](const std::vector<double>& y, double mu, double& phi,
                        std::vector<double>& grad) {
        std::vector<double> g(nn);
        kernels::gradient(y, m, chi, 0.0, g);
        const double f = f_of(y);
        const double h = kernels::sum_sq(g) - (m - 1.0) * f * (m - 1.0) * f;
        std::vector<double> hess(nn * nn);
        kernels::hessian(y, m, chi, 0.0, hess);
        grad.assign(nn, 0.0);
        for (size_t i = 0; i < nn; ++i) {
            double s = 0.0;
            for (size_t j = 0; j < nn; ++j) s += hess[i * nn + j] * g[j];
            grad[i] = 2.0 * s - 2.0 * (m - 1.0) * (m - 1.0) * f * g[i];
        }
        phi = h;
        if (f < 0.0) {
            phi += mu * (-f);
            for (size_t i = 0; i < nn; ++i) grad[i] -= mu * g[i];
        }
    };

    std::vector<std::vector<double>> starts;
    if (n == 2) {
        const double a = 1.0 / std::sqrt(2.0);
        starts.push_back({-a, a});
    } else {
        starts.push_back(unit(std::vector<double>(tn->maximizer.vec())));
        std::vector<double> uni(nn);
        for (size_t i = 0; i < nn; ++i) uni[i] = static_cast<double>(i);
        starts.push_back(unit(std::move(uni)));
        // scale-separated starts: the low-H region near the cone boundary is
        // a tight cluster plus distant particles, far from uniform shapes
        for (double big : {1e2, 1e4, 1e6}) {
            for (size_t k = 0; k + 1 < nn; ++k) {
                std::vector<double> x(nn, 0.0);
                for (size_t i = 1; i < nn; ++i) x[i] = x[i - 1] + (i - 1 == k ? big : 1.0);
                starts.push_back(unit(std::move(x)));
            }
        }
        std::mt19937_64 rng(opts.seed);
        std::normal_distribution<double> normal(0.0, 1.5);
        while (static_cast<int>(starts.size()) < opts.starts + 3 * static_cast<int>(nn - 1)) {
            std::vector<double> x(nn, 0.0);
            for (size_t i = 1; i < nn; ++i) x[i] = x[i - 1] + std::exp(normal(rng));
            starts.push_back(unit(std::move(x)));
        }
    }

    // Tangential Newton steps onto the F = 0 level set: the infimum often
    // sits on the cone boundary and the penalty iterate may end marginally
    // infeasible, where H is spuriously smaller.
    auto restore_feasibility = [&](std::vector<double>& y) {
        for (int it = 0; it < 60; ++it) {
            const double f = f_of(y);
            if (f >= 0.0) return;
            std::vector<double> g(nn);
            kernels::gradient(y, m, chi, 0.0, g);
            double dot = 0.0;
            for (size_t i = 0; i < nn; ++i) dot += g[i] * y[i];
            double gt2 = 0.0;
            std::vector<double> gt(nn);
            for (size_t i = 0; i < nn; ++i) {
                gt[i] = g[i] - dot * y[i];
                gt2 += gt[i] * gt[i];
            }
            if (!(gt2 > 0) || !std::isfinite(gt2)) return;
            double s = -1.05 * f / gt2;  // slight overshoot to land inside
            bool moved = false;
            for (int bt = 0; bt < 40; ++bt) {
                std::vector<double> trial(nn);
                for (size_t i = 0; i < nn; ++i) trial[i] = y[i] + s * gt[i];
                if (kernels::strictly_increasing(trial)) {
                    trial = unit(std::move(trial));
                    if (f_of(trial) > f) {
                        y = std::move(trial);
                        moved = true;
                        break;
                    }
                }
                s *= 0.5;
            }
            if (!moved) return;
        }
    };

    const double feas_tol = 1e-12;
    DeltaHEstimate best;
    best.status = DeltaHStatus::EmptyCone;
    best.value = std::numeric_limits<double>::infinity();

    for (auto& y0 : starts) {
        std::vector<double> y = y0;
        double mu = 10.0 * std::max(1.0, std::abs(h_of(y)));
        for (int round = 0; round < 3; ++round) {
            double phi;
            std::vector<double> grad;
            phi_grad(y, mu, phi, grad);
            double step = 0.1;
            for (int it = 0; it < opts.max_iters; ++it) {
                // tangential direction on the sphere
                double dot = 0.0;
                for (size_t i = 0; i < nn; ++i) dot += grad[i] * y[i];
                std::vector<double> d(nn);
                double dn = 0.0;
                for (size_t i = 0; i < nn; ++i) {
                    d[i] = -(grad[i] - dot * y[i]);
                    dn = std::max(dn, std::abs(d[i]));
                }
                if (dn <= 1e-12 * std::max(1.0, std::abs(phi))) break;
                bool moved = false;
                double s = step;
                for (int bt = 0; bt < 50; ++bt) {
                    std::vector<double> trial(nn);
                    for (size_t i = 0; i < nn; ++i) trial[i] = y[i] + s * d[i];
                    if (kernels::strictly_increasing(trial)) {
                        trial = unit(std::move(trial));
                        double phit;
                        std::vector<double> gradt;
                        phi_grad(trial, mu, phit, gradt);
                        if (phit < phi) {
                            y = std::move(trial);
                            phi = phit;
                            grad = std::move(gradt);
                            step = s * 1.5;
                            moved = true;
                            break;
                        }
                    }
                    s *= 0.5;
                }
                if (!moved) break;
            }
            if (f_of(y) >= -feas_tol * std::max(1.0, kernels::internal_sum(y, m) / (m - 1.0)))
                break;
            mu *= 10.0;  // penalty too weak, tighten and continue from here
        }
        restore_feasibility(y);

        const double f = f_of(y);
        if (f >= -feas_tol * std::max(1.0, kernels::internal_sum(y, m) / (m - 1.0))) {
            const double h = h_of(y);
            if (h < best.value) {
                best.status = DeltaHStatus::Ok;
                best.value = h;
                best.energy = f;
                best.minimizer = Configuration::unchecked(std::vector<double>(y));
            }
        }
    }
    if (best.status == DeltaHStatus::EmptyCone) best.value = 0.0;
    return best;
}

}  // namespace homoflow
