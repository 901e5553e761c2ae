#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "homoflow/kernels.hpp"
#include "homoflow/types.hpp"

namespace testutil {

inline std::vector<double> random_gaps(int n, std::mt19937_64& rng, double lo = 0.5,
                                       double hi = 1.5) {
    std::uniform_real_distribution<double> gap(lo, hi);
    std::vector<double> g(static_cast<size_t>(n - 1));
    for (double& v : g) v = gap(rng);
    return g;
}

inline homoflow::Configuration config_from_gaps(const std::vector<double>& gaps) {
    std::vector<double> x(gaps.size() + 1, 0.0);
    for (size_t i = 0; i < gaps.size(); ++i) x[i + 1] = x[i] + gaps[i];
    return homoflow::center(x);
}

inline homoflow::Configuration random_config(int n, std::mt19937_64& rng, double lo = 0.5,
                                             double hi = 1.5) {
    return config_from_gaps(random_gaps(n, rng, lo, hi));
}

inline homoflow::Configuration unit_config(const homoflow::Configuration& x) {
    std::vector<double> y(x.vec());
    const double nrm = std::sqrt(homoflow::kernels::sum_sq(y));
    for (double& v : y) v /= nrm;
    homoflow::kernels::subtract_mean(y);
    return homoflow::Configuration::unchecked(std::move(y));
}

inline homoflow::Configuration random_unit_config(int n, std::mt19937_64& rng) {
    return unit_config(random_config(n, rng));
}

// central finite differences of the raw energy kernel; independent oracle for
// the analytic gradient
inline std::vector<double> fd_gradient(const std::vector<double>& x, double m, double chi,
                                       double alpha, double h) {
    std::vector<double> g(x.size());
    std::vector<double> xp(x), xm(x);
    for (size_t i = 0; i < x.size(); ++i) {
        xp[i] = x[i] + h;
        xm[i] = x[i] - h;
        g[i] = (homoflow::kernels::energy_total(xp, m, chi, alpha) -
                homoflow::kernels::energy_total(xm, m, chi, alpha)) /
               (2.0 * h);
        xp[i] = x[i];
        xm[i] = x[i];
    }
    return g;
}

inline double max_abs(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

inline double max_rel_err(const std::vector<double>& got, const std::vector<double>& want) {
    const double scale = std::max(1.0, max_abs(want));
    double e = 0;
    for (size_t i = 0; i < got.size(); ++i) e = std::max(e, std::abs(got[i] - want[i]));
    return e / scale;
}

// Minimal XML well-formedness check: tag balance, quoted attributes, one root.
inline bool xml_well_formed(const std::string& text) {
    size_t pos = 0;
    std::vector<std::string> stack;
    int roots = 0;
    // optional declaration
    if (text.rfind("<?xml", 0) == 0) {
        pos = text.find("?>");
        if (pos == std::string::npos) return false;
        pos += 2;
    }
    while (pos < text.size()) {
        const size_t lt = text.find('<', pos);
        if (lt == std::string::npos) break;
        const size_t gt = text.find('>', lt);
        if (gt == std::string::npos) return false;
        std::string tag = text.substr(lt + 1, gt - lt - 1);
        // quotes must be balanced inside the tag
        if (std::count(tag.begin(), tag.end(), '"') % 2 != 0) return false;
        if (!tag.empty() && tag.front() == '/') {
            if (stack.empty()) return false;
            const std::string name = tag.substr(1);
            if (stack.back() != name) return false;
            stack.pop_back();
            if (stack.empty()) ++roots;
        } else if (!tag.empty() && tag.back() == '/') {
            if (stack.empty()) ++roots;  // self-closing at root level
        } else if (!tag.empty() && tag.front() != '!' && tag.front() != '?') {
            const size_t sp = tag.find_first_of(" \t\n");
            stack.push_back(sp == std::string::npos ? tag : tag.substr(0, sp));
        }
        pos = gt + 1;
    }
    return stack.empty() && roots == 1;
}

}  // namespace testutil
