#include "homoflow/profile.hpp"

#include <cmath>

#include "homoflow/kernels.hpp"

namespace homoflow {

void InitialProfile::validate() const {
    if (n < 2) throw std::invalid_argument("initial profile: n must be >= 2");
    switch (kind) {
        case Kind::Tanh:
            if (!(amplitude > 0)) throw std::invalid_argument("tanh profile: amplitude must be > 0");
            if (!(steepness > 0)) throw std::invalid_argument("tanh profile: steepness must be > 0");
            break;
        case Kind::Uniform:
            if (!(half_width > 0)) throw std::invalid_argument("uniform profile: half_width must be > 0");
            break;
        case Kind::TwoBlocks:
            if (!(separation > 0)) throw std::invalid_argument("two_blocks profile: separation must be > 0");
            if (!(block_width > 0)) throw std::invalid_argument("two_blocks profile: block_width must be > 0");
            break;
        case Kind::Explicit:
            if (static_cast<int>(positions.size()) != n)
                throw std::invalid_argument("explicit profile: positions length must equal n");
            if (!kernels::strictly_increasing(positions))
                throw std::invalid_argument("explicit profile: positions must be strictly increasing");
            break;
    }
}

Configuration make_initial(const InitialProfile& profile) {
    profile.validate();
    const int n = profile.n;
    std::vector<double> x(static_cast<size_t>(n));
    switch (profile.kind) {
        case InitialProfile::Kind::Tanh:
            // midpoint sampling p_i = (i - 1/2)/n avoids the singular endpoints
            for (int i = 0; i < n; ++i) {
                const double p = (i + 0.5) / n;
                x[static_cast<size_t>(i)] =
                    profile.amplitude * std::tanh(profile.steepness * (p - profile.center_p));
            }
            break;
        case InitialProfile::Kind::Uniform:
            for (int i = 0; i < n; ++i) {
                const double p = (i + 0.5) / n;
                x[static_cast<size_t>(i)] = profile.half_width * (2.0 * p - 1.0);
            }
            break;
        case InitialProfile::Kind::TwoBlocks: {
            const int n1 = n / 2;
            const int n2 = n - n1;
            const double lo1 = -0.5 * profile.separation - profile.block_width;
            const double lo2 = 0.5 * profile.separation;
            for (int i = 0; i < n1; ++i)
                x[static_cast<size_t>(i)] = lo1 + profile.block_width * (i + 0.5) / n1;
            for (int i = 0; i < n2; ++i)
                x[static_cast<size_t>(n1 + i)] = lo2 + profile.block_width * (i + 0.5) / n2;
            break;
        }
        case InitialProfile::Kind::Explicit:
            x = profile.positions;
            break;
    }
    return center(x);
}

const char* to_string(InitialProfile::Kind k) {
    switch (k) {
        case InitialProfile::Kind::Tanh: return "tanh";
        case InitialProfile::Kind::Uniform: return "uniform";
        case InitialProfile::Kind::TwoBlocks: return "two_blocks";
        case InitialProfile::Kind::Explicit: return "explicit";
    }
    return "?";
}

}  // namespace homoflow
