#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace homoflow {

// Relative tolerance for the "centered at zero" invariant of Configuration.
inline constexpr double kCenterTol = 1e-12;

// Invalid input (non-increasing positions, wrong dimensions, ...).
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A kernel evaluation produced a non-finite intermediate (gap too small for
// the requested exponent). Evaluation is attempted anyway; termination policy
// belongs to the caller.
struct NumericalOverflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Exponents and coefficients (m, chi, alpha, N) of one functional instance.
struct ModelParams {
    double m = 1.2;      // diffusion exponent, > 1 for the power-law energy
    double chi = 1.0;    // interaction coefficient, > 0
    double alpha = 0.0;  // quadratic confinement coefficient, any sign
    int n = 2;           // particle count, >= 2

    void validate() const;
    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// Ordered, centered particle positions X_1 < ... < X_N with sum X_i ~ 0.
class Configuration {
  public:
    Configuration() = default;

    // Validates strict ordering and centering; throws DomainError otherwise.
    static Configuration from_positions(std::vector<double> pos);

    // Trusted constructor for positions that are ordered and freshly centered
    // (used by the integrators after exact re-centering).
    static Configuration unchecked(std::vector<double> pos) {
        return Configuration(std::move(pos));
    }

    std::span<const double> positions() const noexcept { return pos_; }
    const std::vector<double>& vec() const noexcept { return pos_; }
    int size() const noexcept { return static_cast<int>(pos_.size()); }
    bool empty() const noexcept { return pos_.empty(); }
    double operator[](int i) const noexcept { return pos_[static_cast<size_t>(i)]; }

    double min_gap() const;
    double scale() const;  // max_i |X_i|
    double norm() const;   // euclidean norm |X|

  private:
    explicit Configuration(std::vector<double>&& p) : pos_(std::move(p)) {}
    std::vector<double> pos_;
};

// Subtract the mean exactly (compensated summation); gaps unchanged.
Configuration center(std::span<const double> raw);

// Scale every position by lambda > 0; ordering and centering preserved.
Configuration dilate(const Configuration& x, double lambda);

// The three contributions of F^N_{m,alpha} plus their signed sum.
struct EnergyBreakdown {
    double internal = 0;     // U_m = sum gap^{1-m} / (m-1)
    double interaction = 0;  // chi/(m-1) * sum_{i!=j} |X_j-X_i|^{1-m}
    double quadratic = 0;    // alpha |X|^2 / 2
    double total = 0;        // internal - interaction + quadratic
};

// Gradient / velocity entries; same length as the configuration.
using DisplacementVector = std::vector<double>;

}  // namespace homoflow
