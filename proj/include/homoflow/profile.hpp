#pragma once

#include "homoflow/types.hpp"

namespace homoflow {

// Initial data generators. The tanh profile with (amplitude 4, steepness 10,
// center 0.5) sampled at p_i = (i - 1/2)/n reproduces the two-peak data of
// the reference simulations.
struct InitialProfile {
    enum class Kind { Tanh, Uniform, TwoBlocks, Explicit };

    Kind kind = Kind::Uniform;
    int n = 2;

    // tanh
    double amplitude = 4.0;
    double steepness = 10.0;
    double center_p = 0.5;
    // uniform
    double half_width = 1.0;
    // two_blocks
    double separation = 4.0;
    double block_width = 1.0;
    // explicit
    std::vector<double> positions;

    void validate() const;
    friend bool operator==(const InitialProfile&, const InitialProfile&) = default;
};

// Materialize the profile as a centered configuration of n particles.
Configuration make_initial(const InitialProfile& profile);

const char* to_string(InitialProfile::Kind k);

}  // namespace homoflow
