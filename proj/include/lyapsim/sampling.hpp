#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

#include "lyapsim/linalg.hpp"

namespace lyapsim {

using Rng = std::mt19937_64;

/// Seed for one trial, mixed from the base seed, the problem dimension and
/// the trial index (splitmix64 finalizer). Independent of execution order.
std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t dim, std::uint64_t trial);

/// Uniform double in [0, 1) from the top 53 bits of one draw.
double uniform01(Rng& rng);

/// Real non-negative amplitudes drawn uniform in [0,1) and normalized
/// (relative phases ignored). Redraws if the raw norm is below 1e-6.
QuantumState random_initial_state(std::size_t dim, Rng& rng);

}  // namespace lyapsim
