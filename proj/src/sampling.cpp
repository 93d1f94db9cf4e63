#include "lyapsim/sampling.hpp"

#include <cmath>
#include <vector>

#include "lyapsim/errors.hpp"

namespace lyapsim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t dim, std::uint64_t trial) {
    return splitmix64(splitmix64(splitmix64(base_seed) ^ dim) ^ trial);
}

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

QuantumState random_initial_state(std::size_t dim, Rng& rng) {
    if (dim < 2) throw InputError("random_initial_state: dim must be at least 2");
    std::vector<Complex> amps(dim);
    for (;;) {
        double norm2 = 0.0;
        for (auto& a : amps) {
            a = Complex{uniform01(rng), 0.0};
            norm2 += std::norm(a);
        }
        const double norm = std::sqrt(norm2);
        if (norm < 1e-6) continue;
        for (auto& a : amps) a = Complex{a.real() / norm, 0.0};
        return QuantumState(ComplexVector(amps));
    }
}

}  // namespace lyapsim
