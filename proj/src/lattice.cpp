#include "fouriermask/lattice.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace fouriermask {

int frequency_band(const Frequency& freq) {
    return std::max(std::abs(freq.u), std::abs(freq.v));
}

FrequencyLattice::FrequencyLattice(int max_frequency) : max_frequency_(max_frequency) {
    if (max_frequency < 0) {
        throw std::invalid_argument("lattice: maximum frequency must be non-negative, got " +
                                    std::to_string(max_frequency));
    }
    const int f = max_frequency;
    entries_.reserve(coefficient_count(f));
    for (int v = 0; v <= f; ++v) entries_.push_back({0, v});
    for (int u = 1; u <= f; ++u) {
        for (int v = -f; v <= f; ++v) entries_.push_back({u, v});
    }
}

long FrequencyLattice::index_of(const Frequency& freq) const {
    const int f = max_frequency_;
    if (freq.u < 0 || freq.u > f || freq.v < -f || freq.v > f) return -1;
    if (freq.u == 0) return freq.v < 0 ? -1 : freq.v;
    return static_cast<long>(f + 1) + static_cast<long>(freq.u - 1) * (2 * f + 1) + (freq.v + f);
}

FrequencyLattice build_lattice(int max_frequency) { return FrequencyLattice(max_frequency); }

std::size_t coefficient_count(int max_frequency) {
    if (max_frequency < 0) {
        throw std::invalid_argument("lattice: maximum frequency must be non-negative");
    }
    const auto f = static_cast<std::size_t>(max_frequency);
    return (f + 1) * (2 * f + 1) - f;
}

}  // namespace fouriermask
