#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fouriermask {

/// One harmonic frequency pair. `u` pairs with the row coordinate, `v` with the column.
struct Frequency {
    int u = 0;
    int v = 0;

    friend bool operator==(const Frequency&, const Frequency&) = default;
};

/// Band of a frequency pair: max(|u|, |v|). Truncating to f' keeps band <= f'.
int frequency_band(const Frequency& freq);

/// The non-redundant half-plane of integer frequency pairs up to a maximum
/// harmonic f:
///
///   {0..f} x {-f..f}  minus  {0} x {-f..-1}
///
/// Entries are stored u-major. Row u == 0 runs v = 0..f, every other row runs
/// v = -f..f. Immutable after construction.
class FrequencyLattice {
public:
    explicit FrequencyLattice(int max_frequency);

    int max_frequency() const { return max_frequency_; }
    std::size_t size() const { return entries_.size(); }
    std::span<const Frequency> entries() const { return entries_; }
    const Frequency& operator[](std::size_t k) const { return entries_[k]; }

    /// Canonical index of (u, v), or -1 when the pair is not a member.
    long index_of(const Frequency& freq) const;
    bool contains(const Frequency& freq) const { return index_of(freq) >= 0; }

    friend bool operator==(const FrequencyLattice& a, const FrequencyLattice& b) {
        return a.max_frequency_ == b.max_frequency_;
    }

private:
    int max_frequency_;
    std::vector<Frequency> entries_;
};

FrequencyLattice build_lattice(int max_frequency);

/// (f + 1)(2f + 1) - f
std::size_t coefficient_count(int max_frequency);

}  // namespace fouriermask
