#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "fouriermask/fourier.hpp"
#include "fouriermask/lattice.hpp"

namespace fouriermask {

/// One dense layer, z = weight * a + bias. `weight` is out x in.
struct SirenLayer {
    Matrix weight;
    Eigen::VectorXd bias;
};

/// Sine-activation MLP: hidden layers apply sin(z), the single output neuron a
/// sigmoid. dims = {input, hidden..., 1}.
struct SirenParams {
    std::vector<int> dims;
    std::vector<SirenLayer> layers;
    std::uint64_t seed = 0;

    int input_dim() const { return dims.empty() ? 0 : dims.front(); }
    std::size_t parameter_count() const;
    /// Throws if the layer shapes do not chain from dims.
    void validate() const;

    friend bool operator==(const SirenParams& a, const SirenParams& b);
};

inline const std::vector<int> kDefaultHiddenDims = {256, 256, 256};

/// Weights uniform in (-sqrt(6 / fan_in), sqrt(6 / fan_in)), biases zero.
SirenParams init_siren(int input_dim, const std::vector<int>& hidden_dims, std::uint64_t seed);
/// Input dimension 2c of the lattice.
SirenParams init_siren(const FrequencyLattice& lattice, const std::vector<int>& hidden_dims,
                       std::uint64_t seed);

/// One output in (0, 1) per feature row.
std::vector<double> siren_forward(const SirenParams& params, const Matrix& features);

struct SirenGradients {
    std::vector<Matrix> weight;
    std::vector<Eigen::VectorXd> bias;
    Matrix features;
};

/// Gradients of L given dL/dy for every row.
SirenGradients siren_backward(const SirenParams& params, const Matrix& features,
                              const std::vector<double>& upstream);

/// Same, given dL/dz for the output neuron's pre-sigmoid value z.
SirenGradients siren_backward_logits(const SirenParams& params, const Matrix& features,
                                     const std::vector<double>& logit_upstream);

/// Pointwise binary cross-entropy, with y clamped away from 0 and 1.
double binary_cross_entropy(double y, double t);

/// std::mt19937_64 with a fixed integer-to-real conversion, so sampled values
/// do not depend on the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    /// Uniform integer in [0, n), n > 0.
    std::uint64_t below(std::uint64_t n);

private:
    std::mt19937_64 engine_;
};

}  // namespace fouriermask
