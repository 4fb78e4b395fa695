#include "fouriermask/siren.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fouriermask {

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("rng: empty range");
    // Rejection sampling keeps the draw unbiased.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    for (;;) {
        const std::uint64_t x = engine_();
        if (x < limit) return x % n;
    }
}

std::size_t SirenParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return n;
}

void SirenParams::validate() const {
    if (dims.size() < 2) throw std::invalid_argument("siren: need at least input and output dims");
    if (dims.back() != 1) throw std::invalid_argument("siren: output dimension must be 1");
    if (layers.size() + 1 != dims.size()) throw std::invalid_argument("siren: layer count does not match dims");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        if (dims[l] < 1) throw std::invalid_argument("siren: dims must be positive");
        if (layers[l].weight.rows() != dims[l + 1] || layers[l].weight.cols() != dims[l] ||
            layers[l].bias.size() != dims[l + 1]) {
            throw std::invalid_argument("siren: layer " + std::to_string(l) + " shape does not chain");
        }
    }
}

bool operator==(const SirenParams& a, const SirenParams& b) {
    if (a.dims != b.dims || a.seed != b.seed || a.layers.size() != b.layers.size()) return false;
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        if (a.layers[l].weight != b.layers[l].weight || a.layers[l].bias != b.layers[l].bias) return false;
    }
    return true;
}

SirenParams init_siren(int input_dim, const std::vector<int>& hidden_dims, std::uint64_t seed) {
    if (hidden_dims.empty()) throw std::invalid_argument("siren: hidden_dims must be nonempty");
    if (input_dim < 1) throw std::invalid_argument("siren: input dimension must be positive");
    SirenParams params;
    params.seed = seed;
    params.dims.push_back(input_dim);
    for (int d : hidden_dims) {
        if (d < 1) throw std::invalid_argument("siren: hidden dims must be positive");
        params.dims.push_back(d);
    }
    params.dims.push_back(1);

    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < params.dims.size(); ++l) {
        const int fan_in = params.dims[l];
        const int fan_out = params.dims[l + 1];
        const double bound = std::sqrt(6.0 / fan_in);
        SirenLayer layer{Matrix(fan_out, fan_in), Eigen::VectorXd::Zero(fan_out)};
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
                layer.weight(r, c) = bound * (2.0 * rng.uniform() - 1.0);
            }
        }
        params.layers.push_back(std::move(layer));
    }
    return params;
}

SirenParams init_siren(const FrequencyLattice& lattice, const std::vector<int>& hidden_dims,
                       std::uint64_t seed) {
    return init_siren(static_cast<int>(2 * lattice.size()), hidden_dims, seed);
}

namespace {

// Pre-activations of every layer for a batch of rows.
std::vector<Matrix> forward_pass(const SirenParams& params, const Matrix& features) {
    params.validate();
    if (features.cols() != params.input_dim()) {
        throw std::invalid_argument("siren: feature width " + std::to_string(features.cols()) +
                                    " does not match input dimension " +
                                    std::to_string(params.input_dim()));
    }
    std::vector<Matrix> pre;
    pre.reserve(params.layers.size());
    Matrix act = features;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const SirenLayer& layer = params.layers[l];
        Matrix z = act * layer.weight.transpose();
        z.rowwise() += layer.bias.transpose();
        if (l + 1 < params.layers.size()) act = z.array().sin().matrix();
        pre.push_back(std::move(z));
    }
    return pre;
}

}  // namespace

std::vector<double> siren_forward(const SirenParams& params, const Matrix& features) {
    const std::vector<Matrix> pre = forward_pass(params, features);
    const Matrix& out = pre.back();
    std::vector<double> y(static_cast<std::size_t>(out.rows()));
    for (Eigen::Index r = 0; r < out.rows(); ++r) y[r] = sigmoid(out(r, 0));
    return y;
}

namespace {

SirenGradients backprop(const SirenParams& params, const Matrix& features,
                        const std::vector<Matrix>& pre, Matrix dz) {
    const std::size_t n_layers = params.layers.size();
    SirenGradients grads;
    grads.weight.resize(n_layers);
    grads.bias.resize(n_layers);
    for (std::size_t l = n_layers; l-- > 0;) {
        const Matrix input = l == 0 ? features : Matrix(pre[l - 1].array().sin().matrix());
        grads.weight[l] = dz.transpose() * input;
        grads.bias[l] = dz.colwise().sum().transpose();
        Matrix da = dz * params.layers[l].weight;
        if (l == 0) {
            grads.features = std::move(da);
        } else {
            dz = (da.array() * pre[l - 1].array().cos()).matrix();
        }
    }
    return grads;
}

void check_upstream(const Matrix& features, std::size_t n) {
    if (static_cast<std::size_t>(features.rows()) != n) {
        throw std::invalid_argument("siren: upstream length does not match row count");
    }
}

}  // namespace

SirenGradients siren_backward(const SirenParams& params, const Matrix& features,
                              const std::vector<double>& upstream) {
    const std::vector<Matrix> pre = forward_pass(params, features);
    check_upstream(features, upstream.size());
    Matrix dz(features.rows(), 1);
    for (Eigen::Index r = 0; r < features.rows(); ++r) {
        const double y = sigmoid(pre.back()(r, 0));
        dz(r, 0) = upstream[r] * y * (1.0 - y);
    }
    return backprop(params, features, pre, std::move(dz));
}

SirenGradients siren_backward_logits(const SirenParams& params, const Matrix& features,
                                     const std::vector<double>& logit_upstream) {
    const std::vector<Matrix> pre = forward_pass(params, features);
    check_upstream(features, logit_upstream.size());
    Matrix dz(features.rows(), 1);
    for (Eigen::Index r = 0; r < features.rows(); ++r) dz(r, 0) = logit_upstream[r];
    return backprop(params, features, pre, std::move(dz));
}

double binary_cross_entropy(double y, double t) {
    constexpr double kEps = 1e-12;
    const double yc = std::clamp(y, kEps, 1.0 - kEps);
    return -(t * std::log(yc) + (1.0 - t) * std::log(1.0 - yc));
}

}  // namespace fouriermask
