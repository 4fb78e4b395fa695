#include "fouriermask/fitter.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "fouriermask/codec.hpp"
#include "fouriermask/metrics.hpp"
#include "fouriermask/upsampler.hpp"

namespace fouriermask {

namespace {

class AdamOptimizer {
public:
    AdamOptimizer(std::size_t n, const FitConfig& config)
        : config_(config), m_(n, 0.0), v_(n, 0.0) {}

    void step(std::vector<double>& params, const std::vector<double>& grad) {
        ++t_;
        const double b1 = config_.beta1;
        const double b2 = config_.beta2;
        const double c1 = 1.0 - std::pow(b1, t_);
        const double c2 = 1.0 - std::pow(b2, t_);
        for (std::size_t i = 0; i < params.size(); ++i) {
            m_[i] = b1 * m_[i] + (1.0 - b1) * grad[i];
            v_[i] = b2 * v_[i] + (1.0 - b2) * grad[i] * grad[i];
            const double m_hat = m_[i] / c1;
            const double v_hat = v_[i] / c2;
            params[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
        }
    }

private:
    const FitConfig& config_;
    std::vector<double> m_;
    std::vector<double> v_;
    int t_ = 0;
};

void validate(const MaskRaster& target, const FitConfig& config) {
    if (config.steps < 1) throw std::invalid_argument("fitter: steps must be >= 1");
    if (!(config.learning_rate > 0.0)) throw std::invalid_argument("fitter: learning rate must be positive");
    if (config.max_frequency < 0) throw std::invalid_argument("fitter: f must be non-negative");
    if (target.h < 1 || target.w < 1) throw std::invalid_argument("fitter: empty target");
    if (!target.is_binary()) throw std::invalid_argument("fitter: target must be binary");
    if (config.mode == CoefficientMode::global) check_nyquist(config.max_frequency, target.h, target.w);
    if (config.use_mlp && config.hidden_dims.empty()) {
        throw std::invalid_argument("fitter: MLP needs at least one hidden layer");
    }
}

}  // namespace

bool operator==(const FitResult& a, const FitResult& b) {
    if (a.h != b.h || a.w != b.w || !(a.coeffs == b.coeffs) || a.mlp.has_value() != b.mlp.has_value() ||
        a.final_iou != b.final_iou || a.loss_history.size() != b.loss_history.size()) {
        return false;
    }
    if (a.mlp && !(*a.mlp == *b.mlp)) return false;
    for (std::size_t i = 0; i < a.loss_history.size(); ++i) {
        const auto& x = a.loss_history[i];
        const auto& y = b.loss_history[i];
        if (x.step != y.step || x.loss_y != y.loss_y || x.loss_yprime != y.loss_yprime) return false;
    }
    return true;
}

FitObjective::FitObjective(const MaskRaster& target, const FitConfig& config)
    : target_(target), config_(config) {
    validate(target, config);
    mapping_ = fourier_mapping(make_grid(target.h, target.w, 1), FrequencyLattice(config.max_frequency));
}

FitState FitObjective::initial_state() const {
    FitState state;
    state.coeffs = config_.mode == CoefficientMode::global
                       ? CoefficientField::global(config_.max_frequency)
                       : CoefficientField::per_pixel(config_.max_frequency, target_.h, target_.w);
    if (config_.init_scale != 0.0) {
        Rng rng(config_.seed + 1);
        for (double& v : state.coeffs.values()) v = config_.init_scale * (2.0 * rng.uniform() - 1.0);
    }
    if (config_.use_mlp) {
        state.mlp = init_siren(static_cast<int>(state.coeffs.width()), config_.hidden_dims, config_.seed);
    }
    return state;
}

FitEvaluation FitObjective::evaluate(const FitState& state) const {
    FitEvaluation eval;
    const Matrix features = fourier_features(mapping_, state.coeffs);
    MaskRaster y(target_.h, target_.w);
    for (Eigen::Index r = 0; r < features.rows(); ++r) {
        double acc = 0.0;
        for (Eigen::Index k = 0; k < features.cols(); ++k) acc += features(r, k);
        y.values[r] = sigmoid(acc);
    }
    eval.loss_y = iou_loss(y, target_);
    eval.coeff_grad = synthesis_gradient(mapping_, state.coeffs, iou_loss_gradient(y, target_));

    if (state.mlp) {
        const std::vector<double> yp_values = siren_forward(*state.mlp, features);
        const MaskRaster yp(target_.h, target_.w, yp_values);
        eval.loss_yprime = iou_loss(yp, target_);
        SirenGradients g = siren_backward(*state.mlp, features, iou_loss_gradient(yp, target_));
        const CoefficientField via_mlp = feature_gradient_to_coefficients(mapping_, state.coeffs, g.features);
        for (std::size_t i = 0; i < via_mlp.values().size(); ++i) {
            eval.coeff_grad.values()[i] += via_mlp.values()[i];
        }
        eval.mlp_grad = std::move(g);
    }
    return eval;
}

double FitObjective::loss(const FitState& state) const { return evaluate(state).total_loss(); }

std::vector<double> flatten(const FitState& state) {
    std::vector<double> flat(state.coeffs.values());
    if (state.mlp) {
        for (const auto& layer : state.mlp->layers) {
            flat.insert(flat.end(), layer.weight.data(), layer.weight.data() + layer.weight.size());
            flat.insert(flat.end(), layer.bias.data(), layer.bias.data() + layer.bias.size());
        }
    }
    return flat;
}

std::vector<double> flatten(const FitEvaluation& eval) {
    std::vector<double> flat(eval.coeff_grad.values());
    if (eval.mlp_grad) {
        for (std::size_t l = 0; l < eval.mlp_grad->weight.size(); ++l) {
            const Matrix& w = eval.mlp_grad->weight[l];
            const Eigen::VectorXd& b = eval.mlp_grad->bias[l];
            flat.insert(flat.end(), w.data(), w.data() + w.size());
            flat.insert(flat.end(), b.data(), b.data() + b.size());
        }
    }
    return flat;
}

void unflatten(std::span<const double> flat, FitState& state) {
    std::size_t pos = 0;
    auto take = [&](double* dst, std::size_t n) {
        if (pos + n > flat.size()) throw std::invalid_argument("fitter: flat parameter vector too short");
        std::copy(flat.begin() + pos, flat.begin() + pos + n, dst);
        pos += n;
    };
    take(state.coeffs.values().data(), state.coeffs.values().size());
    if (state.mlp) {
        for (auto& layer : state.mlp->layers) {
            take(layer.weight.data(), static_cast<std::size_t>(layer.weight.size()));
            take(layer.bias.data(), static_cast<std::size_t>(layer.bias.size()));
        }
    }
    if (pos != flat.size()) throw std::invalid_argument("fitter: flat parameter vector too long");
}

FitResult fit_mask(const MaskRaster& target, const FitConfig& config) {
    const FitObjective objective(target, config);
    FitState state = objective.initial_state();
    std::vector<double> params = flatten(state);
    AdamOptimizer adam(params.size(), config);

    FitResult result;
    result.h = target.h;
    result.w = target.w;
    result.loss_history.reserve(config.steps);
    for (int step = 0; step < config.steps; ++step) {
        const FitEvaluation eval = objective.evaluate(state);
        if (!std::isfinite(eval.loss_y) || !std::isfinite(eval.loss_yprime)) {
            throw std::runtime_error("fitter: loss diverged at step " + std::to_string(step));
        }
        result.loss_history.push_back({step, eval.loss_y, eval.loss_yprime});
        const std::vector<double> grad = flatten(eval);
        for (double g : grad) {
            if (!std::isfinite(g)) throw std::runtime_error("fitter: non-finite gradient at step " + std::to_string(step));
        }
        if (config.optimizer == OptimizerKind::adaptive_moments) {
            adam.step(params, grad);
        } else {
            for (std::size_t i = 0; i < params.size(); ++i) params[i] -= config.learning_rate * grad[i];
        }
        unflatten(params, state);
    }

    result.coeffs = std::move(state.coeffs);
    result.mlp = std::move(state.mlp);
    result.final_iou = soft_iou(predict(result, 1), target);
    return result;
}

MaskRaster predict(const FitResult& result, int scale) {
    const MaskRaster y = super_resolve(result.coeffs, result.h, result.w, scale);
    if (!result.mlp) return y;

    const CoordinateGrid grid = make_grid(result.h, result.w, scale);
    const CoefficientField coeffs = upsample_coefficients(result.coeffs, scale).field;
    const Matrix features = fourier_features(fourier_mapping(grid, FrequencyLattice(coeffs.max_frequency())), coeffs);
    const std::vector<double> yp = siren_forward(*result.mlp, features);
    MaskRaster out(y.h, y.w);
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = 0.5 * (y.values[i] + yp[i]);
    return out;
}

}  // namespace fouriermask
