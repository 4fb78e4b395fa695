#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fouriermask/fourier.hpp"
#include "fouriermask/siren.hpp"

namespace fouriermask {

enum class OptimizerKind { plain_gd, adaptive_moments };

struct FitConfig {
    CoefficientMode mode = CoefficientMode::global;
    int max_frequency = 12;
    bool use_mlp = false;
    std::vector<int> hidden_dims = kDefaultHiddenDims;
    int steps = 3000;
    double learning_rate = 1.0;
    OptimizerKind optimizer = OptimizerKind::plain_gd;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;
    /// Coefficients start uniform in (-init_scale, init_scale); 0 means all zero.
    double init_scale = 0.0;
};

struct LossRecord {
    int step = 0;
    double loss_y = 0.0;
    /// 0 when no MLP branch is trained.
    double loss_yprime = 0.0;
};

struct FitResult {
    int h = 0;
    int w = 0;
    CoefficientField coeffs;
    std::optional<SirenParams> mlp;
    std::vector<LossRecord> loss_history;
    double final_iou = 0.0;

    friend bool operator==(const FitResult& a, const FitResult& b);
};

/// Trainable state: coefficients and the optional y' branch.
struct FitState {
    CoefficientField coeffs;
    std::optional<SirenParams> mlp;
};

struct FitEvaluation {
    double loss_y = 0.0;
    double loss_yprime = 0.0;
    CoefficientField coeff_grad;
    std::optional<SirenGradients> mlp_grad;

    double total_loss() const { return loss_y + loss_yprime; }
};

/// iou_loss(y, target) [+ iou_loss(y', target)] and its gradient over the
/// s = 1 grid of the target, with the mapping precomputed once.
class FitObjective {
public:
    FitObjective(const MaskRaster& target, const FitConfig& config);

    FitState initial_state() const;
    FitEvaluation evaluate(const FitState& state) const;
    double loss(const FitState& state) const;

    const MaskRaster& target() const { return target_; }
    const Matrix& mapping() const { return mapping_; }

private:
    MaskRaster target_;
    FitConfig config_;
    Matrix mapping_;
};

/// Flattened view helpers used by the optimizers: coefficients first, then
/// each MLP layer's weights (row-major) and biases.
std::vector<double> flatten(const FitState& state);
std::vector<double> flatten(const FitEvaluation& eval);
void unflatten(std::span<const double> flat, FitState& state);

/// Fits the coefficient field (and y' branch when configured) to a binary target.
FitResult fit_mask(const MaskRaster& target, const FitConfig& config);

/// y on the scale-s grid, or the mean of y and y' when an MLP is present.
MaskRaster predict(const FitResult& result, int scale = 1);

}  // namespace fouriermask
