#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fouriermask/fourier.hpp"
#include "fouriermask/siren.hpp"

namespace fouriermask {

enum class PointSource { exact_implicit, mlp };

/// Optional per-point side features for the renderer MLP, bilinearly sampled
/// at each point and appended after the Fourier features.
struct AuxFeatureGrid {
    int rows = 0;
    int cols = 0;
    int channels = 0;
    std::vector<double> values;  // row-major, channels innermost
};

struct RefinementConfig {
    int steps = 3;
    int points_per_step = 784;
    PointSource source = PointSource::exact_implicit;
    /// Training-time point sampling: draw k * N candidates, keep the beta * N
    /// most uncertain and fill the rest uniformly at random.
    int oversample = 3;
    double importance_ratio = 0.75;
    double learning_rate = 1e-2;
    std::uint64_t seed = 0;
    std::optional<AuxFeatureGrid> aux;
};

struct UncertainPoint {
    int i = 0;
    int j = 0;
    double score = 0.0;
    Coordinate x;
};

struct RefinementTrace {
    int step = 0;
    int i = 0;
    int j = 0;
    double score = 0.0;
};

/// |value - 0.5| per pixel; lower is less certain.
MaskRaster uncertainty_scores(const MaskRaster& mask);

/// The n lowest-score pixels in score-ascending order, ties by row-major
/// index. Coordinates follow the i / H grid convention.
std::vector<UncertainPoint> select_uncertain_points(const MaskRaster& mask, int n);

/// Starting from the s = 1 raster, each step upsamples 2x bilinearly and
/// overwrites the N most uncertain pixels with point evaluations of the
/// implicit function (or the renderer MLP). Output is (h * 2^steps) x (w * 2^steps).
MaskRaster subdivision_refine(const CoefficientField& coeffs, const SirenParams* mlp, int h, int w,
                              const RefinementConfig& config,
                              std::vector<RefinementTrace>* trace = nullptr);

/// Implicit mask value at a continuous coordinate. Per-pixel fields are
/// bilinearly sampled at x scaled to the field resolution.
double implicit_value(const CoefficientField& coeffs, const Coordinate& x);

/// Renderer MLP input row at x: Fourier features, then auxiliary channels.
std::vector<double> renderer_input(const CoefficientField& coeffs, const Coordinate& x,
                                   const std::optional<AuxFeatureGrid>& aux);

struct PointTrainingStep {
    SirenParams params;
    /// Mean binary cross-entropy over the sampled points before the update.
    double mean_loss = 0.0;
    std::vector<Coordinate> points;
};

/// One SGD step of pointwise binary cross-entropy on points chosen by
/// oversampled uncertainty sampling. Targets are bilinearly sampled from the
/// high-resolution mask.
PointTrainingStep train_renderer_points(const MaskRaster& target, const CoefficientField& coeffs,
                                        const SirenParams* mlp, const RefinementConfig& config,
                                        Rng& rng);

}  // namespace fouriermask
