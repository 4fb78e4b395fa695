#include "fouriermask/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fouriermask/codec.hpp"
#include "fouriermask/upsampler.hpp"

namespace fouriermask {

namespace {

std::vector<double> coefficients_at(const CoefficientField& coeffs, const Coordinate& x) {
    if (coeffs.is_global()) {
        const auto s = coeffs.slice(0);
        return {s.begin(), s.end()};
    }
    std::vector<double> out(coeffs.width());
    bilinear_at(coeffs.values(), coeffs.h(), coeffs.w(), static_cast<int>(coeffs.width()),
                x.row * coeffs.h(), x.col * coeffs.w(), out);
    return out;
}

// Coefficients at fine pixel (i, j) of a grid `factor` times the field's.
std::vector<double> coefficients_at_index(const CoefficientField& coeffs, int i, int j, int factor) {
    if (coeffs.is_global()) {
        const auto s = coeffs.slice(0);
        return {s.begin(), s.end()};
    }
    std::vector<double> out(coeffs.width());
    bilinear_at_index(coeffs.values(), coeffs.h(), coeffs.w(), static_cast<int>(coeffs.width()), i,
                      j, factor, out);
    return out;
}

std::vector<double> build_input(const FrequencyLattice& lattice, std::span<const double> coeffs,
                                const Coordinate& x, const std::optional<AuxFeatureGrid>& aux) {
    const std::size_t width = 2 * lattice.size();
    const std::size_t extra = aux ? static_cast<std::size_t>(aux->channels) : 0;
    std::vector<double> row(width + extra);
    mapping_row(x, lattice, std::span<double>(row.data(), width));
    for (std::size_t k = 0; k < width; ++k) row[k] *= coeffs[k];
    if (aux) {
        bilinear_at(aux->values, aux->rows, aux->cols, aux->channels, x.row * aux->rows,
                    x.col * aux->cols, std::span<double>(row.data() + width, extra));
    }
    return row;
}

Matrix rows_to_matrix(const std::vector<std::vector<double>>& rows) {
    Matrix m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t k = 0; k < rows[r].size(); ++k) m(r, k) = rows[r][k];
    }
    return m;
}

void validate(const RefinementConfig& config) {
    if (config.steps < 0) throw std::invalid_argument("renderer: steps must be >= 0");
    if (config.points_per_step < 1) throw std::invalid_argument("renderer: points per step must be >= 1");
    if (config.oversample < 1) throw std::invalid_argument("renderer: oversample must be >= 1");
    if (config.importance_ratio < 0.0 || config.importance_ratio > 1.0) {
        throw std::invalid_argument("renderer: importance ratio must be in [0, 1]");
    }
    if (config.aux) {
        const auto& a = *config.aux;
        if (a.rows < 1 || a.cols < 1 || a.channels < 1 ||
            a.values.size() != static_cast<std::size_t>(a.rows) * a.cols * a.channels) {
            throw std::invalid_argument("renderer: malformed auxiliary feature grid");
        }
    }
}

}  // namespace

MaskRaster uncertainty_scores(const MaskRaster& mask) {
    MaskRaster out(mask.h, mask.w);
    for (std::size_t i = 0; i < mask.size(); ++i) out.values[i] = std::abs(mask.values[i] - 0.5);
    return out;
}

std::vector<UncertainPoint> select_uncertain_points(const MaskRaster& mask, int n) {
    if (n < 0 || static_cast<std::size_t>(n) > mask.size()) {
        throw std::invalid_argument("renderer: requested " + std::to_string(n) + " points from a " +
                                    std::to_string(mask.h) + "x" + std::to_string(mask.w) + " raster");
    }
    const MaskRaster scores = uncertainty_scores(mask);
    std::vector<std::size_t> order(mask.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto less = [&](std::size_t a, std::size_t b) {
        if (scores.values[a] != scores.values[b]) return scores.values[a] < scores.values[b];
        return a < b;
    };
    std::partial_sort(order.begin(), order.begin() + n, order.end(), less);

    std::vector<UncertainPoint> points;
    points.reserve(n);
    for (int k = 0; k < n; ++k) {
        const std::size_t idx = order[k];
        const int i = static_cast<int>(idx / mask.w);
        const int j = static_cast<int>(idx % mask.w);
        points.push_back({i, j, scores.values[idx],
                          {static_cast<double>(i) / mask.h, static_cast<double>(j) / mask.w}});
    }
    return points;
}

double implicit_value(const CoefficientField& coeffs, const Coordinate& x) {
    const FrequencyLattice lattice(coeffs.max_frequency());
    return sigmoid(presigmoid_at(x, lattice, coefficients_at(coeffs, x)));
}

std::vector<double> renderer_input(const CoefficientField& coeffs, const Coordinate& x,
                                   const std::optional<AuxFeatureGrid>& aux) {
    const FrequencyLattice lattice(coeffs.max_frequency());
    return build_input(lattice, coefficients_at(coeffs, x), x, aux);
}

MaskRaster subdivision_refine(const CoefficientField& coeffs, const SirenParams* mlp, int h, int w,
                              const RefinementConfig& config, std::vector<RefinementTrace>* trace) {
    validate(config);
    if (config.source == PointSource::mlp) {
        if (mlp == nullptr) throw std::invalid_argument("renderer: mlp point source needs an MLP");
        const int expected = static_cast<int>(coeffs.width()) + (config.aux ? config.aux->channels : 0);
        if (mlp->input_dim() != expected) {
            throw std::invalid_argument("renderer: MLP input dimension " + std::to_string(mlp->input_dim()) +
                                        " does not match point features " + std::to_string(expected));
        }
    }
    if (!coeffs.is_global() && (coeffs.h() != h || coeffs.w() != w)) {
        throw std::invalid_argument("renderer: per-pixel field does not match the coarse resolution");
    }
    const std::size_t final_points = static_cast<std::size_t>(h) * w << (2 * config.steps);
    if (config.steps > 13 || final_points > kMaxGridPoints) {
        throw std::invalid_argument("renderer: refined raster exceeds the maximum of 2^26 points");
    }
    const FrequencyLattice lattice(coeffs.max_frequency());
    MaskRaster raster = evaluate_mask(make_grid(h, w, 1), coeffs);

    for (int step = 1; step <= config.steps; ++step) {
        raster = upsample_raster(raster, 2);
        const int factor = 1 << step;
        const std::vector<UncertainPoint> points = select_uncertain_points(raster, config.points_per_step);
        if (config.source == PointSource::exact_implicit) {
            for (const UncertainPoint& pt : points) {
                const std::vector<double> c = coefficients_at_index(coeffs, pt.i, pt.j, factor);
                raster.at(pt.i, pt.j) = sigmoid(presigmoid_at(pt.x, lattice, c));
            }
        } else {
            std::vector<std::vector<double>> rows;
            rows.reserve(points.size());
            for (const UncertainPoint& pt : points) {
                rows.push_back(build_input(lattice, coefficients_at_index(coeffs, pt.i, pt.j, factor),
                                           pt.x, config.aux));
            }
            const std::vector<double> y = siren_forward(*mlp, rows_to_matrix(rows));
            for (std::size_t k = 0; k < points.size(); ++k) raster.at(points[k].i, points[k].j) = y[k];
        }
        if (trace != nullptr) {
            for (const UncertainPoint& pt : points) trace->push_back({step, pt.i, pt.j, pt.score});
        }
    }
    return raster;
}

PointTrainingStep train_renderer_points(const MaskRaster& target, const CoefficientField& coeffs,
                                        const SirenParams* mlp, const RefinementConfig& config,
                                        Rng& rng) {
    validate(config);
    if (mlp == nullptr) throw std::invalid_argument("renderer: point training needs an MLP");
    if (target.h < 1 || target.w < 1) throw std::invalid_argument("renderer: empty target");
    if (!coeffs.is_global() && (target.h < coeffs.h() || target.w < coeffs.w())) {
        throw std::invalid_argument("renderer: target is coarser than the coefficient field");
    }
    const FrequencyLattice lattice(coeffs.max_frequency());
    const int n = config.points_per_step;
    const int candidates = config.oversample * n;
    const int n_important = static_cast<int>(std::lround(config.importance_ratio * n));

    std::vector<Coordinate> pool(candidates);
    std::vector<double> score(candidates);
    for (int k = 0; k < candidates; ++k) {
        const double r = rng.uniform();
        const double c = rng.uniform();
        pool[k] = {r, c};
        score[k] = std::abs(implicit_value(coeffs, pool[k]) - 0.5);
    }
    std::vector<int> order(candidates);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return score[a] < score[b]; });

    PointTrainingStep out;
    out.points.reserve(n);
    for (int k = 0; k < n_important; ++k) out.points.push_back(pool[order[k]]);
    while (static_cast<int>(out.points.size()) < n) out.points.push_back({rng.uniform(), rng.uniform()});

    std::vector<std::vector<double>> rows;
    std::vector<double> labels;
    rows.reserve(n);
    labels.reserve(n);
    for (const Coordinate& x : out.points) {
        rows.push_back(build_input(lattice, coefficients_at(coeffs, x), x, config.aux));
        double t = 0.0;
        bilinear_at(target.values, target.h, target.w, 1, x.row * target.h, x.col * target.w,
                    std::span<double>(&t, 1));
        labels.push_back(t);
    }
    const Matrix features = rows_to_matrix(rows);
    const std::vector<double> y = siren_forward(*mlp, features);

    // d(mean BCE)/dz = (y - t) / n for a sigmoid output.
    std::vector<double> dz(n);
    double loss = 0.0;
    for (int k = 0; k < n; ++k) {
        loss += binary_cross_entropy(y[k], labels[k]);
        dz[k] = (y[k] - labels[k]) / n;
    }
    out.mean_loss = loss / n;

    const SirenGradients g = siren_backward_logits(*mlp, features, dz);
    out.params = *mlp;
    for (std::size_t l = 0; l < out.params.layers.size(); ++l) {
        out.params.layers[l].weight -= config.learning_rate * g.weight[l];
        out.params.layers[l].bias -= config.learning_rate * g.bias[l];
    }
    return out;
}

}  // namespace fouriermask
