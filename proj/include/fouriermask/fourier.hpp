#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "fouriermask/lattice.hpp"

namespace fouriermask {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Resource guard for sub-sampled grids.
inline constexpr std::size_t kMaxGridPoints = std::size_t{1} << 26;

struct Coordinate {
    double row = 0.0;
    double col = 0.0;
};

/// Normalized pixel coordinates (i / rows, j / cols) in [0, 1), row-major.
///
/// `h` and `w` are the base resolution; `scale` is the scaling factor s, so
/// the grid has h * 2^(s-1) rows and w * 2^(s-1) columns and a pixel step of
/// 1 / 2^(s-1) in base-pixel units. At s = 1 this is the DFT sample grid.
struct CoordinateGrid {
    int h = 0;
    int w = 0;
    int scale = 1;
    int rows = 0;
    int cols = 0;
    double step = 1.0;
    std::vector<Coordinate> coords;

    std::size_t size() const { return coords.size(); }
};

CoordinateGrid make_grid(int h, int w, int scale);

/// 2^(s-1), validated.
int scale_multiplier(int scale);

enum class CoefficientMode { global, per_pixel };

/// Fourier amplitudes over a lattice. Each coefficient vector has 2c entries:
/// c cosine amplitudes then c sine amplitudes, both in canonical lattice order.
/// Global mode holds one vector; per-pixel mode holds one per pixel of an
/// h x w field, row-major.
class CoefficientField {
public:
    CoefficientField() = default;

    static CoefficientField global(int max_frequency);
    static CoefficientField global(int max_frequency, std::vector<double> values);
    static CoefficientField per_pixel(int max_frequency, int h, int w);
    static CoefficientField per_pixel(int max_frequency, int h, int w, std::vector<double> values);
    /// Per-pixel field whose every slice is a copy of `global_field`.
    static CoefficientField broadcast(const CoefficientField& global_field, int h, int w);

    CoefficientMode mode() const { return mode_; }
    bool is_global() const { return mode_ == CoefficientMode::global; }
    int max_frequency() const { return max_frequency_; }
    int h() const { return h_; }
    int w() const { return w_; }
    std::size_t lattice_size() const { return lattice_size_; }
    std::size_t width() const { return 2 * lattice_size_; }
    std::size_t slice_count() const { return is_global() ? 1 : static_cast<std::size_t>(h_) * w_; }

    std::span<double> slice(std::size_t pixel);
    std::span<const double> slice(std::size_t pixel) const;
    /// The coefficient vector used at flattened pixel r (slice 0 in global mode).
    std::span<const double> slice_for_row(std::size_t row) const {
        return slice(is_global() ? 0 : row);
    }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    friend bool operator==(const CoefficientField&, const CoefficientField&) = default;

private:
    CoefficientField(CoefficientMode mode, int max_frequency, int h, int w, std::vector<double> values);

    CoefficientMode mode_ = CoefficientMode::global;
    int max_frequency_ = 0;
    int h_ = 0;
    int w_ = 0;
    std::size_t lattice_size_ = 1;
    std::vector<double> values_ = {0.0, 0.0};
};

/// h x w soft mask, values in [0, 1], row-major.
struct MaskRaster {
    int h = 0;
    int w = 0;
    std::vector<double> values;
    double threshold = 0.5;

    MaskRaster() = default;
    MaskRaster(int h, int w, double fill = 0.0);
    MaskRaster(int h, int w, std::vector<double> values);

    std::size_t size() const { return values.size(); }
    double& at(int i, int j) { return values[static_cast<std::size_t>(i) * w + j]; }
    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * w + j]; }

    bool is_binary() const;
    /// value >= threshold -> 1, else 0.
    MaskRaster binarized() const;

    friend bool operator==(const MaskRaster&, const MaskRaster&) = default;
};

double sigmoid(double z);

/// One mapping row [cos(2 pi x.B), sin(2 pi x.B)] at an arbitrary coordinate.
void mapping_row(const Coordinate& x, const FrequencyLattice& lattice, std::span<double> out);

/// p x 2c matrix of cosines then sines, columns in canonical lattice order.
Matrix fourier_mapping(const CoordinateGrid& grid, const FrequencyLattice& lattice);

/// Elementwise product of the mapping with W (broadcast in global mode).
Matrix fourier_features(const Matrix& mapping, const CoefficientField& coeffs);

/// Sigmoid of each feature row's sum, reshaped row-major to h_out x w_out.
MaskRaster synthesize_mask(const Matrix& features, int h_out, int w_out);

/// Pre-sigmoid sums sum_k mapping(r, k) * W_r(k) for every grid point, streamed
/// row by row without materializing the mapping. Accumulates in column order.
std::vector<double> presigmoid_sums(const CoordinateGrid& grid, const CoefficientField& coeffs);

/// Pre-sigmoid sum of one coefficient vector at one coordinate.
double presigmoid_at(const Coordinate& x, const FrequencyLattice& lattice,
                     std::span<const double> coeffs);

/// Mask synthesized on `grid` (grid.rows x grid.cols). Per-pixel fields must
/// match the grid resolution.
MaskRaster evaluate_mask(const CoordinateGrid& grid, const CoefficientField& coeffs);

/// dL/dW given dL/dy per grid point, for y = sigmoid(sum(mapping o W)).
CoefficientField synthesis_gradient(const CoordinateGrid& grid, const FrequencyLattice& lattice,
                                    const CoefficientField& coeffs,
                                    std::span<const double> upstream);
CoefficientField synthesis_gradient(const Matrix& mapping, const CoefficientField& coeffs,
                                    std::span<const double> upstream);

/// dL/dW given dL/d(features); features = mapping o W.
CoefficientField feature_gradient_to_coefficients(const Matrix& mapping,
                                                  const CoefficientField& coeffs,
                                                  const Matrix& feature_grad);

}  // namespace fouriermask
