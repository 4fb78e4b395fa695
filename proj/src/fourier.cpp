#include "fouriermask/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fouriermask {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string shape_str(std::size_t a, std::size_t b) {
    return std::to_string(a) + " vs " + std::to_string(b);
}

// cos/sin of 2 pi (k * n mod N) / N for the integer sample grid. Reducing the
// phase with integer arithmetic keeps every table entry exact to rounding.
struct AxisTable {
    int n = 0;
    int k_min = 0;
    int k_max = 0;
    std::vector<double> cos_v;
    std::vector<double> sin_v;

    AxisTable(int samples, int lo, int hi) : n(samples), k_min(lo), k_max(hi) {
        const std::size_t count = static_cast<std::size_t>(hi - lo + 1) * samples;
        cos_v.resize(count);
        sin_v.resize(count);
        for (int k = lo; k <= hi; ++k) {
            for (int i = 0; i < samples; ++i) {
                long long m = (static_cast<long long>(k) * i) % samples;
                if (m < 0) m += samples;
                const double theta = kTwoPi * static_cast<double>(m) / samples;
                const std::size_t idx = static_cast<std::size_t>(k - lo) * samples + i;
                cos_v[idx] = std::cos(theta);
                sin_v[idx] = std::sin(theta);
            }
        }
    }

    double c(int k, int i) const { return cos_v[static_cast<std::size_t>(k - k_min) * n + i]; }
    double s(int k, int i) const { return sin_v[static_cast<std::size_t>(k - k_min) * n + i]; }
};

class GridMapper {
public:
    GridMapper(const CoordinateGrid& grid, const FrequencyLattice& lattice)
        : lattice_(lattice),
          rows_(grid.rows, 0, lattice.max_frequency()),
          cols_(grid.cols, -lattice.max_frequency(), lattice.max_frequency()),
          grid_cols_(grid.cols) {}

    // Mapping row for flattened grid index r.
    void fill(std::size_t r, std::span<double> out) const {
        const int i = static_cast<int>(r / grid_cols_);
        const int j = static_cast<int>(r % grid_cols_);
        const std::size_t c = lattice_.size();
        for (std::size_t k = 0; k < c; ++k) {
            const Frequency& fq = lattice_[k];
            const double cu = rows_.c(fq.u, i), su = rows_.s(fq.u, i);
            const double cv = cols_.c(fq.v, j), sv = cols_.s(fq.v, j);
            out[k] = cu * cv - su * sv;
            out[c + k] = su * cv + cu * sv;
        }
    }

private:
    const FrequencyLattice& lattice_;
    AxisTable rows_;
    AxisTable cols_;
    std::size_t grid_cols_;
};

double ordered_dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
    return acc;
}

void check_lattice(const FrequencyLattice& lattice, const CoefficientField& coeffs) {
    if (static_cast<int>(lattice.max_frequency()) != coeffs.max_frequency()) {
        throw std::invalid_argument("fourier: coefficient field lattice f=" +
                                    std::to_string(coeffs.max_frequency()) +
                                    " does not match lattice f=" +
                                    std::to_string(lattice.max_frequency()));
    }
}

void check_rows(std::size_t p, const CoefficientField& coeffs) {
    if (!coeffs.is_global() && coeffs.slice_count() != p) {
        throw std::invalid_argument("fourier: per-pixel field size does not match point count (" +
                                    shape_str(coeffs.slice_count(), p) + ")");
    }
}

}  // namespace

int scale_multiplier(int scale) {
    if (scale < 1) throw std::invalid_argument("grid: scaling factor must be >= 1");
    if (scale > 27) throw std::invalid_argument("grid: scaling factor too large");
    return 1 << (scale - 1);
}

CoordinateGrid make_grid(int h, int w, int scale) {
    if (h < 1 || w < 1) throw std::invalid_argument("grid: resolution must be positive");
    const int mult = scale_multiplier(scale);
    const auto rows = static_cast<std::size_t>(h) * mult;
    const auto cols = static_cast<std::size_t>(w) * mult;
    if (rows * cols > kMaxGridPoints) {
        throw std::invalid_argument("grid: " + std::to_string(rows) + "x" + std::to_string(cols) +
                                    " exceeds the maximum of 2^26 points");
    }
    CoordinateGrid grid;
    grid.h = h;
    grid.w = w;
    grid.scale = scale;
    grid.rows = static_cast<int>(rows);
    grid.cols = static_cast<int>(cols);
    grid.step = 1.0 / mult;
    grid.coords.reserve(rows * cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            grid.coords.push_back({static_cast<double>(i) / static_cast<double>(rows),
                                   static_cast<double>(j) / static_cast<double>(cols)});
        }
    }
    return grid;
}

// --- CoefficientField ---------------------------------------------------------

CoefficientField::CoefficientField(CoefficientMode mode, int max_frequency, int h, int w,
                                   std::vector<double> values)
    : mode_(mode),
      max_frequency_(max_frequency),
      h_(h),
      w_(w),
      lattice_size_(coefficient_count(max_frequency)),
      values_(std::move(values)) {
    if (mode == CoefficientMode::per_pixel && (h < 1 || w < 1)) {
        throw std::invalid_argument("coefficients: per-pixel field needs positive h and w");
    }
    const std::size_t expected = slice_count() * width();
    if (values_.size() != expected) {
        throw std::invalid_argument("coefficients: expected " + std::to_string(expected) +
                                    " values, got " + std::to_string(values_.size()));
    }
}

CoefficientField CoefficientField::global(int max_frequency) {
    return global(max_frequency, std::vector<double>(2 * coefficient_count(max_frequency), 0.0));
}

CoefficientField CoefficientField::global(int max_frequency, std::vector<double> values) {
    return CoefficientField(CoefficientMode::global, max_frequency, 0, 0, std::move(values));
}

CoefficientField CoefficientField::per_pixel(int max_frequency, int h, int w) {
    if (h < 1 || w < 1) throw std::invalid_argument("coefficients: per-pixel field needs positive h and w");
    const std::size_t n = static_cast<std::size_t>(h) * w * 2 * coefficient_count(max_frequency);
    return per_pixel(max_frequency, h, w, std::vector<double>(n, 0.0));
}

CoefficientField CoefficientField::per_pixel(int max_frequency, int h, int w,
                                             std::vector<double> values) {
    return CoefficientField(CoefficientMode::per_pixel, max_frequency, h, w, std::move(values));
}

CoefficientField CoefficientField::broadcast(const CoefficientField& global_field, int h, int w) {
    if (!global_field.is_global()) throw std::invalid_argument("coefficients: broadcast needs a global field");
    CoefficientField out = per_pixel(global_field.max_frequency(), h, w);
    for (std::size_t r = 0; r < out.slice_count(); ++r) {
        auto dst = out.slice(r);
        std::copy(global_field.values_.begin(), global_field.values_.end(), dst.begin());
    }
    return out;
}

std::span<double> CoefficientField::slice(std::size_t pixel) {
    return std::span<double>(values_).subspan(pixel * width(), width());
}

std::span<const double> CoefficientField::slice(std::size_t pixel) const {
    return std::span<const double>(values_).subspan(pixel * width(), width());
}

// --- MaskRaster ---------------------------------------------------------------

MaskRaster::MaskRaster(int h_, int w_, double fill) : h(h_), w(w_) {
    if (h_ < 0 || w_ < 0) throw std::invalid_argument("raster: negative dimensions");
    values.assign(static_cast<std::size_t>(h_) * w_, fill);
}

MaskRaster::MaskRaster(int h_, int w_, std::vector<double> v) : h(h_), w(w_), values(std::move(v)) {
    if (h_ < 0 || w_ < 0 || values.size() != static_cast<std::size_t>(h_) * w_) {
        throw std::invalid_argument("raster: value count does not match " + std::to_string(h_) +
                                    "x" + std::to_string(w_));
    }
}

bool MaskRaster::is_binary() const {
    for (double v : values) {
        if (v != 0.0 && v != 1.0) return false;
    }
    return true;
}

MaskRaster MaskRaster::binarized() const {
    MaskRaster out = *this;
    for (double& v : out.values) v = v >= threshold ? 1.0 : 0.0;
    return out;
}

// --- mapping ------------------------------------------------------------------

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void mapping_row(const Coordinate& x, const FrequencyLattice& lattice, std::span<double> out) {
    const std::size_t c = lattice.size();
    if (out.size() != 2 * c) throw std::invalid_argument("fourier: mapping row buffer has wrong size");
    for (std::size_t k = 0; k < c; ++k) {
        const Frequency& fq = lattice[k];
        double phase = fq.u * x.row + fq.v * x.col;
        phase -= std::floor(phase);
        const double theta = kTwoPi * phase;
        out[k] = std::cos(theta);
        out[c + k] = std::sin(theta);
    }
}

Matrix fourier_mapping(const CoordinateGrid& grid, const FrequencyLattice& lattice) {
    const std::size_t p = grid.size();
    const std::size_t width = 2 * lattice.size();
    Matrix mapping(p, width);
    GridMapper mapper(grid, lattice);
    for (std::size_t r = 0; r < p; ++r) {
        mapper.fill(r, std::span<double>(mapping.row(r).data(), width));
    }
    return mapping;
}

Matrix fourier_features(const Matrix& mapping, const CoefficientField& coeffs) {
    const auto p = static_cast<std::size_t>(mapping.rows());
    if (static_cast<std::size_t>(mapping.cols()) != coeffs.width()) {
        throw std::invalid_argument("fourier: mapping width does not match coefficients (" +
                                    shape_str(mapping.cols(), coeffs.width()) + ")");
    }
    check_rows(p, coeffs);
    Matrix features(mapping.rows(), mapping.cols());
    for (std::size_t r = 0; r < p; ++r) {
        const auto w = coeffs.slice_for_row(r);
        for (std::size_t k = 0; k < w.size(); ++k) features(r, k) = mapping(r, k) * w[k];
    }
    return features;
}

MaskRaster synthesize_mask(const Matrix& features, int h_out, int w_out) {
    if (h_out < 1 || w_out < 1 ||
        static_cast<std::size_t>(features.rows()) != static_cast<std::size_t>(h_out) * w_out) {
        throw std::invalid_argument("fourier: feature rows do not match output shape " +
                                    std::to_string(h_out) + "x" + std::to_string(w_out));
    }
    MaskRaster out(h_out, w_out);
    for (Eigen::Index r = 0; r < features.rows(); ++r) {
        double acc = 0.0;
        for (Eigen::Index k = 0; k < features.cols(); ++k) acc += features(r, k);
        out.values[r] = sigmoid(acc);
    }
    return out;
}

std::vector<double> presigmoid_sums(const CoordinateGrid& grid, const CoefficientField& coeffs) {
    const std::size_t p = grid.size();
    check_rows(p, coeffs);
    const FrequencyLattice lattice(coeffs.max_frequency());
    GridMapper mapper(grid, lattice);
    std::vector<double> row(coeffs.width());
    std::vector<double> sums(p);
    for (std::size_t r = 0; r < p; ++r) {
        mapper.fill(r, row);
        sums[r] = ordered_dot(row, coeffs.slice_for_row(r));
    }
    return sums;
}

double presigmoid_at(const Coordinate& x, const FrequencyLattice& lattice,
                     std::span<const double> coeffs) {
    std::vector<double> row(2 * lattice.size());
    if (coeffs.size() != row.size()) throw std::invalid_argument("fourier: coefficient vector has wrong size");
    mapping_row(x, lattice, row);
    return ordered_dot(row, coeffs);
}

MaskRaster evaluate_mask(const CoordinateGrid& grid, const CoefficientField& coeffs) {
    std::vector<double> sums = presigmoid_sums(grid, coeffs);
    for (double& z : sums) z = sigmoid(z);
    return MaskRaster(grid.rows, grid.cols, std::move(sums));
}

// --- gradients ----------------------------------------------------------------

CoefficientField synthesis_gradient(const CoordinateGrid& grid, const FrequencyLattice& lattice,
                                    const CoefficientField& coeffs,
                                    std::span<const double> upstream) {
    check_lattice(lattice, coeffs);
    return synthesis_gradient(fourier_mapping(grid, lattice), coeffs, upstream);
}

CoefficientField synthesis_gradient(const Matrix& mapping, const CoefficientField& coeffs,
                                    std::span<const double> upstream) {
    const auto p = static_cast<std::size_t>(mapping.rows());
    if (upstream.size() != p) {
        throw std::invalid_argument("fourier: upstream gradient length does not match point count (" +
                                    shape_str(upstream.size(), p) + ")");
    }
    if (static_cast<std::size_t>(mapping.cols()) != coeffs.width()) {
        throw std::invalid_argument("fourier: mapping width does not match coefficients");
    }
    check_rows(p, coeffs);
    CoefficientField grad = coeffs;
    std::fill(grad.values().begin(), grad.values().end(), 0.0);
    const std::size_t width = coeffs.width();
    for (std::size_t r = 0; r < p; ++r) {
        const auto w = coeffs.slice_for_row(r);
        const std::span<const double> m(mapping.row(r).data(), width);
        const double y = sigmoid(ordered_dot(m, w));
        const double dz = upstream[r] * y * (1.0 - y);
        auto g = grad.slice(coeffs.is_global() ? 0 : r);
        for (std::size_t k = 0; k < width; ++k) g[k] += dz * m[k];
    }
    return grad;
}

CoefficientField feature_gradient_to_coefficients(const Matrix& mapping,
                                                  const CoefficientField& coeffs,
                                                  const Matrix& feature_grad) {
    const auto p = static_cast<std::size_t>(mapping.rows());
    if (feature_grad.rows() != mapping.rows() || feature_grad.cols() != mapping.cols() ||
        static_cast<std::size_t>(mapping.cols()) != coeffs.width()) {
        throw std::invalid_argument("fourier: feature gradient shape mismatch");
    }
    check_rows(p, coeffs);
    CoefficientField grad = coeffs;
    std::fill(grad.values().begin(), grad.values().end(), 0.0);
    for (std::size_t r = 0; r < p; ++r) {
        auto g = grad.slice(coeffs.is_global() ? 0 : r);
        for (std::size_t k = 0; k < g.size(); ++k) g[k] += feature_grad(r, k) * mapping(r, k);
    }
    return grad;
}

}  // namespace fouriermask
