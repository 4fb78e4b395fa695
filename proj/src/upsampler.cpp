#include "fouriermask/upsampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fouriermask/codec.hpp"

namespace fouriermask {

namespace {

struct Tap {
    int lo;
    int hi;
    double t;
};

Tap index_tap(long r, int factor, int n) {
    const long base = r / factor;
    if (base >= n - 1) return {n - 1, n - 1, 0.0};
    return {static_cast<int>(base), static_cast<int>(base + 1),
            static_cast<double>(r % factor) / static_cast<double>(factor)};
}

Tap position_tap(double pos, int n) {
    if (!(pos > 0.0)) return {0, 0, 0.0};
    const double fl = std::floor(pos);
    if (fl >= n - 1) return {n - 1, n - 1, 0.0};
    const int lo = static_cast<int>(fl);
    return {lo, lo + 1, pos - fl};
}

void blend(std::span<const double> src, int cols, int channels, const Tap& tr, const Tap& tc,
           std::span<double> out) {
    const auto at = [&](int i, int j, int ch) {
        return src[(static_cast<std::size_t>(i) * cols + j) * channels + ch];
    };
    for (int ch = 0; ch < channels; ++ch) {
        const double top = (1.0 - tc.t) * at(tr.lo, tc.lo, ch) + tc.t * at(tr.lo, tc.hi, ch);
        const double bottom = (1.0 - tc.t) * at(tr.hi, tc.lo, ch) + tc.t * at(tr.hi, tc.hi, ch);
        out[ch] = (1.0 - tr.t) * top + tr.t * bottom;
    }
}

void check_source(std::span<const double> src, int rows, int cols, int channels,
                  std::span<double> out) {
    if (rows < 1 || cols < 1 || channels < 1 ||
        src.size() != static_cast<std::size_t>(rows) * cols * channels ||
        out.size() != static_cast<std::size_t>(channels)) {
        throw std::invalid_argument("upsampler: grid shape mismatch");
    }
}

}  // namespace

void bilinear_at_index(std::span<const double> src, int rows, int cols, int channels, long r,
                       long c, int factor, std::span<double> out) {
    check_source(src, rows, cols, channels, out);
    if (factor < 1) throw std::invalid_argument("upsampler: factor must be >= 1");
    blend(src, cols, channels, index_tap(r, factor, rows), index_tap(c, factor, cols), out);
}

void bilinear_at(std::span<const double> src, int rows, int cols, int channels, double row,
                 double col, std::span<double> out) {
    check_source(src, rows, cols, channels, out);
    blend(src, cols, channels, position_tap(row, rows), position_tap(col, cols), out);
}

std::vector<double> bilinear_upsample(std::span<const double> src, int rows, int cols,
                                      int channels, int factor) {
    if (factor < 1) throw std::invalid_argument("upsampler: factor must be >= 1");
    const long out_rows = static_cast<long>(rows) * factor;
    const long out_cols = static_cast<long>(cols) * factor;
    std::vector<double> out(static_cast<std::size_t>(out_rows * out_cols) * channels);
    for (long r = 0; r < out_rows; ++r) {
        for (long c = 0; c < out_cols; ++c) {
            std::span<double> dst(out.data() + (static_cast<std::size_t>(r * out_cols + c)) * channels,
                                  static_cast<std::size_t>(channels));
            bilinear_at_index(src, rows, cols, channels, r, c, factor, dst);
        }
    }
    return out;
}

MaskRaster upsample_raster(const MaskRaster& raster, int factor) {
    MaskRaster out(raster.h * factor, raster.w * factor,
                   bilinear_upsample(raster.values, raster.h, raster.w, 1, factor));
    out.threshold = raster.threshold;
    return out;
}

UpsampleResult upsample_coefficients(const CoefficientField& coeffs, int scale) {
    const int factor = scale_multiplier(scale);
    if (coeffs.is_global()) return {coeffs, true};
    if (factor == 1) return {coeffs, false};
    const long rows = static_cast<long>(coeffs.h()) * factor;
    const long cols = static_cast<long>(coeffs.w()) * factor;
    if (static_cast<std::size_t>(rows * cols) > kMaxGridPoints) {
        throw std::invalid_argument("upsampler: upsampled field exceeds the maximum of 2^26 points");
    }
    std::vector<double> values = bilinear_upsample(coeffs.values(), coeffs.h(), coeffs.w(),
                                                   static_cast<int>(coeffs.width()), factor);
    return {CoefficientField::per_pixel(coeffs.max_frequency(), static_cast<int>(rows),
                                        static_cast<int>(cols), std::move(values)),
            false};
}

MaskRaster super_resolve(const CoefficientField& coeffs, int h, int w, int scale) {
    if (coeffs.is_global()) return reconstruct(coeffs, h, w, scale);
    if (coeffs.h() != h || coeffs.w() != w) {
        throw std::invalid_argument("upsampler: per-pixel field is " + std::to_string(coeffs.h()) + "x" +
                                    std::to_string(coeffs.w()) + ", requested base " +
                                    std::to_string(h) + "x" + std::to_string(w));
    }
    const CoordinateGrid grid = make_grid(h, w, scale);
    return evaluate_mask(grid, upsample_coefficients(coeffs, scale).field);
}

double boundary_variation(const MaskRaster& raster, int multiplier) {
    if (multiplier < 1) throw std::invalid_argument("upsampler: multiplier must be >= 1");
    const MaskRaster bin = raster.binarized();
    long changes = 0;
    for (int i = 0; i < bin.h; ++i) {
        for (int j = 0; j < bin.w; ++j) {
            if (j + 1 < bin.w && bin.at(i, j) != bin.at(i, j + 1)) ++changes;
            if (i + 1 < bin.h && bin.at(i, j) != bin.at(i + 1, j)) ++changes;
        }
    }
    return static_cast<double>(changes) / multiplier;
}

}  // namespace fouriermask
