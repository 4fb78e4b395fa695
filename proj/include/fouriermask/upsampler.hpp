#pragma once

#include <span>
#include <vector>

#include "fouriermask/fourier.hpp"

namespace fouriermask {

// Bilinear convention shared by coefficient fields and rasters: fine index r at
// integer factor k samples source position r / k, clamped at the last source
// row/column. Fine index i * k lands exactly on source sample i.

/// Bilinear value of a row-major multi-channel grid at fine index (r, c) for factor k.
void bilinear_at_index(std::span<const double> src, int rows, int cols, int channels, long r,
                       long c, int factor, std::span<double> out);

/// Bilinear value at a fractional source position (row, col), clamped to the grid.
void bilinear_at(std::span<const double> src, int rows, int cols, int channels, double row,
                 double col, std::span<double> out);

/// Upsamples every channel by an integer factor (rows * k, cols * k).
std::vector<double> bilinear_upsample(std::span<const double> src, int rows, int cols,
                                      int channels, int factor);

MaskRaster upsample_raster(const MaskRaster& raster, int factor);

struct UpsampleResult {
    CoefficientField field;
    /// Set when a global field was passed; the field is returned unchanged.
    bool skipped_global = false;
};

/// Per-pixel field upsampled by 2^(s-1) in both spatial dimensions.
UpsampleResult upsample_coefficients(const CoefficientField& coeffs, int scale);

/// (h * 2^(s-1)) x (w * 2^(s-1)) raster. Global fields are evaluated directly
/// on the finer grid; per-pixel fields (which must be h x w) are upsampled first.
MaskRaster super_resolve(const CoefficientField& coeffs, int h, int w, int scale);

/// Count of 4-neighbour label changes in the binarized raster, divided by the
/// resolution multiplier so rasters of one shape at different scales compare
/// in base-pixel units.
double boundary_variation(const MaskRaster& raster, int multiplier);

}  // namespace fouriermask
