#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fouriermask/fourier.hpp"

namespace fouriermask {

struct EncoderConfig {
    int max_frequency = 12;
    /// Logit amplitude: the mask is projected as alpha * (2 * mask - 1).
    double alpha = 8.0;
};

/// Throws unless f < min(h, w) / 2.
void check_nyquist(int max_frequency, int h, int w);

/// L2-optimal projection of the logit target onto the lattice basis over the
/// s = 1 grid, computed with a 2D FFT. Returns a global field.
CoefficientField encode_mask(const MaskRaster& mask, const EncoderConfig& config);

/// Keeps amplitudes with band <= target_frequency, re-indexed onto the smaller lattice.
CoefficientField truncate(const CoefficientField& coeffs, int target_frequency);

/// Synthesized mask on the (h, w, s) grid. Per-pixel fields must already match
/// the grid resolution; see super_resolve for upsampling.
MaskRaster reconstruct(const CoefficientField& coeffs, int h, int w, int scale = 1);

struct NamedMask {
    std::string name;
    MaskRaster mask;
};

struct SpectrumRow {
    int frequency = 0;
    double mean_loss = 0.0;
    std::size_t n_masks = 0;
};

struct SpectrumReport {
    std::vector<SpectrumRow> rows;
    /// Mask names in processing order, and loss[mask][f'] for each.
    std::vector<std::string> names;
    std::vector<std::vector<double>> per_mask_loss;
};

struct SpectrumOptions {
    int max_frequency = 12;
    double alpha = 8.0;
    /// Worker threads for per-mask work. 0 picks hardware concurrency.
    unsigned threads = 1;
};

/// Encodes each mask at f_max, truncates to every f' in 0..f_max, reconstructs
/// and averages iou_loss over the dataset. Masks are processed in ascending
/// byte order of their names; the reduction order does not depend on threads.
SpectrumReport spectrum_analysis(std::vector<NamedMask> masks, const SpectrumOptions& options);

/// Same, loading every recognized mask file under `dir`.
SpectrumReport spectrum_analysis(const std::filesystem::path& dir, const SpectrumOptions& options);

}  // namespace fouriermask
