#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fouriermask/fourier.hpp"

namespace fouriermask {

enum class MaskFormat { pgm, textgrid, rle_json };

struct MaskFile {
    std::filesystem::path path;
    /// Path relative to the dataset root, '/'-separated.
    std::string relative;
    MaskFormat format = MaskFormat::pgm;
};

/// .pgm, .txt, .rle.json; throws on anything else.
MaskFormat format_from_path(const std::filesystem::path& path);
bool is_mask_path(const std::filesystem::path& path);

/// pgm (P2 or P5): value / maxval. textgrid: whitespace-separated 0/1 rows.
/// rle-json: {"h", "w", "counts"} with alternating 0/1 runs, column-major,
/// starting with a 0-run.
MaskRaster load_mask(const std::filesystem::path& path);

/// With `binarize`, applies the raster threshold first. pgm stores soft values
/// as round-half-up(255 * v); textgrid and rle-json need binary values.
void save_mask(const MaskRaster& raster, const std::filesystem::path& path, bool binarize);

/// Recognized mask files under `dir` (recursive), ordered by the byte-wise
/// comparison of their relative paths.
std::vector<MaskFile> iter_dataset(const std::filesystem::path& dir);

/// Column-major alternating run lengths of a binary raster, first run zeros.
std::vector<long long> rle_counts(const MaskRaster& raster);

}  // namespace fouriermask
