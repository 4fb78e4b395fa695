#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "fouriermask/codec.hpp"
#include "fouriermask/fitter.hpp"
#include "fouriermask/lattice.hpp"
#include "fouriermask/renderer.hpp"
#include "fouriermask/siren.hpp"

namespace fouriermask {

using Json = nlohmann::ordered_json;

/// {"f": int, "entries": [[u, v], ...]}
Json lattice_to_json(const FrequencyLattice& lattice);

/// {"mode": "global"|"per-pixel", "f", "h", "w", "values"}; values row-major
/// over pixels, cosine block before sine block in each slice. Global fields
/// write h = w = 0.
Json coefficients_to_json(const CoefficientField& coeffs);
CoefficientField coefficients_from_json(const Json& doc);

/// {"dims": [...], "seed": int, "layers": [{"weight": [...], "bias": [...]}]},
/// weights row-major (out x in).
Json siren_to_json(const SirenParams& params);
SirenParams siren_from_json(const Json& doc);

/// "f,mean_loss,n_masks" header, one row per f'.
std::string spectrum_csv(const SpectrumReport& report);
Json spectrum_to_json(const SpectrumReport& report);

/// "step,i,j,score"
std::string trace_csv(const std::vector<RefinementTrace>& trace);

/// "step,loss_y,loss_yprime"
std::string history_csv(const std::vector<LossRecord>& history);

/// Directory with coefficients.json, mlp.json (if any), history.csv and result.json.
void save_fit_result(const FitResult& result, const std::filesystem::path& dir);
FitResult load_fit_result(const std::filesystem::path& dir);

/// Shortest round-trip decimal form of a double.
std::string format_double(double value);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace fouriermask
