#include "fouriermask/serialize.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fouriermask {

namespace fs = std::filesystem;

namespace {

template <typename T>
T require(const Json& doc, const char* key) {
    if (!doc.is_object() || !doc.contains(key)) {
        throw std::runtime_error(std::string("json: missing field '") + key + "'");
    }
    try {
        return doc.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("json: bad field '") + key + "': " + e.what());
    }
}

std::vector<double> parse_history_row(const std::string& line) {
    std::vector<double> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(std::stod(cell));
    return out;
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

Json lattice_to_json(const FrequencyLattice& lattice) {
    Json doc;
    doc["f"] = lattice.max_frequency();
    Json entries = Json::array();
    for (const Frequency& fq : lattice.entries()) entries.push_back({fq.u, fq.v});
    doc["entries"] = std::move(entries);
    return doc;
}

Json coefficients_to_json(const CoefficientField& coeffs) {
    Json doc;
    doc["mode"] = coeffs.is_global() ? "global" : "per-pixel";
    doc["f"] = coeffs.max_frequency();
    doc["h"] = coeffs.h();
    doc["w"] = coeffs.w();
    doc["values"] = coeffs.values();
    return doc;
}

CoefficientField coefficients_from_json(const Json& doc) {
    const auto mode = require<std::string>(doc, "mode");
    const int f = require<int>(doc, "f");
    if (f < 0) throw std::runtime_error("json: coefficient field has negative f");
    auto values = require<std::vector<double>>(doc, "values");
    if (mode == "global") return CoefficientField::global(f, std::move(values));
    if (mode == "per-pixel") {
        return CoefficientField::per_pixel(f, require<int>(doc, "h"), require<int>(doc, "w"), std::move(values));
    }
    throw std::runtime_error("json: unknown coefficient mode '" + mode + "'");
}

Json siren_to_json(const SirenParams& params) {
    Json doc;
    doc["dims"] = params.dims;
    doc["seed"] = params.seed;
    Json layers = Json::array();
    for (const SirenLayer& layer : params.layers) {
        Json l;
        l["weight"] = std::vector<double>(layer.weight.data(), layer.weight.data() + layer.weight.size());
        l["bias"] = std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size());
        layers.push_back(std::move(l));
    }
    doc["layers"] = std::move(layers);
    return doc;
}

SirenParams siren_from_json(const Json& doc) {
    SirenParams params;
    params.dims = require<std::vector<int>>(doc, "dims");
    params.seed = require<std::uint64_t>(doc, "seed");
    if (!doc.contains("layers") || !doc["layers"].is_array()) throw std::runtime_error("json: siren needs layers");
    if (params.dims.size() != doc["layers"].size() + 1) throw std::runtime_error("json: siren dims/layers mismatch");
    std::size_t l = 0;
    for (const Json& layer : doc["layers"]) {
        const auto w = require<std::vector<double>>(layer, "weight");
        const auto b = require<std::vector<double>>(layer, "bias");
        const int out = params.dims[l + 1];
        const int in = params.dims[l];
        if (out < 1 || in < 1 || w.size() != static_cast<std::size_t>(out) * in || b.size() != static_cast<std::size_t>(out)) {
            throw std::runtime_error("json: siren layer " + std::to_string(l) + " has wrong size");
        }
        SirenLayer sl{Matrix(out, in), Eigen::VectorXd(out)};
        std::copy(w.begin(), w.end(), sl.weight.data());
        std::copy(b.begin(), b.end(), sl.bias.data());
        params.layers.push_back(std::move(sl));
        ++l;
    }
    params.validate();
    return params;
}

std::string spectrum_csv(const SpectrumReport& report) {
    std::string out = "f,mean_loss,n_masks\n";
    for (const SpectrumRow& row : report.rows) {
        out += std::to_string(row.frequency) + "," + format_double(row.mean_loss) + "," +
               std::to_string(row.n_masks) + "\n";
    }
    return out;
}

Json spectrum_to_json(const SpectrumReport& report) {
    Json doc;
    Json rows = Json::array();
    for (const SpectrumRow& row : report.rows) {
        rows.push_back({{"f", row.frequency}, {"mean_loss", row.mean_loss}, {"n_masks", row.n_masks}});
    }
    doc["rows"] = std::move(rows);
    Json masks = Json::array();
    for (std::size_t i = 0; i < report.names.size(); ++i) {
        masks.push_back({{"name", report.names[i]}, {"loss", report.per_mask_loss[i]}});
    }
    doc["masks"] = std::move(masks);
    return doc;
}

std::string trace_csv(const std::vector<RefinementTrace>& trace) {
    std::string out = "step,i,j,score\n";
    for (const auto& t : trace) {
        out += std::to_string(t.step) + "," + std::to_string(t.i) + "," + std::to_string(t.j) + "," +
               format_double(t.score) + "\n";
    }
    return out;
}

std::string history_csv(const std::vector<LossRecord>& history) {
    std::string out = "step,loss_y,loss_yprime\n";
    for (const auto& r : history) {
        out += std::to_string(r.step) + "," + format_double(r.loss_y) + "," + format_double(r.loss_yprime) + "\n";
    }
    return out;
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

Json read_json_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("malformed json in " + path.string() + ": " + e.what());
    }
}

void save_fit_result(const FitResult& result, const fs::path& dir) {
    fs::create_directories(dir);
    write_text_file(dir / "coefficients.json", coefficients_to_json(result.coeffs).dump() + "\n");
    if (result.mlp) {
        write_text_file(dir / "mlp.json", siren_to_json(*result.mlp).dump() + "\n");
    } else {
        fs::remove(dir / "mlp.json");
    }
    write_text_file(dir / "history.csv", history_csv(result.loss_history));
    Json meta;
    meta["h"] = result.h;
    meta["w"] = result.w;
    meta["final_iou"] = result.final_iou;
    meta["use_mlp"] = result.mlp.has_value();
    write_text_file(dir / "result.json", meta.dump(2) + "\n");
}

FitResult load_fit_result(const fs::path& dir) {
    FitResult result;
    const Json meta = read_json_file(dir / "result.json");
    result.h = require<int>(meta, "h");
    result.w = require<int>(meta, "w");
    result.final_iou = require<double>(meta, "final_iou");
    result.coeffs = coefficients_from_json(read_json_file(dir / "coefficients.json"));
    if (fs::exists(dir / "mlp.json")) result.mlp = siren_from_json(read_json_file(dir / "mlp.json"));

    std::ifstream in(dir / "history.csv");
    if (!in) throw std::runtime_error("cannot open " + (dir / "history.csv").string());
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = parse_history_row(line);
        if (cells.size() != 3) throw std::runtime_error("history.csv: malformed row '" + line + "'");
        result.loss_history.push_back({static_cast<int>(cells[0]), cells[1], cells[2]});
    }
    return result;
}

}  // namespace fouriermask
