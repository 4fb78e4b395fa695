#include "fouriermask/maskio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace fouriermask {

namespace fs = std::filesystem;

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("maskio: cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Next whitespace-delimited header token, skipping '#' comments.
std::string pgm_token(const std::string& data, std::size_t& pos) {
    for (;;) {
        while (pos < data.size() && std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
        if (pos < data.size() && data[pos] == '#') {
            while (pos < data.size() && data[pos] != '\n') ++pos;
            continue;
        }
        break;
    }
    const std::size_t start = pos;
    while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
    if (start == pos) throw std::runtime_error("maskio: truncated pgm header");
    return data.substr(start, pos - start);
}

int parse_positive(const std::string& token, const char* what) {
    std::size_t used = 0;
    long value = 0;
    try {
        value = std::stol(token, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != token.size() || value < 1 || value > (1L << 30)) {
        throw std::runtime_error(std::string("maskio: malformed pgm ") + what + " '" + token + "'");
    }
    return static_cast<int>(value);
}

MaskRaster load_pgm(const fs::path& path) {
    const std::string data = read_file(path);
    std::size_t pos = 0;
    const std::string magic = pgm_token(data, pos);
    if (magic != "P2" && magic != "P5") throw std::runtime_error("maskio: not a pgm file: " + path.string());
    const int w = parse_positive(pgm_token(data, pos), "width");
    const int h = parse_positive(pgm_token(data, pos), "height");
    const int maxval = parse_positive(pgm_token(data, pos), "maxval");
    if (maxval > 65535) throw std::runtime_error("maskio: pgm maxval out of range");

    MaskRaster raster(h, w);
    const std::size_t n = raster.size();
    if (magic == "P2") {
        for (std::size_t i = 0; i < n; ++i) {
            const std::string tok = pgm_token(data, pos);
            std::size_t used = 0;
            long v = -1;
            try {
                v = std::stol(tok, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != tok.size() || v < 0 || v > maxval) {
                throw std::runtime_error("maskio: bad pgm sample '" + tok + "'");
            }
            raster.values[i] = static_cast<double>(v) / maxval;
        }
        return raster;
    }
    ++pos;  // single whitespace byte after maxval
    const std::size_t bytes = maxval < 256 ? 1 : 2;
    if (pos + n * bytes > data.size()) throw std::runtime_error("maskio: truncated pgm raster");
    for (std::size_t i = 0; i < n; ++i) {
        unsigned v = static_cast<unsigned char>(data[pos + i * bytes]);
        if (bytes == 2) v = (v << 8) | static_cast<unsigned char>(data[pos + i * bytes + 1]);
        if (v > static_cast<unsigned>(maxval)) throw std::runtime_error("maskio: pgm sample exceeds maxval");
        raster.values[i] = static_cast<double>(v) / maxval;
    }
    return raster;
}

MaskRaster load_textgrid(const fs::path& path) {
    std::istringstream in(read_file(path));
    std::vector<double> values;
    int h = 0;
    int w = -1;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream row(line);
        std::string tok;
        int count = 0;
        while (row >> tok) {
            if (tok == "0") {
                values.push_back(0.0);
            } else if (tok == "1") {
                values.push_back(1.0);
            } else {
                throw std::runtime_error("maskio: non-binary textgrid token '" + tok + "'");
            }
            ++count;
        }
        if (count == 0) continue;
        if (w >= 0 && count != w) throw std::runtime_error("maskio: ragged textgrid row");
        w = count;
        ++h;
    }
    if (h == 0) throw std::runtime_error("maskio: empty textgrid");
    return MaskRaster(h, w, std::move(values));
}

MaskRaster load_rle(const fs::path& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("maskio: malformed rle json: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("h") || !doc.contains("w") || !doc.contains("counts") ||
        !doc["h"].is_number_integer() || !doc["w"].is_number_integer() || !doc["counts"].is_array()) {
        throw std::runtime_error("maskio: rle json needs integer h, w and a counts array");
    }
    const long long h = doc["h"].get<long long>();
    const long long w = doc["w"].get<long long>();
    if (h < 1 || w < 1 || h > (1LL << 30) || w > (1LL << 30)) throw std::runtime_error("maskio: bad rle dimensions");
    const long long n = h * w;
    MaskRaster raster(static_cast<int>(h), static_cast<int>(w));
    long long filled = 0;
    double value = 0.0;
    for (const auto& c : doc["counts"]) {
        if (!c.is_number_integer() || c.get<long long>() < 0) throw std::runtime_error("maskio: bad rle count");
        const long long run = c.get<long long>();
        if (filled + run > n) throw std::runtime_error("maskio: rle counts exceed h*w");
        for (long long k = filled; k < filled + run; ++k) {
            // column-major index k -> (k % h, k / h)
            raster.at(static_cast<int>(k % h), static_cast<int>(k / h)) = value;
        }
        filled += run;
        value = 1.0 - value;
    }
    if (filled != n) {
        throw std::runtime_error("maskio: rle counts sum to " + std::to_string(filled) + ", expected " +
                                 std::to_string(n));
    }
    return raster;
}

void write_file(const fs::path& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("maskio: cannot write " + path.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw std::runtime_error("maskio: write failed for " + path.string());
}

void require_binary(const MaskRaster& raster, const char* format) {
    if (!raster.is_binary()) {
        throw std::invalid_argument(std::string("maskio: ") + format +
                                    " stores binary masks only; save with binarize");
    }
}

}  // namespace

MaskFormat format_from_path(const fs::path& path) {
    const std::string name = path.filename().string();
    if (ends_with(name, ".rle.json")) return MaskFormat::rle_json;
    if (ends_with(name, ".pgm")) return MaskFormat::pgm;
    if (ends_with(name, ".txt")) return MaskFormat::textgrid;
    throw std::invalid_argument("maskio: unrecognized mask extension: " + path.string());
}

bool is_mask_path(const fs::path& path) {
    const std::string name = path.filename().string();
    return ends_with(name, ".rle.json") || ends_with(name, ".pgm") || ends_with(name, ".txt");
}

MaskRaster load_mask(const fs::path& path) {
    switch (format_from_path(path)) {
        case MaskFormat::pgm: return load_pgm(path);
        case MaskFormat::textgrid: return load_textgrid(path);
        case MaskFormat::rle_json: return load_rle(path);
    }
    throw std::logic_error("maskio: unreachable");
}

std::vector<long long> rle_counts(const MaskRaster& raster) {
    std::vector<long long> counts;
    double current = 0.0;
    long long run = 0;
    for (int j = 0; j < raster.w; ++j) {
        for (int i = 0; i < raster.h; ++i) {
            const double v = raster.at(i, j);
            if (v == current) {
                ++run;
            } else {
                counts.push_back(run);
                current = v;
                run = 1;
            }
        }
    }
    counts.push_back(run);
    return counts;
}

void save_mask(const MaskRaster& raster, const fs::path& path, bool binarize) {
    if (raster.h < 1 || raster.w < 1 || raster.size() == 0) {
        throw std::invalid_argument("maskio: refusing to write an empty raster");
    }
    const MaskFormat format = format_from_path(path);
    const MaskRaster data = binarize ? raster.binarized() : raster;

    switch (format) {
        case MaskFormat::pgm: {
            std::string out = "P5\n" + std::to_string(data.w) + " " + std::to_string(data.h) + "\n255\n";
            out.reserve(out.size() + data.size());
            for (double v : data.values) {
                const double scaled = std::floor(std::clamp(v, 0.0, 1.0) * 255.0 + 0.5);
                out.push_back(static_cast<char>(static_cast<unsigned char>(scaled)));
            }
            write_file(path, out);
            return;
        }
        case MaskFormat::textgrid: {
            require_binary(data, "textgrid");
            std::string out;
            out.reserve(data.size() * 2);
            for (int i = 0; i < data.h; ++i) {
                for (int j = 0; j < data.w; ++j) {
                    if (j > 0) out.push_back(' ');
                    out.push_back(data.at(i, j) == 1.0 ? '1' : '0');
                }
                out.push_back('\n');
            }
            write_file(path, out);
            return;
        }
        case MaskFormat::rle_json: {
            require_binary(data, "rle-json");
            nlohmann::ordered_json doc;
            doc["h"] = data.h;
            doc["w"] = data.w;
            doc["counts"] = rle_counts(data);
            write_file(path, doc.dump() + "\n");
            return;
        }
    }
}

std::vector<MaskFile> iter_dataset(const fs::path& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw std::runtime_error("maskio: not a readable directory: " + dir.string());
    std::vector<MaskFile> files;
    fs::recursive_directory_iterator it(dir, ec);
    if (ec) throw std::runtime_error("maskio: cannot read directory " + dir.string() + ": " + ec.message());
    for (const auto& entry : it) {
        if (!entry.is_regular_file() || !is_mask_path(entry.path())) continue;
        MaskFile file;
        file.path = entry.path();
        file.relative = entry.path().lexically_relative(dir).generic_string();
        file.format = format_from_path(entry.path());
        files.push_back(std::move(file));
    }
    // std::string comparison is byte-wise (char_traits compares as unsigned char).
    std::sort(files.begin(), files.end(),
              [](const MaskFile& a, const MaskFile& b) { return a.relative < b.relative; });
    return files;
}

}  // namespace fouriermask
