#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "fouriermask/codec.hpp"
#include "fouriermask/fitter.hpp"
#include "fouriermask/lattice.hpp"
#include "fouriermask/maskio.hpp"
#include "fouriermask/renderer.hpp"
#include "fouriermask/serialize.hpp"
#include "fouriermask/upsampler.hpp"

namespace fs = std::filesystem;
using namespace fouriermask;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Flag combinations that only show up as wrong after parsing.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

unsigned worker_threads() {
    const char* env = std::getenv("FMK_THREADS");
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (env == nullptr || *env == '\0') return hw;
    std::size_t used = 0;
    unsigned long n = 0;
    try {
        n = std::stoul(env, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != std::string(env).size() || n == 0) {
        throw UsageError(std::string("FMK_THREADS must be a positive integer, got '") + env + "'");
    }
    return static_cast<unsigned>(n);
}

fs::path manifest_path_for(const fs::path& out) { return fs::path(out.string() + ".manifest.json"); }

void write_manifest(const fs::path& path, const std::string& command, const Json& args, const Json& outputs) {
    Json doc;
    doc["command"] = command;
    doc["args"] = args;
    doc["outputs"] = outputs;
    write_text_file(path, doc.dump(2) + "\n");
}

std::string name_of(const fs::path& p) { return p.filename().string(); }

bool is_fit_dir(const fs::path& p) { return fs::is_directory(p); }

struct Options {
    // lattice
    int lattice_f = 0;
    // shared
    std::string in;
    std::string out;
    int f = 12;
    double alpha = 8.0;
    int h = 0;
    int w = 0;
    int s = 1;
    bool binarize = false;
    // spectrum
    std::string dataset;
    int fmax = 12;
    // fit
    std::string target;
    std::string mode = "global";
    bool mlp = false;
    std::vector<int> hidden = kDefaultHiddenDims;
    int steps = 3000;
    double lr = 1.0;
    std::string optimizer = "plain-gd";
    std::uint64_t seed = 0;
    // render
    int render_steps = 3;
    int points = 784;
    std::string source = "exact-implicit";
    std::string trace;
};

int cmd_lattice(const Options& o) {
    const FrequencyLattice lattice(o.lattice_f);
    Json doc = lattice_to_json(lattice);
    doc["c"] = lattice.size();
    std::cout << doc.dump() << "\n";
    return 0;
}

int cmd_encode(const Options& o) {
    const MaskRaster mask = load_mask(o.in);
    const CoefficientField w = encode_mask(mask, EncoderConfig{o.f, o.alpha});
    write_text_file(o.out, coefficients_to_json(w).dump() + "\n");
    write_manifest(manifest_path_for(o.out), "encode",
                   {{"in", o.in}, {"f", o.f}, {"alpha", o.alpha}, {"out", o.out}},
                   Json::array({name_of(o.out)}));
    return 0;
}

// Global fields carry no resolution, so --h/--w are required for them.
std::pair<int, int> resolution_for(const CoefficientField& w, const Options& o) {
    if (w.is_global()) {
        if (o.h < 1 || o.w < 1) throw UsageError("a global coefficient field needs --h and --w");
        return {o.h, o.w};
    }
    if ((o.h != 0 && o.h != w.h()) || (o.w != 0 && o.w != w.w())) {
        throw UsageError("--h/--w do not match the per-pixel field (" + std::to_string(w.h()) + "x" +
                         std::to_string(w.w()) + ")");
    }
    return {w.h(), w.w()};
}

int cmd_decode(const Options& o) {
    const CoefficientField w = coefficients_from_json(read_json_file(o.in));
    const auto [h, wd] = resolution_for(w, o);
    if (!w.is_global() && o.s != 1) throw UsageError("decode evaluates per-pixel fields at --s 1 only; use upscale");
    save_mask(reconstruct(w, h, wd, o.s), o.out, o.binarize);
    write_manifest(manifest_path_for(o.out), "decode",
                   {{"in", o.in}, {"h", h}, {"w", wd}, {"s", o.s}, {"binarize", o.binarize}, {"out", o.out}},
                   Json::array({name_of(o.out)}));
    return 0;
}

int cmd_spectrum(const Options& o) {
    SpectrumOptions opts;
    opts.max_frequency = o.fmax;
    opts.alpha = o.alpha;
    opts.threads = worker_threads();
    const SpectrumReport report = spectrum_analysis(fs::path(o.dataset), opts);
    fs::path json_out = fs::path(o.out).replace_extension(".json");
    if (json_out == fs::path(o.out)) json_out += ".json";
    write_text_file(o.out, spectrum_csv(report));
    write_text_file(json_out, spectrum_to_json(report).dump(2) + "\n");
    write_manifest(manifest_path_for(o.out), "spectrum",
                   {{"dataset", o.dataset}, {"fmax", o.fmax}, {"alpha", o.alpha}, {"out", o.out}},
                   Json::array({name_of(o.out), name_of(json_out)}));
    return 0;
}

int cmd_fit(const Options& o) {
    FitConfig c;
    c.mode = o.mode == "global" ? CoefficientMode::global : CoefficientMode::per_pixel;
    c.max_frequency = o.f;
    c.use_mlp = o.mlp;
    c.hidden_dims = o.hidden;
    c.steps = o.steps;
    c.learning_rate = o.lr;
    c.optimizer = o.optimizer == "plain-gd" ? OptimizerKind::plain_gd : OptimizerKind::adaptive_moments;
    c.seed = o.seed;
    const FitResult result = fit_mask(load_mask(o.target), c);
    save_fit_result(result, o.out);

    Json outputs = Json::array({"coefficients.json", "history.csv", "result.json"});
    if (result.mlp) outputs.push_back("mlp.json");
    write_manifest(fs::path(o.out) / "manifest.json", "fit",
                   {{"target", o.target},
                    {"mode", o.mode},
                    {"f", o.f},
                    {"mlp", o.mlp},
                    {"hidden", o.hidden},
                    {"steps", o.steps},
                    {"lr", o.lr},
                    {"optimizer", o.optimizer},
                    {"seed", o.seed},
                    {"out", o.out}},
                   outputs);
    return 0;
}

int cmd_upscale(const Options& o) {
    MaskRaster out(0, 0);
    Json args = {{"in", o.in}, {"s", o.s}};
    if (is_fit_dir(o.in)) {
        out = predict(load_fit_result(o.in), o.s);
    } else {
        const CoefficientField w = coefficients_from_json(read_json_file(o.in));
        const auto [h, wd] = resolution_for(w, o);
        args["h"] = h;
        args["w"] = wd;
        out = super_resolve(w, h, wd, o.s);
    }
    args["binarize"] = o.binarize;
    args["out"] = o.out;
    save_mask(out, o.out, o.binarize);
    write_manifest(manifest_path_for(o.out), "upscale", args, Json::array({name_of(o.out)}));
    return 0;
}

int cmd_render(const Options& o) {
    if (!is_fit_dir(o.in)) throw std::runtime_error("render: " + o.in + " is not a fit directory");
    const FitResult fit = load_fit_result(o.in);
    RefinementConfig c;
    c.steps = o.render_steps;
    c.points_per_step = o.points;
    c.source = o.source == "mlp" ? PointSource::mlp : PointSource::exact_implicit;
    if (c.source == PointSource::mlp && !fit.mlp) {
        throw std::runtime_error("render: --source mlp needs a fit directory trained with --mlp");
    }
    std::vector<RefinementTrace> trace;
    const MaskRaster out = subdivision_refine(fit.coeffs, fit.mlp ? &*fit.mlp : nullptr, fit.h, fit.w, c,
                                              o.trace.empty() ? nullptr : &trace);
    save_mask(out, o.out, o.binarize);
    Json outputs = Json::array({name_of(o.out)});
    if (!o.trace.empty()) {
        write_text_file(o.trace, trace_csv(trace));
        outputs.push_back(name_of(o.trace));
    }
    write_manifest(manifest_path_for(o.out), "render",
                   {{"in", o.in},
                    {"steps", o.render_steps},
                    {"points", o.points},
                    {"source", o.source},
                    {"binarize", o.binarize},
                    {"trace", o.trace},
                    {"out", o.out}},
                   outputs);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fmk: Fourier mask encoding, fitting, super-resolution and rendering"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);
    Options o;

    auto* lattice = app.add_subcommand("lattice", "Print the frequency lattice for --f as JSON");
    lattice->add_option("--f", o.lattice_f, "Maximum frequency")->required()->check(CLI::NonNegativeNumber);

    auto* encode = app.add_subcommand("encode", "Project a mask onto the Fourier basis");
    encode->add_option("--in", o.in, "Input mask (.pgm, .txt, .rle.json)")->required();
    encode->add_option("--f", o.f, "Maximum frequency")->capture_default_str()->check(CLI::NonNegativeNumber);
    encode->add_option("--alpha", o.alpha, "Logit amplitude")->capture_default_str()->check(CLI::PositiveNumber);
    encode->add_option("--out", o.out, "Output coefficient JSON")->required();

    auto* decode = app.add_subcommand("decode", "Synthesize a mask from coefficients");
    decode->add_option("--in", o.in, "Coefficient JSON")->required();
    decode->add_option("--h", o.h, "Rows at s=1 (required for global fields)")->check(CLI::PositiveNumber);
    decode->add_option("--w", o.w, "Columns at s=1 (required for global fields)")->check(CLI::PositiveNumber);
    decode->add_option("--s", o.s, "Scale; resolution multiplier 2^(s-1)")->capture_default_str()->check(CLI::Range(1, 27));
    decode->add_option("--out", o.out, "Output mask (.pgm, .txt, .rle.json)")->required();
    decode->add_flag("--binarize", o.binarize, "Threshold at 0.5 before writing");

    auto* spectrum = app.add_subcommand("spectrum", "Mean reconstruction loss per frequency over a dataset");
    spectrum->add_option("--dataset", o.dataset, "Directory of masks (searched recursively)")->required();
    spectrum->add_option("--fmax", o.fmax, "Largest frequency")->capture_default_str()->check(CLI::NonNegativeNumber);
    spectrum->add_option("--alpha", o.alpha, "Logit amplitude")->capture_default_str()->check(CLI::PositiveNumber);
    spectrum->add_option("--out", o.out, "Output CSV; a JSON report is written beside it")->required();

    auto* fit = app.add_subcommand("fit", "Fit coefficients (and optionally an MLP) to a mask");
    fit->add_option("--target", o.target, "Binary target mask")->required();
    fit->add_option("--mode", o.mode, "global or per-pixel")->capture_default_str()->check(CLI::IsMember({"global", "per-pixel"}));
    fit->add_option("--f", o.f, "Maximum frequency")->capture_default_str()->check(CLI::NonNegativeNumber);
    fit->add_flag("--mlp", o.mlp, "Also train the MLP branch");
    fit->add_option("--hidden", o.hidden, "MLP hidden widths")->capture_default_str()->check(CLI::PositiveNumber)->delimiter(',');
    fit->add_option("--steps", o.steps, "Optimizer steps")->capture_default_str()->check(CLI::PositiveNumber);
    fit->add_option("--lr", o.lr, "Learning rate")->capture_default_str()->check(CLI::PositiveNumber);
    fit->add_option("--optimizer", o.optimizer, "plain-gd or adaptive-moments")->capture_default_str()->check(CLI::IsMember({"plain-gd", "adaptive-moments"}));
    fit->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    fit->add_option("--out", o.out, "Output directory")->required();

    auto* upscale = app.add_subcommand("upscale", "Super-resolve coefficients or a fit directory");
    upscale->add_option("--in", o.in, "Coefficient JSON or fit directory")->required();
    upscale->add_option("--s", o.s, "Scale; resolution multiplier 2^(s-1)")->capture_default_str()->check(CLI::Range(1, 27));
    upscale->add_option("--h", o.h, "Rows at s=1 (global coefficient JSON only)")->check(CLI::PositiveNumber);
    upscale->add_option("--w", o.w, "Columns at s=1 (global coefficient JSON only)")->check(CLI::PositiveNumber);
    upscale->add_option("--out", o.out, "Output mask")->required();
    upscale->add_flag("--binarize", o.binarize, "Threshold at 0.5 before writing");

    auto* render = app.add_subcommand("render", "Subdivision refinement of a fitted mask");
    render->add_option("--in", o.in, "Fit directory")->required();
    render->add_option("--steps", o.render_steps, "Subdivision steps")->capture_default_str()->check(CLI::NonNegativeNumber);
    render->add_option("--points", o.points, "Points re-evaluated per step")->capture_default_str()->check(CLI::PositiveNumber);
    render->add_option("--source", o.source, "exact-implicit or mlp")->capture_default_str()->check(CLI::IsMember({"exact-implicit", "mlp"}));
    render->add_option("--out", o.out, "Output mask")->required();
    render->add_option("--trace", o.trace, "Optional CSV of selected points");
    render->add_flag("--binarize", o.binarize, "Threshold at 0.5 before writing");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitUsage;
    }

    const auto* sub = app.get_subcommands().front();
    try {
        if (sub == lattice) return cmd_lattice(o);
        if (sub == encode) return cmd_encode(o);
        if (sub == decode) return cmd_decode(o);
        if (sub == spectrum) return cmd_spectrum(o);
        if (sub == fit) return cmd_fit(o);
        if (sub == upscale) return cmd_upscale(o);
        if (sub == render) return cmd_render(o);
    } catch (const UsageError& e) {
        std::cerr << "fmk " << sub->get_name() << ": " << e.what() << "\n" << sub->help();
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "fmk " << sub->get_name() << ": " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
