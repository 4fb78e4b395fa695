// Acceptance suite. `acceptance` runs every criterion; `acceptance N` runs one.
// Prints one PASS/FAIL line per criterion; exit status is the failure count.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "fouriermask/codec.hpp"
#include "fouriermask/fitter.hpp"
#include "fouriermask/lattice.hpp"
#include "fouriermask/maskio.hpp"
#include "fouriermask/metrics.hpp"
#include "fouriermask/renderer.hpp"
#include "fouriermask/siren.hpp"
#include "fouriermask/upsampler.hpp"
#include "support/oracles.hpp"

using namespace fouriermask;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double limit_seconds;
    std::function<Outcome()> run;
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

std::vector<NamedMask> suite_masks(int n) {
    const auto shapes = fmk_test::synthetic_suite();
    std::vector<NamedMask> masks;
    for (std::size_t k = 0; k < shapes.size(); ++k) {
        std::string name = std::to_string(k);
        name.insert(0, 2 - std::min<std::size_t>(2, name.size()), '0');
        masks.push_back({"shape_" + name, shapes[k].rasterize(n)});
    }
    return masks;
}

// 1
Outcome lattice_cardinality() {
    for (int f = 0; f <= 16; ++f) {
        const FrequencyLattice l(f);
        const auto brute = fmk_test::brute_force_lattice(f);
        const std::size_t formula = static_cast<std::size_t>((f + 1) * (2 * f + 1) - f);
        if (l.size() != formula || brute.size() != formula || coefficient_count(f) != formula) {
            return {false, "f=" + std::to_string(f) + ": lattice " + std::to_string(l.size()) + ", formula " +
                               std::to_string(formula) + ", enumeration " + std::to_string(brute.size())};
        }
        for (std::size_t k = 0; k < brute.size(); ++k) {
            if (l[k].u != brute[k].first || l[k].v != brute[k].second) {
                return {false, "f=" + std::to_string(f) + ": entry " + std::to_string(k) + " differs"};
            }
        }
    }
    return {true, "f=0..16 match formula and enumeration (c(16)=" + std::to_string(coefficient_count(16)) + ")"};
}

// 2
Outcome encoder_oracle() {
    std::mt19937_64 gen(77);
    double worst = 0.0;
    for (int trial = 0; trial < 25; ++trial) {
        const int h = 3 + static_cast<int>(gen() % 14);
        const int w = 3 + static_cast<int>(gen() % 14);
        const int fmax = std::min(7, (std::min(h, w) - 1) / 2);
        const int f = static_cast<int>(gen() % (fmax + 1));
        const MaskRaster m = fmk_test::random_binary(h, w, gen);
        const CoefficientField fft = encode_mask(m, EncoderConfig{f, 8.0});
        const std::vector<double> ls = fmk_test::least_squares_encode(m, f, 8.0);
        for (std::size_t k = 0; k < ls.size(); ++k) worst = std::max(worst, std::abs(fft.values()[k] - ls[k]));
    }
    return {worst < 1e-9, "25 masks, max |FFT - least squares| = " + fmt(worst) + " (< 1e-9)"};
}

SpectrumReport suite_spectrum() {
    SpectrumOptions opts;
    opts.max_frequency = 12;
    opts.threads = 0;
    return spectrum_analysis(suite_masks(64), opts);
}

// 3
Outcome spectrum_shape() {
    const SpectrumReport r = suite_spectrum();
    bool monotone = true;
    for (std::size_t k = 1; k < r.rows.size(); ++k) monotone = monotone && r.rows[k].mean_loss <= r.rows[k - 1].mean_loss;
    const double l4 = r.rows[4].mean_loss;
    const double l12 = r.rows[12].mean_loss;
    return {monotone && l12 < 0.5 * l4, std::string("mean loss ") + (monotone ? "non-increasing" : "NOT monotone") +
                                            " over f'=0..12; loss(12)=" + fmt(l12) + " vs 0.5*loss(4)=" + fmt(0.5 * l4)};
}

// 4
Outcome band_trend() {
    const SpectrumReport r = suite_spectrum();
    int violations = 0;
    std::map<std::string, int> masks;
    double worst = 0.0;
    for (std::size_t i = 0; i < r.names.size(); ++i) {
        const auto& loss = r.per_mask_loss[i];
        for (std::size_t f = 1; f < loss.size(); ++f) {
            if (loss[f] > loss[f - 1]) {
                ++violations;
                ++masks[r.names[i]];
                worst = std::max(worst, loss[f] - loss[f - 1]);
            }
        }
    }
    return {violations == 0, std::to_string(violations) + " IoU decreases across " + std::to_string(masks.size()) +
                                 " of 50 masks (largest IoU drop " + fmt(worst) + ")"};
}

CoefficientField random_field(int f, bool global, int h, int w, std::mt19937_64& gen) {
    CoefficientField field = global ? CoefficientField::global(f) : CoefficientField::per_pixel(f, h, w);
    std::uniform_real_distribution<double> d(-0.8, 0.8);
    for (double& v : field.values()) v = d(gen);
    return field;
}

std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& fn,
                                     const std::vector<double>& x) {
    std::vector<double> out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = fmk_test::central_difference(fn, x, k, 1e-5);
    return out;
}

double weighted_sum(const std::vector<double>& up, const std::vector<double>& y) {
    double acc = 0.0;
    for (std::size_t r = 0; r < y.size(); ++r) acc += up[r] * y[r];
    return acc;
}

// 5
Outcome gradient_suites() {
    std::mt19937_64 gen(5150);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    double synth = 0.0;
    double iou = 0.0;
    double siren = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        // synthesis_gradient
        const int f = static_cast<int>(gen() % 4);
        const int h = 2 * f + 1 + static_cast<int>(gen() % (8 - 2 * f));
        const int w = 2 * f + 1 + static_cast<int>(gen() % (8 - 2 * f));
        const CoordinateGrid g = make_grid(h, w, 1);
        const CoefficientField field = random_field(f, trial % 2 == 0, h, w, gen);
        std::vector<double> up(g.size());
        for (double& v : up) v = d(gen);
        auto synth_loss = [&](const std::vector<double>& values) {
            CoefficientField probe = field;
            probe.values() = values;
            return weighted_sum(up, evaluate_mask(g, probe).values);
        };
        const CoefficientField analytic = synthesis_gradient(g, FrequencyLattice(f), field, up);
        synth = std::max(synth, fmk_test::max_relative_error(analytic.values(), numeric_gradient(synth_loss, field.values())));

        // iou_loss_gradient, away from ties
        MaskRaster target = fmk_test::random_binary(6, 6, gen);
        if (trial % 2) {
            for (double& v : target.values) v = 0.5 * (d(gen) + 1.0);
        }
        MaskRaster pred(6, 6);
        for (std::size_t i = 0; i < pred.size(); ++i) {
            double v = 0.5 * (d(gen) + 1.0);
            if (std::abs(v - target.values[i]) < 1e-3) v = target.values[i] > 0.5 ? target.values[i] - 0.01 : target.values[i] + 0.01;
            pred.values[i] = v;
        }
        auto iou_fn = [&](const std::vector<double>& v) { return iou_loss(MaskRaster(6, 6, v), target); };
        iou = std::max(iou, fmk_test::max_relative_error(iou_loss_gradient(pred, target), numeric_gradient(iou_fn, pred.values)));

        // siren_backward, parameters and inputs
        const int in = 1 + static_cast<int>(gen() % 8);
        std::vector<int> hidden(1 + gen() % 3);
        for (int& dim : hidden) dim = 1 + static_cast<int>(gen() % 8);
        const int rows = 1 + static_cast<int>(gen() % 6);
        FitState state;
        state.mlp = init_siren(in, hidden, gen());
        for (auto& l : state.mlp->layers)
            for (Eigen::Index k = 0; k < l.bias.size(); ++k) l.bias[k] = 0.5 * d(gen);
        Matrix x(rows, in);
        for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = 1.5 * d(gen);
        std::vector<double> sup(rows);
        for (double& v : sup) v = d(gen);
        const SirenGradients sg = siren_backward(*state.mlp, x, sup);
        FitEvaluation eval;
        eval.mlp_grad = sg;
        const std::vector<double> theta = flatten(state);
        auto siren_loss = [&](const std::vector<double>& t) {
            FitState probe = state;
            unflatten(t, probe);
            return weighted_sum(sup, siren_forward(*probe.mlp, x));
        };
        siren = std::max(siren, fmk_test::max_relative_error(flatten(eval), numeric_gradient(siren_loss, theta)));
        const std::vector<double> xs(x.data(), x.data() + x.size());
        auto input_loss = [&](const std::vector<double>& v) {
            Matrix m(rows, in);
            std::copy(v.begin(), v.end(), m.data());
            return weighted_sum(sup, siren_forward(*state.mlp, m));
        };
        siren = std::max(siren, fmk_test::max_relative_error(
                                    std::vector<double>(sg.features.data(), sg.features.data() + sg.features.size()),
                                    numeric_gradient(input_loss, xs)));
    }
    const bool ok = synth < 1e-4 && iou < 1e-4 && siren < 1e-4;
    return {ok, "max relative error: synthesis " + fmt(synth) + ", iou " + fmt(iou) + ", siren " + fmt(siren) +
                    " (< 1e-4, 20 instances each)"};
}

// 6
Outcome fit_convergence() {
    const MaskRaster disk = fmk_test::centered_disk(28, 9.0);
    const auto t0 = std::chrono::steady_clock::now();
    const FitResult a = fit_mask(disk, FitConfig{});
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const FitResult b = fit_mask(disk, FitConfig{});
    int reached = -1;
    for (const auto& rec : a.loss_history) {
        if (1.0 - rec.loss_y >= 0.95) {
            reached = rec.step;
            break;
        }
    }
    const bool same = a == b;
    return {a.final_iou >= 0.95 && seconds < 60.0 && same,
            "final soft IoU " + fmt(a.final_iou) + " (0.95 first at step " + std::to_string(reached) + "), one fit " +
                fmt(seconds) + " s, reruns " + (same ? "bit-identical" : "DIFFER")};
}

// 7
Outcome super_resolution() {
    std::mt19937_64 gen(7);
    std::vector<CoefficientField> fields;
    for (const auto& m : suite_masks(28)) {
        if (fields.size() == 10) break;
        fields.push_back(encode_mask(m.mask, EncoderConfig{12, 8.0}));
    }
    for (int k = 0; k < 5; ++k) fields.push_back(random_field(6, false, 28, 28, gen));
    double worst = 0.0;
    bool ladder = true;
    for (const auto& w : fields) {
        const MaskRaster base = super_resolve(w, 28, 28, 1);
        for (int s = 1; s <= 3; ++s) {
            const MaskRaster up = super_resolve(w, 28, 28, s);
            const int k = 1 << (s - 1);
            ladder = ladder && up.h == 28 * k && up.w == 28 * k;
            for (int i = 0; i < 28; ++i)
                for (int j = 0; j < 28; ++j) worst = std::max(worst, std::abs(up.at(i * k, j * k) - base.at(i, j)));
        }
    }
    return {worst <= 1e-12 && ladder, "15 fields, s=1,2,3 -> 28/56/112, max deviation on the base grid " + fmt(worst) +
                                          (ladder ? "" : ", WRONG dimensions")};
}

// 8
Outcome subdivision_ladder() {
    const auto shapes = fmk_test::synthetic_suite();
    double refined = 0.0;
    double bilinear = 0.0;
    bool ladder = true;
    for (const auto& shape : shapes) {
        const CoefficientField w = encode_mask(shape.rasterize(28), EncoderConfig{12, 8.0});
        std::vector<RefinementTrace> trace;
        const MaskRaster out = subdivision_refine(w, nullptr, 28, 28, RefinementConfig{}, &trace);
        ladder = ladder && out.h == 224 && out.w == 224 && trace.size() == 3 * 784;
        const int dims[4] = {28, 56, 112, 224};
        for (const auto& t : trace) ladder = ladder && t.i < dims[t.step] && t.j < dims[t.step];
        const MaskRaster truth = shape.rasterize(224);
        refined += soft_iou(out, truth) / shapes.size();
        bilinear += soft_iou(upsample_raster(reconstruct(w, 28, 28, 1), 8), truth) / shapes.size();
    }
    return {ladder && refined >= bilinear, std::string("28->56->112->224 ") + (ladder ? "ok" : "WRONG") +
                                               "; mean soft IoU refined " + fmt(refined) + " vs bilinear " + fmt(bilinear)};
}

// 9
Outcome roundtrip() {
    double worst = 0.0;
    for (const auto& m : suite_masks(64)) {
        const int f = std::min(m.mask.h, m.mask.w) / 2 - 1;
        const MaskRaster back = reconstruct(encode_mask(m.mask, EncoderConfig{f, 8.0}), 64, 64, 1).binarized();
        int diff = 0;
        for (std::size_t i = 0; i < back.size(); ++i) diff += back.values[i] != m.mask.values[i];
        worst = std::max(worst, static_cast<double>(diff) / back.size());
    }
    return {worst < 0.01, "50 masks at 64x64, f=31: worst disagreement " + fmt(100.0 * worst) + "% (< 1%)"};
}

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) out[fs::relative(e.path(), dir).generic_string()] = read_bytes(e.path());
    }
    return out;
}

int run_in(const fs::path& dir, const std::string& env, const std::string& args,
           const std::string& stdout_file = "cli.log") {
    const std::string cmd = "cd '" + dir.string() + "' && " + env + " '" FMK_BINARY "' " + args + " > " +
                            stdout_file + " 2> cli.err";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// 10
Outcome determinism_and_io() {
    const fs::path root = fs::temp_directory_path() / "fmk_acceptance_cli";
    fs::remove_all(root);
    std::string failure;

    // Lossless format roundtrips, including chains through every format.
    std::mt19937_64 gen(10);
    std::vector<MaskRaster> masks;
    for (int k = 0; k < 10; ++k) masks.push_back(fmk_test::random_binary(1 + gen() % 20, 1 + gen() % 20, gen));
    masks.push_back(MaskRaster(5, 7, 0.0));
    masks.push_back(MaskRaster(3, 4, 1.0));
    for (const auto& m : suite_masks(32)) masks.push_back(m.mask);
    fs::create_directories(root / "formats");
    int roundtrips = 0;
    for (std::size_t k = 0; k < masks.size(); ++k) {
        MaskRaster chained = masks[k];
        for (const char* ext : {".pgm", ".txt", ".rle.json"}) {
            const fs::path p = root / "formats" / ("m" + std::to_string(k) + ext);
            save_mask(masks[k], p, false);
            if (!(load_mask(p) == masks[k])) failure += std::string(" roundtrip ") + ext;
            const fs::path q = root / "formats" / ("chain" + std::to_string(k) + ext);
            save_mask(chained, q, false);
            chained = load_mask(q);
            ++roundtrips;
        }
        if (!(chained == masks[k])) failure += " chain";
    }

    // Identical pipelines in two directories; spectrum runs with different worker counts.
    const std::vector<std::string> pipeline = {
        "lattice --f 5",
        "encode --in disk.pgm --f 12 --out coeffs.json",
        "encode --in disk.txt --f 12 --out coeffs_txt.json",
        "encode --in disk.rle.json --f 12 --out coeffs_rle.json",
        "decode --in coeffs.json --h 28 --w 28 --s 2 --out decoded.pgm",
        "decode --in coeffs.json --h 28 --w 28 --out decoded.rle.json --binarize",
        "spectrum --dataset data --fmax 8 --out spectrum.csv",
        "fit --target disk.txt --steps 300 --out fit",
        "fit --target disk.pgm --mode per-pixel --f 4 --mlp --hidden 8,8 --steps 30 --seed 3 --out fit_mlp",
        "upscale --in fit --s 3 --out up.pgm",
        "upscale --in coeffs.json --h 28 --w 28 --s 2 --out up.txt --binarize",
        "render --in fit --steps 3 --trace trace.csv --out render.pgm",
        "render --in fit_mlp --source mlp --steps 2 --points 100 --out render_mlp.rle.json --binarize",
    };
    const MaskRaster disk = fmk_test::centered_disk(28, 9.0);
    std::map<std::string, std::string> snaps[2];
    for (int run = 0; run < 2; ++run) {
        const fs::path dir = root / ("run" + std::to_string(run));
        fs::create_directories(dir / "data" / "nested");
        save_mask(disk, dir / "disk.pgm", false);
        save_mask(disk, dir / "disk.txt", false);
        save_mask(disk, dir / "disk.rle.json", false);
        const auto shapes = suite_masks(24);
        for (int k = 0; k < 6; ++k) {
            const char* ext = k % 3 == 0 ? ".pgm" : k % 3 == 1 ? ".txt" : ".rle.json";
            save_mask(shapes[k].mask, dir / "data" / (k < 3 ? "" : "nested") / (shapes[k].name + ext), false);
        }
        save_mask(MaskRaster(24, 24, 1.0), dir / "data" / "ones.pgm", false);
        const std::string env = "FMK_THREADS=" + std::to_string(run == 0 ? 1 : 3);
        for (const auto& args : pipeline) {
            const int code = run_in(dir, env, args, args.rfind("lattice", 0) == 0 ? "lattice.json" : "cli.log");
            if (code != 0) failure += " '" + args + "' exit " + std::to_string(code);
        }
        snaps[run] = snapshot(dir);
        if (read_bytes(dir / "coeffs.json") != read_bytes(dir / "coeffs_txt.json") ||
            read_bytes(dir / "coeffs.json") != read_bytes(dir / "coeffs_rle.json")) {
            failure += " encode differs by input format";
        }
        if (!(load_mask(dir / "decoded.rle.json") == reconstruct(encode_mask(disk, {}), 28, 28, 1).binarized())) {
            failure += " decoded mask mismatch";
        }
    }
    int compared = 0;
    if (snaps[0].size() != snaps[1].size()) failure += " file lists differ";
    for (const auto& [name, bytes] : snaps[0]) {
        auto it = snaps[1].find(name);
        if (it == snaps[1].end() || it->second != bytes) failure += " " + name + " differs";
        ++compared;
    }

    // Exit codes.
    const fs::path dir = root / "run0";
    if (run_in(dir, "", "lattice --f -1") != 2) failure += " bad flag not exit 2";
    if (run_in(dir, "", "decode --in coeffs.json --out x.pgm") != 2) failure += " missing --h not exit 2";
    if (run_in(dir, "", "encode --in missing.pgm --out x.json") != 1) failure += " missing input not exit 1";
    for (const char* sub : {"lattice", "encode", "decode", "spectrum", "fit", "upscale", "render"}) {
        if (run_in(dir, "", std::string(sub) + " --help") != 0) failure += std::string(" ") + sub + " --help";
    }
    if (failure.empty()) fs::remove_all(root);
    if (!failure.empty()) return {false, "problems:" + failure};
    return {true, std::to_string(compared) + " output files byte-identical across reruns (FMK_THREADS 1 vs 3); " +
                      std::to_string(roundtrips) + " lossless format roundtrips; exit codes 0/1/2 as documented"};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria = {
        {1, "lattice cardinality", 1.0, lattice_cardinality},
        {2, "encoder matches least-squares oracle", 30.0, encoder_oracle},
        {3, "spectrum shape", 120.0, spectrum_shape},
        {4, "per-mask IoU non-decreasing in bands", 120.0, band_trend},
        {5, "gradient suites", 60.0, gradient_suites},
        {6, "fit convergence", 120.0, fit_convergence},
        {7, "super-resolution consistency", 30.0, super_resolution},
        {8, "subdivision ladder", 180.0, subdivision_ladder},
        {9, "encode/decode roundtrip", 60.0, roundtrip},
        {10, "determinism and I/O", 30.0, determinism_and_io},
    };
    int only = 0;
    if (argc > 1) only = std::atoi(argv[1]);
    int failures = 0;
    for (const auto& c : criteria) {
        if (only != 0 && c.id != only) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = seconds <= c.limit_seconds;
        const bool pass = o.pass && in_time;
        failures += pass ? 0 : 1;
        std::cout << (pass ? "PASS" : "FAIL") << "  " << c.id << ". " << c.name << ": " << o.detail << " ["
                  << fmt(seconds) << " s, limit " << fmt(c.limit_seconds) << " s" << (in_time ? "" : ", OVER TIME")
                  << "]" << std::endl;
    }
    return failures;
}
