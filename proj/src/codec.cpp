#include "fouriermask/codec.hpp"

#include <algorithm>
#include <complex>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <fftw3.h>

#include "fouriermask/maskio.hpp"
#include "fouriermask/metrics.hpp"

namespace fouriermask {

namespace {

// FFTW's planner is not thread-safe; execution of distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

class Dft2d {
public:
    Dft2d(int rows, int cols) : rows_(rows), cols_(cols) {
        const std::size_t n = static_cast<std::size_t>(rows) * cols;
        in_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
        out_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
        if (in_ == nullptr || out_ == nullptr) {
            release();
            throw std::bad_alloc();
        }
        std::lock_guard lock(planner_mutex());
        plan_ = fftw_plan_dft_2d(rows, cols, in_, out_, FFTW_FORWARD, FFTW_ESTIMATE);
        if (plan_ == nullptr) {
            release();
            throw std::runtime_error("codec: FFT planning failed");
        }
    }
    Dft2d(const Dft2d&) = delete;
    Dft2d& operator=(const Dft2d&) = delete;
    ~Dft2d() { release(); }

    void set(std::size_t idx, double re) {
        in_[idx][0] = re;
        in_[idx][1] = 0.0;
    }
    void run() { fftw_execute(plan_); }
    std::complex<double> bin(int u, int v) const {
        const int r = ((u % rows_) + rows_) % rows_;
        const int c = ((v % cols_) + cols_) % cols_;
        const std::size_t idx = static_cast<std::size_t>(r) * cols_ + c;
        return {out_[idx][0], out_[idx][1]};
    }

private:
    void release() {
        std::lock_guard lock(planner_mutex());
        if (plan_ != nullptr) fftw_destroy_plan(plan_);
        if (in_ != nullptr) fftw_free(in_);
        if (out_ != nullptr) fftw_free(out_);
        plan_ = nullptr;
        in_ = out_ = nullptr;
    }

    int rows_;
    int cols_;
    fftw_complex* in_ = nullptr;
    fftw_complex* out_ = nullptr;
    fftw_plan plan_ = nullptr;
};

std::vector<double> mask_losses(const MaskRaster& mask, const SpectrumOptions& options) {
    const CoefficientField full = encode_mask(mask, {options.max_frequency, options.alpha});
    std::vector<double> losses;
    losses.reserve(options.max_frequency + 1);
    for (int f = 0; f <= options.max_frequency; ++f) {
        const MaskRaster recon = reconstruct(truncate(full, f), mask.h, mask.w, 1);
        losses.push_back(iou_loss(recon, mask));
    }
    return losses;
}

}  // namespace

void check_nyquist(int max_frequency, int h, int w) {
    if (max_frequency < 0) throw std::invalid_argument("codec: f must be non-negative");
    if (h == 1 && w == 1 && max_frequency > 0) {
        throw std::invalid_argument("codec: a 1x1 mask only supports f = 0");
    }
    if (2 * max_frequency >= std::min(h, w)) {
        throw std::invalid_argument("codec: f=" + std::to_string(max_frequency) +
                                    " is at or above Nyquist for a " + std::to_string(h) + "x" +
                                    std::to_string(w) + " mask (need f < " +
                                    std::to_string(std::min(h, w)) + "/2)");
    }
}

CoefficientField encode_mask(const MaskRaster& mask, const EncoderConfig& config) {
    if (mask.h < 1 || mask.w < 1) throw std::invalid_argument("codec: empty mask");
    if (!mask.is_binary()) throw std::invalid_argument("codec: encoder input must be a binary mask");
    if (!(config.alpha > 0.0)) throw std::invalid_argument("codec: alpha must be positive");
    check_nyquist(config.max_frequency, mask.h, mask.w);

    Dft2d dft(mask.h, mask.w);
    for (std::size_t i = 0; i < mask.size(); ++i) {
        dft.set(i, config.alpha * (2.0 * mask.values[i] - 1.0));
    }
    dft.run();

    const FrequencyLattice lattice(config.max_frequency);
    const std::size_t c = lattice.size();
    const double n = static_cast<double>(mask.size());
    CoefficientField out = CoefficientField::global(config.max_frequency);
    auto w = out.slice(0);
    for (std::size_t k = 0; k < c; ++k) {
        const Frequency& fq = lattice[k];
        const std::complex<double> bin = dft.bin(fq.u, fq.v);
        if (fq.u == 0 && fq.v == 0) {
            w[k] = bin.real() / n;
            w[c + k] = 0.0;
        } else {
            w[k] = 2.0 * bin.real() / n;
            w[c + k] = -2.0 * bin.imag() / n;
        }
    }
    return out;
}

CoefficientField truncate(const CoefficientField& coeffs, int target_frequency) {
    if (target_frequency < 0 || target_frequency > coeffs.max_frequency()) {
        throw std::invalid_argument("codec: cannot truncate f=" +
                                    std::to_string(coeffs.max_frequency()) + " to f=" +
                                    std::to_string(target_frequency));
    }
    const FrequencyLattice source(coeffs.max_frequency());
    const FrequencyLattice target(target_frequency);
    CoefficientField out = coeffs.is_global()
                               ? CoefficientField::global(target_frequency)
                               : CoefficientField::per_pixel(target_frequency, coeffs.h(), coeffs.w());
    const std::size_t cs = source.size();
    const std::size_t ct = target.size();
    for (std::size_t r = 0; r < coeffs.slice_count(); ++r) {
        const auto src = coeffs.slice(r);
        auto dst = out.slice(r);
        for (std::size_t k = 0; k < ct; ++k) {
            const auto from = static_cast<std::size_t>(source.index_of(target[k]));
            dst[k] = src[from];
            dst[ct + k] = src[cs + from];
        }
    }
    return out;
}

MaskRaster reconstruct(const CoefficientField& coeffs, int h, int w, int scale) {
    return evaluate_mask(make_grid(h, w, scale), coeffs);
}

SpectrumReport spectrum_analysis(std::vector<NamedMask> masks, const SpectrumOptions& options) {
    if (masks.empty()) throw std::invalid_argument("spectrum: dataset is empty");
    if (options.max_frequency < 0) throw std::invalid_argument("spectrum: f_max must be non-negative");
    std::sort(masks.begin(), masks.end(),
              [](const NamedMask& a, const NamedMask& b) { return a.name < b.name; });
    for (const NamedMask& m : masks) {
        try {
            check_nyquist(options.max_frequency, m.mask.h, m.mask.w);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(m.name + ": " + e.what());
        }
    }

    const std::size_t n = masks.size();
    std::vector<std::vector<double>> losses(n);
    unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                            : options.threads;
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));

    auto work = [&](std::size_t begin, std::size_t stride, std::exception_ptr& err) {
        try {
            for (std::size_t i = begin; i < n; i += stride) losses[i] = mask_losses(masks[i].mask, options);
        } catch (...) {
            err = std::current_exception();
        }
    };
    std::vector<std::exception_ptr> errors(threads);
    if (threads <= 1) {
        work(0, 1, errors[0]);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads, std::ref(errors[t]));
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    SpectrumReport report;
    for (int f = 0; f <= options.max_frequency; ++f) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += losses[i][f];
        report.rows.push_back({f, sum / static_cast<double>(n), n});
    }
    for (auto& m : masks) report.names.push_back(std::move(m.name));
    report.per_mask_loss = std::move(losses);
    return report;
}

SpectrumReport spectrum_analysis(const std::filesystem::path& dir, const SpectrumOptions& options) {
    std::vector<NamedMask> masks;
    for (const MaskFile& file : iter_dataset(dir)) {
        try {
            masks.push_back({file.relative, load_mask(file.path)});
        } catch (const std::exception& e) {
            throw std::runtime_error("spectrum: failed to read " + file.relative + ": " + e.what());
        }
    }
    return spectrum_analysis(std::move(masks), options);
}

}  // namespace fouriermask
