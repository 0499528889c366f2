#include "glab/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace glab::fft {
namespace {

// FFTW plan creation is not thread safe; execution on private buffers is.
// Each thread keeps its own plans and buffers, creation is serialised.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct Plans {
    int n = 0;
    fftw_complex* buf = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;

    explicit Plans(int len) : n(len) {
        buf = fftw_alloc_complex(static_cast<size_t>(n));
        if (!buf) throw std::bad_alloc();
        std::lock_guard<std::mutex> lock(planner_mutex());
        fwd = fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_1d(n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
        if (!fwd || !bwd) throw std::runtime_error("fftw plan creation failed");
    }
    ~Plans() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        fftw_free(buf);
    }
    Plans(const Plans&) = delete;
    Plans& operator=(const Plans&) = delete;
};

Plans& plans_for(int n) {
    thread_local std::map<int, std::unique_ptr<Plans>> cache;
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<Plans>(n);
    return *slot;
}

void run(std::span<const std::complex<double>> in, std::span<std::complex<double>> out, bool forward_dir) {
    if (in.size() != out.size()) throw std::invalid_argument("fft: size mismatch");
    const int n = static_cast<int>(in.size());
    if (n == 0) return;
    Plans& p = plans_for(n);
    std::memcpy(p.buf, in.data(), sizeof(fftw_complex) * static_cast<size_t>(n));
    fftw_execute(forward_dir ? p.fwd : p.bwd);
    // std::complex<double> is layout compatible with fftw_complex.
    std::memcpy(static_cast<void*>(out.data()), p.buf,
                sizeof(fftw_complex) * static_cast<size_t>(n));
    if (!forward_dir) {
        const double s = 1.0 / n;
        for (auto& z : out) z *= s;
    }
}

} // namespace

void forward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) {
    run(in, out, true);
}

void inverse(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) {
    run(in, out, false);
}

} // namespace glab::fft
