#include "screamloc/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>

#include "screamloc/errors.hpp"

namespace screamloc::fft {

namespace {

// FFTW planning is not thread-safe and FFTW_ESTIMATE keeps plan selection
// independent of runtime timing, so results are reproducible run to run.
struct PlanEntry {
    fftw_complex* in = nullptr;
    fftw_complex* out = nullptr;
    fftw_plan plan = nullptr;

    ~PlanEntry() {
        if (plan) fftw_destroy_plan(plan);
        if (in) fftw_free(in);
        if (out) fftw_free(out);
    }
};

class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    void execute(const std::vector<std::complex<double>>& src,
                 std::vector<std::complex<double>>& dst, int sign) {
        const std::size_t n = src.size();
        std::lock_guard<std::mutex> lock(mu_);
        PlanEntry& e = entries_[{n, sign}];
        if (!e.plan) {
            e.in = fftw_alloc_complex(n);
            e.out = fftw_alloc_complex(n);
            if (!e.in || !e.out) raise(Errc::invalid_input, "fftw allocation failed");
            e.plan = fftw_plan_dft_1d(static_cast<int>(n), e.in, e.out, sign, FFTW_ESTIMATE);
        }
        // std::complex<double> is layout-compatible with fftw_complex
        std::memcpy(e.in, static_cast<const void*>(src.data()), n * sizeof(fftw_complex));
        fftw_execute(e.plan);
        dst.resize(n);
        std::memcpy(static_cast<void*>(dst.data()), e.out, n * sizeof(fftw_complex));
    }

private:
    std::mutex mu_;
    std::map<std::pair<std::size_t, int>, PlanEntry> entries_;
};

} // namespace

std::vector<std::complex<double>> fft(const std::vector<std::complex<double>>& data) {
    if (data.empty()) raise(Errc::invalid_input, "fft: empty input");
    std::vector<std::complex<double>> out;
    PlanCache::instance().execute(data, out, FFTW_FORWARD);
    return out;
}

std::vector<std::complex<double>> ifft(const std::vector<std::complex<double>>& data) {
    if (data.empty()) raise(Errc::invalid_input, "ifft: empty input");
    std::vector<std::complex<double>> out;
    PlanCache::instance().execute(data, out, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(data.size());
    for (auto& v : out) v *= scale;
    return out;
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

} // namespace screamloc::fft
