#include "hwm/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>

namespace hwm {
namespace {

struct PlanEntry {
    fftw_plan plan = nullptr;
    fftw_complex* in = nullptr;
    fftw_complex* out = nullptr;
    std::size_t count = 0;

    ~PlanEntry() {
        if (plan) fftw_destroy_plan(plan);
        if (in) fftw_free(in);
        if (out) fftw_free(out);
    }
};

using PlanKey = std::pair<std::vector<int>, bool>;

std::mutex g_mutex;
std::map<PlanKey, PlanEntry>& cache() {
    static std::map<PlanKey, PlanEntry> c;
    return c;
}

PlanEntry& plan_for(const std::vector<int>& dims, bool forward) {
    auto& c = cache();
    const PlanKey key{dims, forward};
    auto it = c.find(key);
    if (it != c.end()) return it->second;

    PlanEntry& e = c[key];
    e.count = 1;
    for (int d : dims) e.count *= static_cast<std::size_t>(d);
    e.in = fftw_alloc_complex(e.count);
    e.out = fftw_alloc_complex(e.count);
    e.plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), e.in, e.out,
                           forward ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
    return e;
}

} // namespace

void dft(const std::vector<int>& dims, const std::complex<double>* in,
         std::complex<double>* out, bool forward) {
    std::lock_guard<std::mutex> lock(g_mutex);
    PlanEntry& e = plan_for(dims, forward);
    std::memcpy(e.in, in, e.count * sizeof(fftw_complex));
    fftw_execute(e.plan);
    if (forward) {
        const double scale = 1.0 / static_cast<double>(e.count);
        for (std::size_t i = 0; i < e.count; ++i) {
            out[i] = {e.out[i][0] * scale, e.out[i][1] * scale};
        }
    } else {
        std::memcpy(out, e.out, e.count * sizeof(fftw_complex));
    }
}

} // namespace hwm
