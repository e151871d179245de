#include "nfdm/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <numbers>

namespace nfdm {
namespace {

struct PlanPair {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
};

std::mutex plan_mutex;

const PlanPair& plans_for(std::size_t n) {
    static std::map<std::size_t, PlanPair> cache;
    std::lock_guard lock(plan_mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    auto* buf = fftw_alloc_complex(n);
    PlanPair p;
    const int len = static_cast<int>(n);
    p.forward = fftw_plan_dft_1d(len, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.backward = fftw_plan_dft_1d(len, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    return cache.emplace(n, p).first->second;
}

void run(fftw_plan plan, CVector& x) {
    auto* data = reinterpret_cast<fftw_complex*>(x.data());
    fftw_execute_dft(plan, data, data);
}

}  // namespace

void fft_forward(CVector& x) {
    if (x.empty()) return;
    run(plans_for(x.size()).forward, x);
}

void fft_backward(CVector& x) {
    if (x.empty()) return;
    run(plans_for(x.size()).backward, x);
}

std::vector<double> fft_angular_frequencies(std::size_t n, double dt) {
    std::vector<double> w(n);
    const double scale = 2.0 * std::numbers::pi / (static_cast<double>(n) * dt);
    for (std::size_t k = 0; k < n; ++k) {
        const auto kk = static_cast<long long>(k);
        const long long signed_k = (k < (n + 1) / 2) ? kk : kk - static_cast<long long>(n);
        w[k] = scale * static_cast<double>(signed_k);
    }
    return w;
}

}  // namespace nfdm
