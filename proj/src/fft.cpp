#include "isac/fft.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <utility>

#include <fftw3.h>

namespace isac::fft {

namespace {

class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(int n, bool inverse) {
        std::lock_guard<std::mutex> lock(mutex_);
        const auto key = std::make_pair(n, inverse);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        // In-place plan; FFTW_ESTIMATE never touches the scratch buffer.
        auto* buf = fftw_alloc_complex(static_cast<size_t>(n));
        fftw_plan plan = fftw_plan_dft_1d(n, buf, buf, inverse ? FFTW_BACKWARD : FFTW_FORWARD,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(buf);
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::pair<int, bool>, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

}  // namespace

void transform_raw(std::span<cd> data, bool inverse) {
    const int n = static_cast<int>(data.size());
    if (n <= 1) return;
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(cache().get(n, inverse), p, p);
}

void transform(std::span<cd> data, bool inverse) {
    transform_raw(data, inverse);
    const double scale = 1.0 / std::sqrt(static_cast<double>(data.size()));
    for (auto& x : data) x *= scale;
}

void columns(CMat& m, bool inverse) {
    for (Eigen::Index c = 0; c < m.cols(); ++c)
        transform(std::span<cd>(m.col(c).data(), static_cast<size_t>(m.rows())), inverse);
}

void rows(CMat& m, bool inverse) {
    CMat t = m.transpose();
    columns(t, inverse);
    m = t.transpose();
}

}  // namespace isac::fft
