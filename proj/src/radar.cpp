#include "isac/radar.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "isac/fft.hpp"

namespace isac {

DcfBank DcfBank::default_bank(const SystemConfig& cfg) {
    return DcfBank{{-0.5 / cfg.alpha, 0.0, 0.5 / cfg.alpha}};
}

void DcfBank::validate() const {
    if (offsets.empty()) throw Error(ErrorCode::InvalidArgument, "DCF bank is empty");
    std::set<double> seen;
    for (double o : offsets) {
        if (!(std::abs(o) <= 1.0))
            throw Error(ErrorCode::InvalidArgument, "DCF offset " + std::to_string(o) + " outside [-1, 1]");
        if (!seen.insert(o).second)
            throw Error(ErrorCode::InvalidArgument, "duplicate DCF offset " + std::to_string(o));
    }
}

RxFrame apply_dcf(const RxFrame& frame, double offset, const SystemConfig& cfg) {
    if (!(std::abs(offset) <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "apply_dcf: |offset| must be <= 1");
    if (offset == 0.0) return frame;
    const CVec w = phase_diag(PhaseKind::Ici, offset, cfg).conjugate();
    RxFrame out = frame;
    out.y = w.asDiagonal() * frame.y;
    if (frame.has_components) {
        out.desired = w.asDiagonal() * frame.desired;
        out.multipath = w.asDiagonal() * frame.multipath;
        out.ici = w.asDiagonal() * frame.ici;
        out.noise = w.asDiagonal() * frame.noise;
    }
    return out;
}

RVMap radar_fft(const CMat& y, const CMat& s_ref) {
    if (y.rows() != s_ref.rows() || y.cols() != s_ref.cols())
        throw Error(ErrorCode::DimensionMismatch, "radar_fft: frame and reference symbol shapes differ");
    const Eigen::Index n = s_ref.size();

    std::vector<double> mods(static_cast<size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) mods[static_cast<size_t>(i)] = std::abs(s_ref.data()[i]);
    auto mid = mods.begin() + static_cast<std::ptrdiff_t>(mods.size() / 2);
    std::nth_element(mods.begin(), mid, mods.end());
    const double floor = kErasureEps * *mid;

    CMat img = y;
    fft::columns(img, false);
    Eigen::Index erased = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const cd s = s_ref.data()[i];
        if (std::abs(s) < floor || s == cd(0.0, 0.0)) {
            img.data()[i] = 0.0;
            ++erased;
        } else {
            img.data()[i] /= s;
        }
    }
    if (static_cast<double>(erased) > kMaxErasureFraction * static_cast<double>(n))
        throw Error(ErrorCode::DegenerateSymbols,
                    "radar_fft: " + std::to_string(erased) + " of " + std::to_string(n) +
                        " reference symbols are near zero");
    fft::columns(img, true);
    fft::rows(img, false);

    RVMap map;
    map.mag = img.cwiseAbs();
    map.image = std::move(img);
    return map;
}

std::vector<RVMap> pipeline(const RxFrame& frame, const DcfBank& bank, const CMat& s_ref,
                            const SystemConfig& cfg) {
    bank.validate();
    std::vector<RVMap> maps;
    maps.reserve(bank.offsets.size());
    for (double o : bank.offsets) {
        const CMat filtered = o == 0.0 ? frame.y : CMat(phase_diag(PhaseKind::Ici, o, cfg).conjugate().asDiagonal() * frame.y);
        RVMap m = radar_fft(filtered, s_ref);
        m.filter_offset = o;
        maps.push_back(std::move(m));
    }
    return maps;
}

}  // namespace isac
