#pragma once

#include <string>
#include <vector>

#include "isac/waveform.hpp"

namespace isac {

/// Doppler correction filters, each realized as W = D_I^*(offset).
struct DcfBank {
    std::vector<double> offsets;  // normalized Doppler, cycles per subcarrier spacing

    /// {-0.5/alpha, 0, +0.5/alpha}
    static DcfBank default_bank(const SystemConfig& cfg);
    /// Throws Error(InvalidArgument) on duplicate offsets or |offset| > 1.
    void validate() const;
};

struct RVMap {
    RMat mag;           // |image|, N_c x N_sym
    CMat image;         // complex RV image
    double filter_offset = 0.0;
    std::string frame_id;
};

/// Left-multiplies y and every stored component by D_I^*(offset).
RxFrame apply_dcf(const RxFrame& frame, double offset, const SystemConfig& cfg);

/// Relative threshold below which an S entry is treated as an erasure.
inline constexpr double kErasureEps = 1e-3;
/// Fraction of erased entries that makes the reference unusable.
inline constexpr double kMaxErasureFraction = 0.10;

/// RV image F^-1 (F Y ./ S) F_Nsym with erasures for near-zero S entries.
/// Throws Error(DegenerateSymbols) when more than 10% of S is erased.
RVMap radar_fft(const CMat& y, const CMat& s_ref);
inline RVMap radar_fft(const RxFrame& frame, const CMat& s_ref) { return radar_fft(frame.y, s_ref); }

/// One map per filter offset, in bank order.
std::vector<RVMap> pipeline(const RxFrame& frame, const DcfBank& bank, const CMat& s_ref,
                            const SystemConfig& cfg);

}  // namespace isac
