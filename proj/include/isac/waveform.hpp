#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "isac/config.hpp"

namespace isac {

enum class Constellation { Bpsk, Qpsk, Qam16, Qam64 };

/// Throws Error(InvalidArgument) on an unknown id.
Constellation parse_constellation(const std::string& id);
std::string constellation_name(Constellation c);

/// Per-user communication symbols, N_c x N_sym each, unit average power.
struct SymbolTensor {
    std::vector<CMat> per_user;
    Constellation constellation = Constellation::Qpsk;
    std::uint64_t seed = 0;
    int users() const { return static_cast<int>(per_user.size()); }
};

SymbolTensor gen_symbols(const SystemConfig& cfg, int n_users, Constellation c, std::uint64_t seed);

/// Transmit vectors per subcarrier (N_T x K, one column per user) and the
/// receive combiner u.
struct BeamformerSet {
    std::vector<CMat> tx;
    CVec rx;
};

enum class PhaseKind { Ici, Range, Doppler };

/// Diagonal of D_I(f) (length N_c, step f/N_c), D_R(tau) (length N_c, step
/// tau) or D_v(f) (length N_sym, step f*alpha). Entry 0 is always 1.
CVec phase_diag(PhaseKind kind, double value, const SystemConfig& cfg);

/// [S](p,q) = u^H a_R(aoa) a_T^H(aod) sum_k v_k^(p) s_k^(p,q).
CMat effective_symbols(double aoa_rad, double aod_rad, const BeamformerSet& beams,
                       const SymbolTensor& symbols, const SystemConfig& cfg);

/// Received frame, rows = subcarrier / fast time, columns = slow time.
struct RxFrame {
    CMat y;
    CMat desired;
    CMat multipath;
    CMat ici;
    CMat noise;
    bool has_components = false;
    int focal_group = 0;
    std::vector<NormalizedPath> paths;
};

struct RxComponents {
    CMat desired, multipath, ici, noise;
};

/// Exact matrix-form synthesis. `effective` holds S_i for each path (same
/// order). Paths whose focal group equals `focal_group` are the desired
/// signal; everything else counts as multipath.
RxFrame synthesize_rx(const std::vector<NormalizedPath>& paths, const std::vector<CMat>& effective,
                      const SystemConfig& cfg, bool noise_on, std::uint64_t seed, int focal_group = 0);

/// Convenience overload building S_i from each path's own angles.
RxFrame synthesize_rx(const std::vector<NormalizedPath>& paths, const SymbolTensor& symbols,
                      const BeamformerSet& beams, const SystemConfig& cfg, bool noise_on,
                      std::uint64_t seed, int focal_group = 0);

/// Throws Error(InvalidArgument) when the frame carries no component bookkeeping.
RxComponents decompose_rx(const RxFrame& frame);

/// Single-path contribution a * D_I(f) F^-1 D_R^*(tau) S D_v(f), split into
/// its ICI-free part and its ICI part.
struct PathSignal {
    CMat clean;
    CMat ici;
};
PathSignal path_signal(const NormalizedPath& path, const CMat& effective, const SystemConfig& cfg);

/// i.i.d. CN(0, var) matrix; each real part has variance var/2.
CMat complex_gaussian(int rows, int cols, double var, std::uint64_t seed);

/// splitmix64 finalizer, used to derive per-frame seeds from a base seed.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index);

}  // namespace isac
