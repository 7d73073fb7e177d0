#pragma once

#include <random>

#include "isac/config.hpp"
#include "isac/waveform.hpp"

namespace testing_support {

inline isac::SystemConfig small_cfg(int nc = 32, int ns = 16, int nt = 4, int nr = 4) {
    isac::SystemConfig raw = isac::reference_raw();
    raw.n_subcarriers = nc;
    raw.n_symbols = ns;
    raw.n_tx = nt;
    raw.n_rx = nr;
    raw.subgrid_range = 16;
    raw.subgrid_doppler = 16;
    raw.sensing_gain_req = 0.25 * nt * raw.power_budget / nc;
    return isac::derive_config(raw);
}

inline isac::CMat unit_modulus(int rows, int cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 2.0 * isac::kPi);
    isac::CMat m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = isac::cis(u(rng));
    return m;
}

inline isac::CMat gaussian(int rows, int cols, std::uint64_t seed) {
    return isac::complex_gaussian(rows, cols, 1.0, seed);
}

// On-grid normalized path at coarse cell (p, q_signed).
inline isac::NormalizedPath on_grid(int p, int q_signed, isac::cd amp, const isac::SystemConfig& cfg) {
    isac::NormalizedPath np;
    np.tau_bar = double(p) / cfg.n_subcarriers;
    np.fd_bar = double(q_signed) / (cfg.alpha * cfg.n_symbols);
    np.amp = amp;
    return np;
}

}  // namespace testing_support
