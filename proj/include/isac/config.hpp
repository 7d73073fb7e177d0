#pragma once

#include <cstddef>

#include "isac/types.hpp"

namespace isac {

/// OFDM / array / power constants plus the quantities derived from them.
///
/// The raw block is what a scenario file provides; `derive_config` fills the
/// derived block and checks it. Every other module reads a derived config.
struct SystemConfig {
    // raw
    int n_tx = 20;
    int n_rx = 20;
    int n_subcarriers = 2048;
    int n_symbols = 64;
    double carrier_freq = 60e9;        // Hz
    double bandwidth = 50e6;           // Hz
    double cp_fraction = 0.25;         // T_CP / T
    double noise_var = 1.9952623149688797e-13;  // W, -97 dBm
    double power_budget = 1000.0;      // W, 30 dB
    double sensing_gain_req = 2.44140625;  // W, a quarter of N_T * P_BS / N_c
    double antenna_sep = 0.5;          // wavelengths
    int subgrid_range = 64;
    int subgrid_doppler = 64;

    // derived
    double subcarrier_spacing = 0.0;   // Hz
    double symbol_time = 0.0;          // s
    double total_time = 0.0;           // s, symbol + CP
    double alpha = 0.0;                // total_time / symbol_time
    double range_res = 0.0;            // m
    double v_max = 0.0;                // m/s
    double unambiguous_range = 0.0;    // m
    double velocity_res = 0.0;         // m/s
};

/// Reference system values with nothing derived yet.
SystemConfig reference_raw();

/// Validates the raw fields and computes the derived ones.
/// Throws Error(Config) on a non-positive physical quantity or a zero count.
SystemConfig derive_config(const SystemConfig& raw);

/// Uniform linear array response, element m = exp(-j 2 pi m sep sin(angle)).
CVec steering_vector(double angle_rad, int n_elem, double sep);

/// Physical description of one propagation path.
struct PathParams {
    double range_m = 0.0;
    double velocity_mps = 0.0;  // positive = receding
    double aoa_rad = 0.0;
    double aod_rad = 0.0;
    cd reflect{1.0, 0.0};
    int focal_group = 0;        // index into the focal angles, -1 for clutter
};

struct NormalizedPath {
    double tau_bar = 0.0;       // delay in symbol times
    double fd_bar = 0.0;        // Doppler in subcarrier spacings
    cd amp{1.0, 0.0};           // reflect * exp(-j 2 pi f_c tau)
    bool ambiguous = false;     // |v| > v_max
    PathParams source;
};

NormalizedPath normalize_path(const PathParams& p, const SystemConfig& cfg);

struct Cell {
    int range_bin = 0;
    int doppler_bin = 0;
    bool operator==(const Cell&) const = default;
};

/// Coarse FFT cell of a path. Doppler uses the slow-time phase step
/// fd_bar * alpha so the cell coincides with the RV-map peak.
Cell cell_of(const NormalizedPath& np, const SystemConfig& cfg);

// Unit conversions between normalized and physical parameters.
double tau_bar_to_range(double tau_bar, const SystemConfig& cfg);
double fd_bar_to_velocity(double fd_bar, const SystemConfig& cfg);
double range_to_tau_bar(double range_m, const SystemConfig& cfg);
double velocity_to_fd_bar(double velocity_mps, const SystemConfig& cfg);

/// Normalized Doppler at the center of coarse Doppler bin q (wrapped to the
/// signed interval [-N_sym/2, N_sym/2)).
double doppler_bin_to_fd_bar(int q, const SystemConfig& cfg);

inline int wrap_index(long long i, int n) {
    long long r = i % n;
    return static_cast<int>(r < 0 ? r + n : r);
}

}  // namespace isac
