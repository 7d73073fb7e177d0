#include "isac/config.hpp"

#include <cmath>
#include <string>

namespace isac {

namespace {

void require_positive(double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value))
        throw Error(ErrorCode::Config, std::string(name) + " must be positive, got " + std::to_string(value));
}

void require_count(int value, const char* name) {
    if (value < 1)
        throw Error(ErrorCode::Config, std::string(name) + " must be >= 1, got " + std::to_string(value));
}

}  // namespace

SystemConfig reference_raw() { return SystemConfig{}; }

SystemConfig derive_config(const SystemConfig& raw) {
    require_count(raw.n_tx, "n_tx");
    require_count(raw.n_rx, "n_rx");
    require_count(raw.n_subcarriers, "n_subcarriers");
    require_count(raw.n_symbols, "n_symbols");
    require_count(raw.subgrid_range, "subgrid_range");
    require_count(raw.subgrid_doppler, "subgrid_doppler");
    require_positive(raw.carrier_freq, "carrier_freq");
    require_positive(raw.bandwidth, "bandwidth");
    require_positive(raw.cp_fraction, "cp_fraction");
    require_positive(raw.noise_var, "noise_var");
    require_positive(raw.power_budget, "power_budget");
    require_positive(raw.antenna_sep, "antenna_sep");
    if (!(raw.sensing_gain_req >= 0.0) || !std::isfinite(raw.sensing_gain_req))
        throw Error(ErrorCode::Config, "sensing_gain_req must be non-negative");

    SystemConfig cfg = raw;
    cfg.subcarrier_spacing = raw.bandwidth / raw.n_subcarriers;
    cfg.symbol_time = 1.0 / cfg.subcarrier_spacing;
    cfg.total_time = (1.0 + raw.cp_fraction) * cfg.symbol_time;
    cfg.alpha = cfg.total_time / cfg.symbol_time;
    cfg.range_res = kSpeedOfLight / (2.0 * raw.bandwidth);
    cfg.v_max = kSpeedOfLight / (4.0 * raw.carrier_freq * cfg.total_time);
    cfg.unambiguous_range = cfg.range_res * raw.n_subcarriers;
    cfg.velocity_res = 2.0 * cfg.v_max / raw.n_symbols;
    return cfg;
}

CVec steering_vector(double angle_rad, int n_elem, double sep) {
    if (n_elem < 1) throw Error(ErrorCode::InvalidArgument, "steering_vector: n_elem must be >= 1");
    CVec a(n_elem);
    const double step = -2.0 * kPi * sep * std::sin(angle_rad);
    for (int m = 0; m < n_elem; ++m) a[m] = cis(step * m);
    return a;
}

double range_to_tau_bar(double range_m, const SystemConfig& cfg) {
    return 2.0 * range_m / kSpeedOfLight * cfg.subcarrier_spacing;
}

double tau_bar_to_range(double tau_bar, const SystemConfig& cfg) {
    return tau_bar * kSpeedOfLight / (2.0 * cfg.subcarrier_spacing);
}

double velocity_to_fd_bar(double velocity_mps, const SystemConfig& cfg) {
    const double fd = -2.0 * velocity_mps * cfg.carrier_freq / kSpeedOfLight;
    return fd * cfg.symbol_time;
}

double fd_bar_to_velocity(double fd_bar, const SystemConfig& cfg) {
    return -fd_bar * kSpeedOfLight / (2.0 * cfg.carrier_freq * cfg.symbol_time);
}

NormalizedPath normalize_path(const PathParams& p, const SystemConfig& cfg) {
    if (!(p.range_m >= 0.0) || p.range_m >= cfg.unambiguous_range)
        throw Error(ErrorCode::OutOfRange,
                    "path range " + std::to_string(p.range_m) + " m outside [0, " +
                        std::to_string(cfg.unambiguous_range) + ")");
    NormalizedPath np;
    np.source = p;
    np.tau_bar = range_to_tau_bar(p.range_m, cfg);
    np.fd_bar = velocity_to_fd_bar(p.velocity_mps, cfg);
    const double tau = 2.0 * p.range_m / kSpeedOfLight;
    np.amp = p.reflect * cis(-2.0 * kPi * cfg.carrier_freq * tau);
    np.ambiguous = std::abs(p.velocity_mps) > cfg.v_max;
    return np;
}

Cell cell_of(const NormalizedPath& np, const SystemConfig& cfg) {
    const auto p = std::llround(np.tau_bar * cfg.n_subcarriers);
    const auto q = std::llround(np.fd_bar * cfg.alpha * cfg.n_symbols);
    return {wrap_index(p, cfg.n_subcarriers), wrap_index(q, cfg.n_symbols)};
}

double doppler_bin_to_fd_bar(int q, const SystemConfig& cfg) {
    const int n = cfg.n_symbols;
    int qs = wrap_index(q, n);
    if (qs >= (n + 1) / 2 && n > 1) qs -= n;
    return qs / (cfg.alpha * n);
}

}  // namespace isac
