#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "isac/radar.hpp"
#include "isac/rx_beamformer.hpp"
#include "isac/tx_beamformer.hpp"
#include "isac/waveform.hpp"

namespace isac {

struct TargetSpec {
    PathParams path;
    std::optional<double> snr_db;  // overrides |reflect|: per-element SNR of the path in Y
};

struct ClutterSpec {
    int count = 0;
    double power = 0.0;  // E|a|^2
};

enum class BeamMode { Optimized, Sensing };

struct Scenario {
    SystemConfig cfg;                    // derived
    std::vector<TargetSpec> targets;
    UserChannelSpec users;
    std::vector<double> focal_rad{0.0};
    ClutterSpec clutter;
    Constellation constellation = Constellation::Qpsk;
    BeamMode beams = BeamMode::Optimized;
    std::uint64_t seed = 1;
};

/// Desk-scale defaults: N_c 256, N_sym 64, N_T = N_R = 8, K = 2, B = 50 MHz.
Scenario desk_scenario();

/// Static clutter paths: uniform range and angle, Rayleigh amplitude.
std::vector<PathParams> gen_clutter(const ClutterSpec& spec, const SystemConfig& cfg, std::uint64_t seed);

/// Transmit solution per the scenario's beam mode plus the receive combiner.
struct BeamDesign {
    TxSolution tx;
    RxSolution rx;
    BeamformerSet set;
};
BeamDesign design_beams(const Scenario& sc);

/// S for a focal group (aoa = aod = phi_l).
CMat focal_symbols(const Scenario& sc, const BeamformerSet& beams, const SymbolTensor& sym, int group);

struct Simulation {
    SymbolTensor symbols;
    std::vector<NormalizedPath> targets;  // targets only, in scenario order
    std::vector<NormalizedPath> paths;    // targets then clutter
    RxFrame frame;
    CMat s_ref;                           // focal group 0
};

/// Per-element SNR of a path: |a|^2 ||S||^2 / (N_c N_sym sigma^2).
double path_snr(const cd& amp, const CMat& s, const SystemConfig& cfg);

/// Synthesizes one frame. Symbols, clutter and noise draw from seeds mixed
/// from `seed`; the same inputs give the same frame.
Simulation simulate(const Scenario& sc, const BeamformerSet& beams, std::uint64_t seed, bool noise_on = true);

}  // namespace isac
