#include "isac/scenario.hpp"

#include <cmath>
#include <random>

namespace isac {

Scenario desk_scenario() {
    Scenario sc;
    SystemConfig raw = reference_raw();
    raw.n_subcarriers = 256;
    raw.n_symbols = 64;
    raw.n_tx = 8;
    raw.n_rx = 8;
    raw.sensing_gain_req = 0.25 * raw.n_tx * raw.power_budget / raw.n_subcarriers;
    sc.cfg = derive_config(raw);
    sc.users.count = 2;
    return sc;
}

std::vector<PathParams> gen_clutter(const ClutterSpec& spec, const SystemConfig& cfg, std::uint64_t seed) {
    std::vector<PathParams> out;
    if (spec.count <= 0) return out;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::normal_distribution<double> n01(0.0, std::sqrt(spec.power / 2.0));
    for (int i = 0; i < spec.count; ++i) {
        PathParams p;
        p.range_m = uni(rng) * cfg.unambiguous_range;
        p.velocity_mps = 0.0;
        p.aoa_rad = (uni(rng) - 0.5) * kPi;
        p.aod_rad = p.aoa_rad;
        const double re = n01(rng);
        const double im = n01(rng);
        p.reflect = {re, im};
        p.focal_group = -1;
        out.push_back(p);
    }
    return out;
}

BeamDesign design_beams(const Scenario& sc) {
    UserChannelSpec us = sc.users;
    const CommChannelSet ch = gen_channels(sc.cfg, us);
    TxOptions opt;
    opt.sensing_only = sc.beams == BeamMode::Sensing;
    BeamDesign d;
    d.tx = optimize(ch, sc.cfg, sc.focal_rad, opt);
    d.rx = design_rx(d.tx, sc.focal_rad, RVec(), sc.cfg);
    d.set.tx = d.tx.v;
    d.set.rx = d.rx.u;
    return d;
}

CMat focal_symbols(const Scenario& sc, const BeamformerSet& beams, const SymbolTensor& sym, int group) {
    if (group < 0 || group >= static_cast<int>(sc.focal_rad.size()))
        throw Error(ErrorCode::OutOfRange, "focal group " + std::to_string(group) + " does not exist");
    const double phi = sc.focal_rad[static_cast<size_t>(group)];
    return effective_symbols(phi, phi, beams, sym, sc.cfg);
}

double path_snr(const cd& amp, const CMat& s, const SystemConfig& cfg) {
    return std::norm(amp) * s.squaredNorm() / (static_cast<double>(cfg.n_subcarriers) * cfg.n_symbols * cfg.noise_var);
}

Simulation simulate(const Scenario& sc, const BeamformerSet& beams, std::uint64_t seed, bool noise_on) {
    const SystemConfig& cfg = sc.cfg;
    Simulation sim;
    sim.symbols = gen_symbols(cfg, static_cast<int>(beams.tx.empty() ? 1 : beams.tx.front().cols()), sc.constellation,
                              mix_seed(seed, 0));

    std::vector<PathParams> params;
    for (const auto& t : sc.targets) {
        if (t.path.focal_group >= static_cast<int>(sc.focal_rad.size()))
            throw Error(ErrorCode::Validation, "target references a missing focal group");
        params.push_back(t.path);
    }
    for (auto& c : gen_clutter(sc.clutter, cfg, mix_seed(seed, 1))) params.push_back(c);

    std::vector<CMat> eff;
    for (size_t i = 0; i < params.size(); ++i) {
        NormalizedPath np = normalize_path(params[i], cfg);
        CMat s = effective_symbols(params[i].aoa_rad, params[i].aod_rad, beams, sim.symbols, cfg);
        if (i < sc.targets.size() && sc.targets[i].snr_db) {
            const double e = s.squaredNorm();
            if (e == 0.0) throw Error(ErrorCode::Validation, "target SNR requested on a path with zero gain");
            const double want = std::pow(10.0, *sc.targets[i].snr_db / 10.0);
            const double mag = std::sqrt(want * cfg.n_subcarriers * cfg.n_symbols * cfg.noise_var / e);
            const double ph = std::abs(np.amp) > 0 ? std::arg(np.amp) : 0.0;
            np.amp = std::polar(mag, ph);
        }
        if (i < sc.targets.size()) sim.targets.push_back(np);
        sim.paths.push_back(np);
        eff.push_back(std::move(s));
    }
    sim.frame = synthesize_rx(sim.paths, eff, cfg, noise_on, mix_seed(seed, 2), 0);
    sim.s_ref = focal_symbols(sc, beams, sim.symbols, 0);
    return sim;
}

}  // namespace isac
