#include "isac/waveform.hpp"

#include <array>
#include <cmath>
#include <random>

#include "isac/fft.hpp"

namespace isac {

Constellation parse_constellation(const std::string& id) {
    if (id == "bpsk") return Constellation::Bpsk;
    if (id == "qpsk") return Constellation::Qpsk;
    if (id == "16qam" || id == "qam16") return Constellation::Qam16;
    if (id == "64qam" || id == "qam64") return Constellation::Qam64;
    throw Error(ErrorCode::InvalidArgument, "unknown constellation id '" + id + "'");
}

std::string constellation_name(Constellation c) {
    switch (c) {
        case Constellation::Bpsk: return "bpsk";
        case Constellation::Qpsk: return "qpsk";
        case Constellation::Qam16: return "16qam";
        case Constellation::Qam64: return "64qam";
    }
    return "qpsk";
}

namespace {

std::vector<cd> alphabet(Constellation c) {
    std::vector<cd> pts;
    auto square_qam = [&pts](int side) {
        // mean energy of a square M-QAM with odd integer levels is 2(M-1)/3
        const double m = static_cast<double>(side) * side;
        const double scale = 1.0 / std::sqrt(2.0 * (m - 1.0) / 3.0);
        for (int i = 0; i < side; ++i)
            for (int q = 0; q < side; ++q)
                pts.emplace_back((2 * i - side + 1) * scale, (2 * q - side + 1) * scale);
    };
    switch (c) {
        case Constellation::Bpsk: pts = {{1, 0}, {-1, 0}}; break;
        case Constellation::Qpsk: square_qam(2); break;
        case Constellation::Qam16: square_qam(4); break;
        case Constellation::Qam64: square_qam(8); break;
    }
    return pts;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

SymbolTensor gen_symbols(const SystemConfig& cfg, int n_users, Constellation c, std::uint64_t seed) {
    if (n_users < 1) throw Error(ErrorCode::InvalidArgument, "gen_symbols: need at least one user");
    const auto pts = alphabet(c);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<size_t> pick(0, pts.size() - 1);
    SymbolTensor out;
    out.constellation = c;
    out.seed = seed;
    out.per_user.reserve(static_cast<size_t>(n_users));
    for (int k = 0; k < n_users; ++k) {
        CMat s(cfg.n_subcarriers, cfg.n_symbols);
        for (Eigen::Index q = 0; q < s.cols(); ++q)
            for (Eigen::Index p = 0; p < s.rows(); ++p) s(p, q) = pts[pick(rng)];
        out.per_user.push_back(std::move(s));
    }
    return out;
}

CVec phase_diag(PhaseKind kind, double value, const SystemConfig& cfg) {
    int n = 0;
    double step = 0.0;
    switch (kind) {
        case PhaseKind::Ici:
            n = cfg.n_subcarriers;
            step = value / cfg.n_subcarriers;
            break;
        case PhaseKind::Range:
            n = cfg.n_subcarriers;
            step = value;
            break;
        case PhaseKind::Doppler:
            n = cfg.n_symbols;
            step = value * cfg.alpha;
            break;
    }
    CVec d(n);
    for (int i = 0; i < n; ++i) {
        // reduce the cycle count first so integer-cycle steps land exactly on 1
        const double cycles = std::fmod(step * i, 1.0);
        d[i] = cis(2.0 * kPi * cycles);
    }
    return d;
}

CMat effective_symbols(double aoa_rad, double aod_rad, const BeamformerSet& beams,
                       const SymbolTensor& symbols, const SystemConfig& cfg) {
    const int nc = cfg.n_subcarriers;
    const int k_users = symbols.users();
    if (static_cast<int>(beams.tx.size()) != nc)
        throw Error(ErrorCode::DimensionMismatch, "effective_symbols: need one transmit matrix per subcarrier");
    if (beams.rx.size() != cfg.n_rx)
        throw Error(ErrorCode::DimensionMismatch, "effective_symbols: receive vector length != n_rx");
    for (const auto& s : symbols.per_user)
        if (s.rows() != nc || s.cols() != cfg.n_symbols)
            throw Error(ErrorCode::DimensionMismatch, "effective_symbols: symbol grid shape mismatch");

    const CVec a_r = steering_vector(aoa_rad, cfg.n_rx, cfg.antenna_sep);
    const CVec a_t = steering_vector(aod_rad, cfg.n_tx, cfg.antenna_sep);
    const cd rx_gain = beams.rx.dot(a_r);  // u^H a_R

    CMat s_eff = CMat::Zero(nc, cfg.n_symbols);
    for (int p = 0; p < nc; ++p) {
        const CMat& v = beams.tx[static_cast<size_t>(p)];
        if (v.rows() != cfg.n_tx || v.cols() != k_users)
            throw Error(ErrorCode::DimensionMismatch, "effective_symbols: transmit matrix must be n_tx x K");
        for (int k = 0; k < k_users; ++k) {
            const cd g = rx_gain * a_t.dot(v.col(k));  // u^H a_R a_T^H v_k
            s_eff.row(p) += g * symbols.per_user[static_cast<size_t>(k)].row(p);
        }
    }
    return s_eff;
}

PathSignal path_signal(const NormalizedPath& path, const CMat& effective, const SystemConfig& cfg) {
    if (effective.rows() != cfg.n_subcarriers || effective.cols() != cfg.n_symbols)
        throw Error(ErrorCode::DimensionMismatch, "path_signal: effective symbol matrix shape mismatch");
    const CVec d_r = phase_diag(PhaseKind::Range, path.tau_bar, cfg);
    const CVec d_v = phase_diag(PhaseKind::Doppler, path.fd_bar, cfg);
    const CVec d_i = phase_diag(PhaseKind::Ici, path.fd_bar, cfg);

    CMat x = d_r.conjugate().asDiagonal() * effective;
    fft::columns(x, /*inverse=*/true);
    x = path.amp * (x * d_v.asDiagonal());

    PathSignal out;
    out.ici = (d_i.array() - cd(1.0, 0.0)).matrix().asDiagonal() * x;
    out.clean = std::move(x);
    return out;
}

CMat complex_gaussian(int rows, int cols, double var, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01(0.0, std::sqrt(var / 2.0));
    CMat z(rows, cols);
    for (Eigen::Index c = 0; c < z.cols(); ++c)
        for (Eigen::Index r = 0; r < z.rows(); ++r) {
            const double re = n01(rng);
            const double im = n01(rng);
            z(r, c) = {re, im};
        }
    return z;
}

RxFrame synthesize_rx(const std::vector<NormalizedPath>& paths, const std::vector<CMat>& effective,
                      const SystemConfig& cfg, bool noise_on, std::uint64_t seed, int focal_group) {
    if (paths.size() != effective.size())
        throw Error(ErrorCode::DimensionMismatch, "synthesize_rx: one effective symbol matrix per path required");
    const int nc = cfg.n_subcarriers;
    const int ns = cfg.n_symbols;
    RxFrame f;
    f.focal_group = focal_group;
    f.paths = paths;
    f.has_components = true;
    f.desired = CMat::Zero(nc, ns);
    f.multipath = CMat::Zero(nc, ns);
    f.ici = CMat::Zero(nc, ns);
    for (size_t i = 0; i < paths.size(); ++i) {
        PathSignal sig = path_signal(paths[i], effective[i], cfg);
        if (paths[i].source.focal_group == focal_group)
            f.desired += sig.clean;
        else
            f.multipath += sig.clean;
        f.ici += sig.ici;
    }
    f.noise = noise_on ? complex_gaussian(nc, ns, cfg.noise_var, seed) : CMat::Zero(nc, ns);
    f.y = f.desired + f.multipath + f.ici + f.noise;
    return f;
}

RxFrame synthesize_rx(const std::vector<NormalizedPath>& paths, const SymbolTensor& symbols,
                      const BeamformerSet& beams, const SystemConfig& cfg, bool noise_on,
                      std::uint64_t seed, int focal_group) {
    std::vector<CMat> eff;
    eff.reserve(paths.size());
    for (const auto& p : paths)
        eff.push_back(effective_symbols(p.source.aoa_rad, p.source.aod_rad, beams, symbols, cfg));
    return synthesize_rx(paths, eff, cfg, noise_on, seed, focal_group);
}

RxComponents decompose_rx(const RxFrame& frame) {
    if (!frame.has_components)
        throw Error(ErrorCode::InvalidArgument, "decompose_rx: frame carries no component bookkeeping");
    return {frame.desired, frame.multipath, frame.ici, frame.noise};
}

}  // namespace isac
