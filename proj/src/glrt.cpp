#include "isac/glrt.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>

#include "isac/fft.hpp"
#include "isac/waveform.hpp"

namespace isac {

CVec vectorize(const CMat& y) { return Eigen::Map<const CVec>(y.data(), y.size()); }

CMat unvectorize(const CVec& v, int rows, int cols) {
    if (v.size() != static_cast<Eigen::Index>(rows) * cols)
        throw Error(ErrorCode::DimensionMismatch, "unvectorize: length != rows * cols");
    return Eigen::Map<const CMat>(v.data(), rows, cols);
}

CMat template_matrix(double fd_bar, double tau_bar, const CMat& s, const SystemConfig& cfg) {
    NormalizedPath p;
    p.tau_bar = tau_bar;
    p.fd_bar = fd_bar;
    const PathSignal sig = path_signal(p, s, cfg);
    return sig.clean + sig.ici;
}

CVec build_template(double fd_bar, double tau_bar, const CMat& s, const SystemConfig& cfg) {
    return vectorize(template_matrix(fd_bar, tau_bar, s, cfg));
}

cd amp_hat(const CVec& y, const CVec& xi) {
    if (y.size() != xi.size()) throw Error(ErrorCode::DimensionMismatch, "amp_hat: length mismatch");
    const double e = xi.squaredNorm();
    if (e == 0.0) throw Error(ErrorCode::InvalidArgument, "amp_hat: zero template");
    return xi.dot(y) / e;
}

double glrt_stat(const CVec& y, const CVec& xi) {
    if (y.size() != xi.size()) throw Error(ErrorCode::DimensionMismatch, "glrt_stat: length mismatch");
    const double e = xi.squaredNorm();
    if (e == 0.0) return 0.0;
    return std::norm(xi.dot(y)) / e;
}

// ---- engine -----------------------------------------------------------------

GlrtEngine::GlrtEngine(const CMat& y, const CMat& s, const SystemConfig& cfg)
    : y_(y), s_conj_(s.conjugate()), energy_(s.squaredNorm()), cfg_(cfg) {
    if (y.rows() != cfg.n_subcarriers || y.cols() != cfg.n_symbols || s.rows() != y.rows() || s.cols() != y.cols())
        throw Error(ErrorCode::DimensionMismatch, "GLRT: frame and symbol matrices must be N_c x N_sym");
}

GlrtEngine::Slice GlrtEngine::slice(double fd_bar) const {
    const CVec di = phase_diag(PhaseKind::Ici, fd_bar, cfg_).conjugate();
    const CVec dv = phase_diag(PhaseKind::Doppler, fd_bar, cfg_).conjugate();
    CMat z = di.asDiagonal() * y_;
    fft::columns(z, false);
    Slice sl;
    sl.fd_bar = fd_bar;
    sl.r = s_conj_.cwiseProduct(z) * dv;
    return sl;
}

cd GlrtEngine::correlate(const Slice& sl, double tau_bar) const {
    const CVec dr = phase_diag(PhaseKind::Range, tau_bar, cfg_);
    return dr.transpose() * sl.r;
}

CVec GlrtEngine::correlate_coarse(const Slice& sl) const {
    CVec out = sl.r;
    fft::transform_raw({out.data(), static_cast<size_t>(out.size())}, true);
    return out;
}

double cell_tau_bar(const Cell& c, const SystemConfig& cfg) {
    return static_cast<double>(c.range_bin) / cfg.n_subcarriers;
}

double cell_fd_bar(const Cell& c, const SystemConfig& cfg) { return doppler_bin_to_fd_bar(c.doppler_bin, cfg); }

// ---- refinement ---------------------------------------------------------------

RefinedDetection local_refine(const GlrtEngine& eng, const Cell& cell, const SystemConfig& cfg) {
    if (cell.range_bin < 0 || cell.range_bin >= cfg.n_subcarriers || cell.doppler_bin < 0 ||
        cell.doppler_bin >= cfg.n_symbols)
        throw Error(ErrorCode::OutOfRange, "local_refine: cell outside the grid");
    const int mc = cfg.subgrid_range;
    const int ms = cfg.subgrid_doppler;
    const double tau0 = cell_tau_bar(cell, cfg);
    const double fd0 = cell_fd_bar(cell, cfg);
    const double dtau = 1.0 / cfg.n_subcarriers;
    const double dfd = 1.0 / (cfg.alpha * cfg.n_symbols);
    auto tau_at = [&](int i) { return tau0 + (i - mc / 2) * dtau / mc; };
    auto fd_at = [&](int j) { return fd0 + (j - ms / 2) * dfd / ms; };

    // corr(i, j) = Xi^H y at (tau_i, f_j)
    CMat corr(mc, ms);
    for (int j = 0; j < ms; ++j) {
        const auto sl = eng.slice(fd_at(j));
        for (int i = 0; i < mc; ++i) corr(i, j) = eng.correlate(sl, tau_at(i));
    }
    const double e = eng.template_energy();
    RefinedDetection best;
    best.stat = -1.0;
    for (int i = 0; i < mc; ++i)
        for (int j = 0; j < ms; ++j) {
            const double st = e > 0 ? std::norm(corr(i, j)) / e : 0.0;
            if (st > best.stat) {
                best.stat = st;
                best.tau_bar = tau_at(i);
                best.fd_bar = fd_at(j);
                best.amp = e > 0 ? corr(i, j) / e : cd(0.0, 0.0);
            }
        }
    best.eval_count = static_cast<long long>(mc) * ms;
    best.cell = cell;
    return best;
}

RefinedDetection local_refine(const CMat& y, const Cell& cell, const CMat& s, const SystemConfig& cfg) {
    return local_refine(GlrtEngine(y, s, cfg), cell, cfg);
}

RefinedDetection local_refine(const CVec& y_vec, const Cell& cell, const CMat& s, const SystemConfig& cfg) {
    return local_refine(unvectorize(y_vec, cfg.n_subcarriers, cfg.n_symbols), cell, s, cfg);
}

std::pair<Cell, double> coarse_argmax(const GlrtEngine& eng, const SystemConfig& cfg) {
    const double e = eng.template_energy();
    Cell best{0, 0};
    double best_stat = -1.0;
    RMat stat(cfg.n_subcarriers, cfg.n_symbols);
    for (int q = 0; q < cfg.n_symbols; ++q) {
        const CVec c = eng.correlate_coarse(eng.slice(doppler_bin_to_fd_bar(q, cfg)));
        for (int p = 0; p < cfg.n_subcarriers; ++p) stat(p, q) = e > 0 ? std::norm(c[p]) / e : 0.0;
    }
    for (int p = 0; p < cfg.n_subcarriers; ++p)
        for (int q = 0; q < cfg.n_symbols; ++q)
            if (stat(p, q) > best_stat) {
                best_stat = stat(p, q);
                best = {p, q};
            }
    return {best, best_stat};
}

std::vector<RefinedDetection> ml_full_search(const CMat& y, const CMat& s, const SystemConfig& cfg, int n_targets) {
    if (n_targets < 1) throw Error(ErrorCode::InvalidArgument, "ml_full_search: need at least one target");
    GlrtEngine eng(y, s, cfg);
    std::vector<RefinedDetection> out;
    const long long coarse = static_cast<long long>(cfg.n_subcarriers) * cfg.n_symbols;
    for (int c = 0; c < n_targets; ++c) {
        const auto [cell, st] = coarse_argmax(eng, cfg);
        RefinedDetection d = local_refine(eng, cell, cfg);
        d.eval_count += coarse;
        eng.subtract(d.amp * template_matrix(d.fd_bar, d.tau_bar, s, cfg));
        out.push_back(d);
    }
    return out;
}

std::vector<RefinedDetection> refine_cells(const std::vector<Cell>& cells, const CMat& y, const CMat& s,
                                           const SystemConfig& cfg) {
    const GlrtEngine eng(y, s, cfg);
    // independent refinements against one read-only engine
    std::vector<std::future<RefinedDetection>> jobs;
    jobs.reserve(cells.size());
    for (const auto& c : cells)
        jobs.push_back(std::async(std::launch::async, [&eng, &cfg, c] { return local_refine(eng, c, cfg); }));
    std::vector<RefinedDetection> out;
    out.reserve(cells.size());
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

std::vector<RefinedDetection> dcfnet_lr(const RMat& conf, const CMat& y, const CMat& s, const SystemConfig& cfg,
                                        double delta, int p_max) {
    if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::InvalidArgument, "dcfnet_lr: delta must lie in (0, 1)");
    if (p_max < 1) throw Error(ErrorCode::InvalidArgument, "dcfnet_lr: p_max must be >= 1");
    if (conf.rows() != cfg.n_subcarriers || conf.cols() != cfg.n_symbols)
        throw Error(ErrorCode::DimensionMismatch, "dcfnet_lr: confidence map shape mismatch");

    struct Cand {
        double conf;
        Cell cell;
    };
    std::vector<Cand> cands;
    for (int p = 0; p < conf.rows(); ++p)
        for (int q = 0; q < conf.cols(); ++q)
            if (conf(p, q) > delta) cands.push_back({conf(p, q), {p, q}});
    std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.conf > b.conf; });
    if (cands.size() > static_cast<size_t>(p_max)) cands.resize(static_cast<size_t>(p_max));

    std::vector<Cell> cells;
    for (const auto& c : cands) cells.push_back(c.cell);
    if (cells.empty()) return {};
    return refine_cells(cells, y, s, cfg);
}

}  // namespace isac
