#include "isac/detection.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace isac {

GroundTruthMap ground_truth(const std::vector<NormalizedPath>& targets, const SystemConfig& cfg) {
    GroundTruthMap g;
    g.grid = RMat::Zero(cfg.n_subcarriers, cfg.n_symbols);
    g.paths = targets;
    for (const auto& t : targets) {
        const Cell c = cell_of(t, cfg);
        if (g.grid(c.range_bin, c.doppler_bin) == 0.0) {
            g.grid(c.range_bin, c.doppler_bin) = 1.0;
            g.cells.push_back(c);
        }
    }
    return g;
}

int cfar_training_cells(int guard, int train) {
    const int outer = 2 * (guard + train) + 1;
    const int inner = 2 * guard + 1;
    return outer * outer - inner * inner;
}

double cfar_alpha(int n_train, double pfa) {
    return n_train * (std::pow(pfa, -1.0 / n_train) - 1.0);
}

namespace {

// Summed-area table of a circularly padded power map; box sums in O(1).
class WrappedSat {
public:
    WrappedSat(const RMat& power, int pad) : rows_(power.rows()), cols_(power.cols()), pad_(pad) {
        const Eigen::Index er = rows_ + 2 * pad;
        const Eigen::Index ec = cols_ + 2 * pad;
        sat_ = RMat::Zero(er + 1, ec + 1);
        for (Eigen::Index i = 0; i < er; ++i) {
            const Eigen::Index si = wrap_index(i - pad, static_cast<int>(rows_));
            double run = 0.0;
            for (Eigen::Index j = 0; j < ec; ++j) {
                run += power(si, wrap_index(j - pad, static_cast<int>(cols_)));
                sat_(i + 1, j + 1) = sat_(i, j + 1) + run;
            }
        }
    }
    // sum over rows [r-h, r+h], cols [c-h, c+h] of the original map, wrapped
    double box(Eigen::Index r, Eigen::Index c, int h) const {
        const Eigen::Index r0 = r + pad_ - h, r1 = r + pad_ + h + 1;
        const Eigen::Index c0 = c + pad_ - h, c1 = c + pad_ + h + 1;
        return sat_(r1, c1) - sat_(r0, c1) - sat_(r1, c0) + sat_(r0, c0);
    }

private:
    Eigen::Index rows_, cols_;
    int pad_;
    RMat sat_;
};

}  // namespace

DetectionSet ca_cfar(const RMat& mag, const CfarParams& p) {
    if (p.guard < 1 || p.train < 1) throw Error(ErrorCode::InvalidArgument, "ca_cfar: guard and train must be >= 1");
    if (!(p.pfa > 0.0 && p.pfa < 1.0)) throw Error(ErrorCode::InvalidArgument, "ca_cfar: pfa must lie in (0, 1)");
    const int half = p.guard + p.train;
    if (2 * half + 1 > mag.rows() || 2 * half + 1 > mag.cols())
        throw Error(ErrorCode::InvalidArgument, "ca_cfar: window larger than the map");

    const RMat power = mag.array().square().matrix();
    const WrappedSat sat(power, half);
    const int n_t = cfar_training_cells(p.guard, p.train);
    const double alpha = cfar_alpha(n_t, p.pfa);

    DetectionSet out;
    out.rows = static_cast<int>(mag.rows());
    out.cols = static_cast<int>(mag.cols());
    for (Eigen::Index c = 0; c < mag.cols(); ++c)
        for (Eigen::Index r = 0; r < mag.rows(); ++r) {
            const double noise = (sat.box(r, c, half) - sat.box(r, c, p.guard)) / n_t;
            const double x = power(r, c);
            if (x > alpha * noise && x > 0.0)
                out.items.push_back({Cell{static_cast<int>(r), static_cast<int>(c)}, x, {}, {}, {}});
        }
    return out;
}

MatchResult match_and_score(const DetectionSet& det, const GroundTruthMap& truth, int tol_cells) {
    MatchResult m;
    m.targets = static_cast<int>(truth.cells.size());
    const int rows = truth.grid.rows() ? static_cast<int>(truth.grid.rows()) : det.rows;
    const int cols = truth.grid.cols() ? static_cast<int>(truth.grid.cols()) : det.cols;

    std::vector<size_t> order(det.items.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        const auto& da = det.items[a];
        const auto& db = det.items[b];
        if (da.score != db.score) return da.score > db.score;
        if (da.cell.range_bin != db.cell.range_bin) return da.cell.range_bin < db.cell.range_bin;
        return da.cell.doppler_bin < db.cell.doppler_bin;
    });

    std::vector<bool> used(truth.cells.size(), false);
    for (size_t idx : order) {
        const Cell& c = det.items[idx].cell;
        int best = -1;
        int best_d = tol_cells + 1;
        for (size_t t = 0; t < truth.cells.size(); ++t) {
            if (used[t]) continue;
            const int dr = std::abs(c.range_bin - truth.cells[t].range_bin);
            int dd = std::abs(c.doppler_bin - truth.cells[t].doppler_bin);
            if (cols > 0) dd = std::min(dd, cols - dd);
            if (dr > tol_cells || dd > tol_cells) continue;
            const int d = std::max(dr, dd);
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(t);
            }
        }
        if (best >= 0) {
            used[static_cast<size_t>(best)] = true;
            ++m.true_pos;
            m.pairs.emplace_back(static_cast<int>(idx), best);
        } else {
            ++m.false_pos;
        }
    }
    m.pd = m.targets > 0 ? static_cast<double>(m.true_pos) / m.targets : 0.0;
    const double cells = static_cast<double>(rows) * cols;
    m.pfa = cells > 0 ? m.false_pos / cells : 0.0;
    return m;
}

namespace {

std::vector<RocPoint> pooled(size_t n_points, const std::vector<GroundTruthMap>& truths,
                             const std::function<DetectionSet(size_t, size_t)>& detect, const std::vector<double>& keys,
                             int tol) {
    std::vector<RocPoint> out;
    for (size_t k = 0; k < n_points; ++k) {
        long tp = 0, fp = 0, targets = 0;
        double cells = 0.0;
        for (size_t f = 0; f < truths.size(); ++f) {
            const DetectionSet d = detect(f, k);
            const MatchResult m = match_and_score(d, truths[f], tol);
            tp += m.true_pos;
            fp += m.false_pos;
            targets += m.targets;
            cells += static_cast<double>(truths[f].grid.size());
        }
        out.push_back({keys[k], targets ? static_cast<double>(tp) / targets : 0.0, cells > 0 ? fp / cells : 0.0});
    }
    return out;
}

}  // namespace

std::vector<RocPoint> roc_sweep(const std::vector<RMat>& scores, const std::vector<GroundTruthMap>& truths,
                                const std::vector<double>& thresholds, int tol_cells) {
    if (thresholds.size() < 2) throw Error(ErrorCode::InvalidArgument, "roc_sweep: need at least two thresholds");
    if (scores.size() != truths.size()) throw Error(ErrorCode::DimensionMismatch, "roc_sweep: one truth per score map");
    for (size_t f = 0; f < scores.size(); ++f)
        if (scores[f].rows() != truths[f].grid.rows() || scores[f].cols() != truths[f].grid.cols())
            throw Error(ErrorCode::DimensionMismatch, "roc_sweep: score and truth shapes differ");
    auto detect = [&](size_t f, size_t k) {
        DetectionSet d;
        d.rows = static_cast<int>(scores[f].rows());
        d.cols = static_cast<int>(scores[f].cols());
        for (Eigen::Index c = 0; c < scores[f].cols(); ++c)
            for (Eigen::Index r = 0; r < scores[f].rows(); ++r)
                if (scores[f](r, c) > thresholds[k])
                    d.items.push_back({Cell{static_cast<int>(r), static_cast<int>(c)}, scores[f](r, c), {}, {}, {}});
        return d;
    };
    return pooled(thresholds.size(), truths, detect, thresholds, tol_cells);
}

std::vector<RocPoint> roc_sweep_cfar(const std::vector<RMat>& maps, const std::vector<GroundTruthMap>& truths,
                                     const std::vector<double>& pfas, const CfarParams& base, int tol_cells) {
    if (pfas.size() < 2) throw Error(ErrorCode::InvalidArgument, "roc_sweep: need at least two pfa values");
    if (maps.size() != truths.size()) throw Error(ErrorCode::DimensionMismatch, "roc_sweep: one truth per map");
    auto detect = [&](size_t f, size_t k) {
        CfarParams p = base;
        p.pfa = pfas[k];
        return ca_cfar(maps[f], p);
    };
    return pooled(pfas.size(), truths, detect, pfas, tol_cells);
}

namespace {

struct PairErr {
    double dist;
    size_t e, t;
};

}  // namespace

void RmseAccumulator::add(const std::vector<RangeVel>& estimates, const std::vector<RangeVel>& truths,
                          const SystemConfig& cfg) {
    if (truths.empty()) throw Error(ErrorCode::InvalidArgument, "rmse: truth list is empty");
    std::vector<PairErr> pairs;
    for (size_t e = 0; e < estimates.size(); ++e)
        for (size_t t = 0; t < truths.size(); ++t) {
            const double dr = (estimates[e].range_m - truths[t].range_m) / cfg.range_res;
            const double dv = (estimates[e].vel_mps - truths[t].vel_mps) / cfg.velocity_res;
            pairs.push_back({dr * dr + dv * dv, e, t});
        }
    std::stable_sort(pairs.begin(), pairs.end(), [](const PairErr& a, const PairErr& b) { return a.dist < b.dist; });
    std::vector<bool> e_used(estimates.size(), false), t_used(truths.size(), false);
    for (const auto& p : pairs) {
        if (e_used[p.e] || t_used[p.t]) continue;
        e_used[p.e] = t_used[p.t] = true;
        const double dr = estimates[p.e].range_m - truths[p.t].range_m;
        const double dv = estimates[p.e].vel_mps - truths[p.t].vel_mps;
        sum_r2 += dr * dr;
        sum_v2 += dv * dv;
        ++count;
    }
    for (bool u : t_used)
        if (!u) {
            sum_r2 += cfg.range_res * cfg.range_res;
            sum_v2 += cfg.velocity_res * cfg.velocity_res;
            ++count;
            ++missed;
        }
}

RmseResult RmseAccumulator::result() const {
    RmseResult r;
    if (count > 0) {
        r.range_rmse = std::sqrt(sum_r2 / count);
        r.vel_rmse = std::sqrt(sum_v2 / count);
    }
    r.matched = count - missed;
    r.missed = missed;
    return r;
}

RmseResult rmse(const std::vector<RangeVel>& estimates, const std::vector<RangeVel>& truths, const SystemConfig& cfg) {
    RmseAccumulator acc;
    acc.add(estimates, truths, cfg);
    return acc.result();
}

}  // namespace isac
