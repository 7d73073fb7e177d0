#pragma once

#include <vector>

#include "isac/config.hpp"
#include "isac/detection.hpp"

namespace isac {

struct RefinedDetection {
    double tau_bar = 0.0;
    double fd_bar = 0.0;
    cd amp{0.0, 0.0};
    double stat = 0.0;
    long long eval_count = 0;
    Cell cell;  // coarse cell the refinement was centred on
};

/// Column stacking: column mu of Y fills [mu N_c, (mu+1) N_c).
CVec vectorize(const CMat& y);
CMat unvectorize(const CVec& v, int rows, int cols);

/// D_I(f) F^-1 D_R^*(tau) S D_v(f) as an N_c x N_sym matrix.
CMat template_matrix(double fd_bar, double tau_bar, const CMat& s, const SystemConfig& cfg);
/// vectorize(template_matrix(...)).
CVec build_template(double fd_bar, double tau_bar, const CMat& s, const SystemConfig& cfg);

/// (Xi^H y) / ||Xi||^2. Throws Error(InvalidArgument) on a zero template.
cd amp_hat(const CVec& y, const CVec& xi);
/// |Xi^H y|^2 / ||Xi||^2
double glrt_stat(const CVec& y, const CVec& xi);

/// Evaluates Xi^H y for many (f, tau) hypotheses against one frame without
/// forming templates: per Doppler hypothesis one column-FFT pass collapses
/// the frame to a length-N_c vector, after which each delay is a dot product
/// (or one FFT for the whole coarse delay grid).
class GlrtEngine {
public:
    GlrtEngine(const CMat& y, const CMat& s, const SystemConfig& cfg);

    struct Slice {
        double fd_bar = 0.0;
        CVec r;  // r[n] = sum_mu conj(S[n,mu]) Z_f[n,mu] exp(-j 2 pi f alpha mu)
    };
    Slice slice(double fd_bar) const;
    /// Xi^H y at delay tau for the slice's Doppler.
    cd correlate(const Slice& sl, double tau_bar) const;
    /// Xi^H y at tau = p / N_c for every p.
    CVec correlate_coarse(const Slice& sl) const;

    double template_energy() const { return energy_; }
    const CMat& frame() const { return y_; }
    void subtract(const CMat& m) { y_ -= m; }

private:
    CMat y_;
    CMat s_conj_;
    double energy_;
    SystemConfig cfg_;
};

/// Centre of coarse cell `c`: tau = p / N_c, f = signed q / (alpha N_sym).
double cell_tau_bar(const Cell& c, const SystemConfig& cfg);
double cell_fd_bar(const Cell& c, const SystemConfig& cfg);

/// M_c x M_sym sub-grid over +-1/2 cell around the cell centre; offsets
/// (i - M/2)/M cells. Ties go to the smaller (tau, f).
RefinedDetection local_refine(const GlrtEngine& eng, const Cell& cell, const SystemConfig& cfg);
RefinedDetection local_refine(const CMat& y, const Cell& cell, const CMat& s, const SystemConfig& cfg);
RefinedDetection local_refine(const CVec& y_vec, const Cell& cell, const CMat& s, const SystemConfig& cfg);

/// Coarse-grid argmax of the statistic, returned as (cell, stat).
std::pair<Cell, double> coarse_argmax(const GlrtEngine& eng, const SystemConfig& cfg);

/// C rounds of coarse search, sub-grid refinement and cancellation.
std::vector<RefinedDetection> ml_full_search(const CMat& y, const CMat& s, const SystemConfig& cfg, int n_targets);

/// Cells with confidence > delta, highest first, at most p_max of them, each
/// refined independently against the same frame.
std::vector<RefinedDetection> dcfnet_lr(const RMat& conf, const CMat& y, const CMat& s, const SystemConfig& cfg,
                                        double delta = 0.5, int p_max = 10);

/// Independent refinement of an explicit seed list (e.g. CFAR detections).
std::vector<RefinedDetection> refine_cells(const std::vector<Cell>& cells, const CMat& y, const CMat& s,
                                           const SystemConfig& cfg);

}  // namespace isac
