#pragma once

#include <optional>
#include <vector>

#include "isac/config.hpp"

namespace isac {

struct GroundTruthMap {
    RMat grid;                          // 1 at target cells, 0 elsewhere
    std::vector<Cell> cells;            // distinct target cells, first-seen order
    std::vector<NormalizedPath> paths;
};

/// Binary map of cell_of(path); paths sharing a cell collapse to one entry.
GroundTruthMap ground_truth(const std::vector<NormalizedPath>& targets, const SystemConfig& cfg);

struct Detection {
    Cell cell;
    double score = 0.0;
    // continuous refinement, when available
    std::optional<double> tau_bar;
    std::optional<double> fd_bar;
    std::optional<cd> amp;
};

struct DetectionSet {
    int rows = 0;
    int cols = 0;
    std::vector<Detection> items;
};

struct CfarParams {
    int guard = 2;   // per dimension, each side
    int train = 8;   // per dimension, each side
    double pfa = 1e-3;
};

/// Training cells of a square window with the given guard/train sizes.
int cfar_training_cells(int guard, int train);
/// alpha = N_t (pfa^(-1/N_t) - 1), the CA threshold factor on squared magnitudes.
double cfar_alpha(int n_train, double pfa);

/// 2-D cell-averaging CFAR on |mag|^2 with circular windows in both axes.
/// Throws Error(InvalidArgument) on bad parameters or a window larger than the map.
DetectionSet ca_cfar(const RMat& mag, const CfarParams& p = {});

struct MatchResult {
    double pd = 0.0;
    double pfa = 0.0;
    int true_pos = 0;
    int false_pos = 0;
    int targets = 0;
    std::vector<std::pair<int, int>> pairs;  // (detection index, truth index)
};

/// Greedy score-descending matching, +-tol cells per axis (Doppler wraps).
MatchResult match_and_score(const DetectionSet& det, const GroundTruthMap& truth, int tol_cells = 1);

struct RocPoint {
    double threshold = 0.0;
    double pd = 0.0;
    double pfa = 0.0;
};

/// Every cell scoring strictly above the threshold is a detection. Counts
/// are pooled over all frames. Throws on fewer than two thresholds.
std::vector<RocPoint> roc_sweep(const std::vector<RMat>& scores, const std::vector<GroundTruthMap>& truths,
                                const std::vector<double>& thresholds, int tol_cells = 1);

/// Same pooling, but detections come from ca_cfar at each pfa value.
std::vector<RocPoint> roc_sweep_cfar(const std::vector<RMat>& maps, const std::vector<GroundTruthMap>& truths,
                                     const std::vector<double>& pfas, const CfarParams& base = {}, int tol_cells = 1);

struct RangeVel {
    double range_m = 0.0;
    double vel_mps = 0.0;
};

struct RmseResult {
    double range_rmse = 0.0;
    double vel_rmse = 0.0;
    int matched = 0;
    int missed = 0;
};

/// Greedy nearest pairs in (range/range_res, vel/velocity_res) units.
/// A truth left unmatched contributes one full cell (range_res, velocity_res).
RmseResult rmse(const std::vector<RangeVel>& estimates, const std::vector<RangeVel>& truths, const SystemConfig& cfg);

/// Pools squared errors from several trials before taking the root.
struct RmseAccumulator {
    double sum_r2 = 0.0;
    double sum_v2 = 0.0;
    int count = 0;
    int missed = 0;
    void add(const std::vector<RangeVel>& estimates, const std::vector<RangeVel>& truths, const SystemConfig& cfg);
    RmseResult result() const;
};

}  // namespace isac
