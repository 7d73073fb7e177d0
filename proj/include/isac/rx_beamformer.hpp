#pragma once

#include <vector>

#include "isac/tx_beamformer.hpp"

namespace isac {

struct RxSolution {
    CVec u;                  // unit norm
    double eigenvalue = 0.0; // maximal Rayleigh quotient
    RVec gain;               // u^H B_l u per focal angle
    bool degenerate = false; // B was zero, u is e_1
};

/// B = sum_l |a_l|^2 sum_p A_l Q_p A_l^H with A_l = a_R(phi_l) a_T^H(phi_l)
/// and Q_p = sum_k v_k^(p) v_k^(p)H. Empty `gains` means unit gains.
CMat build_B(const TxSolution& tx, const std::vector<double>& focal_rad, const RVec& gains, const SystemConfig& cfg);

/// Per-angle term of build_B, without the |a_l|^2 weight.
CMat focal_term(const TxSolution& tx, double focal_rad, const SystemConfig& cfg);

RxSolution principal_eigvec(const CMat& B);

/// principal_eigvec(build_B(...)) plus per-angle achieved gains.
RxSolution design_rx(const TxSolution& tx, const std::vector<double>& focal_rad, const RVec& gains,
                     const SystemConfig& cfg);

}  // namespace isac
