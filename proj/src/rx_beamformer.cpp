#include "isac/rx_beamformer.hpp"

#include <Eigen/Eigenvalues>

namespace isac {

CMat focal_term(const TxSolution& tx, double focal_rad, const SystemConfig& cfg) {
    const CVec a_t = steering_vector(focal_rad, cfg.n_tx, cfg.antenna_sep);
    const CVec a_r = steering_vector(focal_rad, cfg.n_rx, cfg.antenna_sep);
    // A Q A^H = a_R (a_T^H Q a_T) a_R^H, and a_T^H Q a_T = sum_k |a_T^H v_k|^2
    double w = 0.0;
    for (const auto& v : tx.v) {
        if (v.rows() != cfg.n_tx) throw Error(ErrorCode::DimensionMismatch, "build_B: transmit matrix must be n_tx x K");
        w += (a_t.adjoint() * v).squaredNorm();
    }
    return w * a_r * a_r.adjoint();
}

CMat build_B(const TxSolution& tx, const std::vector<double>& focal_rad, const RVec& gains, const SystemConfig& cfg) {
    if (gains.size() != 0 && gains.size() != static_cast<Eigen::Index>(focal_rad.size()))
        throw Error(ErrorCode::DimensionMismatch, "build_B: one gain per focal angle");
    CMat b = CMat::Zero(cfg.n_rx, cfg.n_rx);
    for (size_t l = 0; l < focal_rad.size(); ++l) {
        const double g = gains.size() ? gains[static_cast<Eigen::Index>(l)] : 1.0;
        b += g * focal_term(tx, focal_rad[l], cfg);
    }
    return 0.5 * (b + b.adjoint());
}

RxSolution principal_eigvec(const CMat& B) {
    if (B.rows() != B.cols() || B.rows() == 0) throw Error(ErrorCode::DimensionMismatch, "principal_eigvec: B must be square");
    RxSolution out;
    const double scale = B.cwiseAbs().maxCoeff();
    if (scale == 0.0) {
        out.u = CVec::Zero(B.rows());
        out.u[0] = 1.0;
        out.degenerate = true;
        return out;
    }
    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (B + B.adjoint()));
    if (es.info() != Eigen::Success) throw Error(ErrorCode::Internal, "principal_eigvec: eigensolver failed");
    const Eigen::Index top = B.rows() - 1;
    out.u = es.eigenvectors().col(top).normalized();
    // fix the phase so the largest entry is real positive
    Eigen::Index imax = 0;
    out.u.cwiseAbs().maxCoeff(&imax);
    out.u *= std::conj(out.u[imax]) / std::abs(out.u[imax]);
    out.eigenvalue = es.eigenvalues()[top];
    return out;
}

RxSolution design_rx(const TxSolution& tx, const std::vector<double>& focal_rad, const RVec& gains,
                     const SystemConfig& cfg) {
    RxSolution s = principal_eigvec(build_B(tx, focal_rad, gains, cfg));
    s.gain.resize(static_cast<Eigen::Index>(focal_rad.size()));
    for (size_t l = 0; l < focal_rad.size(); ++l)
        s.gain[static_cast<Eigen::Index>(l)] = std::real(s.u.dot(focal_term(tx, focal_rad[l], cfg) * s.u));
    return s;
}

}  // namespace isac
