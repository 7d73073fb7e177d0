#pragma once

#include <cstdint>
#include <vector>

#include "isac/config.hpp"

namespace isac {

/// Frequency-domain downlink channels. h[n] is N_T x K, column k = h_k^(n).
struct CommChannelSet {
    std::vector<CMat> h;
    RVec noise_var;  // sigma_k^2 per user
    int users() const { return h.empty() ? 0 : static_cast<int>(h.front().cols()); }
    int subcarriers() const { return static_cast<int>(h.size()); }
};

/// Clustered-ray channel: one LOS cluster plus `clusters - 1` scattered
/// clusters around each user's bearing, free-space path loss at `range_m`.
struct UserChannelSpec {
    int count = 4;
    double range_m = 40.0;
    int clusters = 3;
    int rays_per_cluster = 8;
    double angle_spread_rad = 5.0 * kPi / 180.0;
    std::uint64_t seed = 7;
};

CommChannelSet gen_channels(const SystemConfig& cfg, const UserChannelSpec& spec);

/// Per-subcarrier problem data shared by the update steps.
struct SubcarrierProblem {
    CMat h;                   // N_T x K
    RVec noise;               // N_c * sigma_k^2, the SINR noise term
    std::vector<CVec> focal;  // a_T(phi_l)
    double n_c = 1.0;         // the 1/N_c factor of the beampattern gain
    double power = 0.0;       // P_BS^(n)
    double gain_req = 0.0;    // P_T,req^(n)
};

SubcarrierProblem make_subproblem(const CommChannelSet& ch, int n, const std::vector<double>& focal_rad,
                                  const SystemConfig& cfg);

/// Lagrange multipliers of the power and beampattern constraints.
struct Multipliers {
    double lambda = 0.0;
    RVec mu;
};

struct TxSolution {
    std::vector<CMat> v;      // per subcarrier, N_T x K
    std::vector<RVec> beta;
    std::vector<CVec> xi;
    std::vector<Multipliers> mult;
    std::vector<std::vector<double>> trace;  // per subcarrier sum-rate (nats) after each round
    std::vector<double> total_trace;         // sum over subcarriers, padded with final values
    int iterations = 0;
    int safeguard_hits = 0;   // rounds where the v-step failed to improve and was rejected
    double max_gain = 0.0;    // probe result, per subcarrier
};

// ---- scalar metrics ------------------------------------------------------

double user_sinr(const SubcarrierProblem& sp, const CMat& v, int k);
double user_sinr(const CommChannelSet& ch, const TxSolution& sol, int k, int n, const SystemConfig& cfg);
double sum_rate(const SubcarrierProblem& sp, const CMat& v);  // nats

/// (1/N_c) sum_k |a^H v_k|^2
double beampattern_gain(const CMat& v, const CVec& a, double n_c);
double beampattern_gain(const TxSolution& sol, double angle_rad, int n, const SystemConfig& cfg);

/// Objective of the Lagrangian-dual / quadratic-transform reformulation.
double reformulated_objective(const SubcarrierProblem& sp, const CMat& v, const RVec& beta, const CVec& xi);

// ---- alternating steps ---------------------------------------------------

/// beta_k = gamma_k.
RVec update_beta(const SubcarrierProblem& sp, const CMat& v);

/// xi_k = sqrt(1 + beta_k) h_k^H v_k / (sum_p |h_k^H v_p|^2 + N_c sigma_k^2).
CVec update_xi(const SubcarrierProblem& sp, const CMat& v, const RVec& beta);

/// Closed-form v_k = xi_k sqrt(1+beta_k) M^-1 h_k with
/// M = sum_p |xi_p|^2 h_p h_p^H + lambda I - (1/N_c) sum_l mu_l a_l a_l^H.
/// Zero eigen-directions of M that carry no signal are pseudo-inverted.
/// Throws Error(Singular) when M is singular along a signal direction.
CMat update_v(const SubcarrierProblem& sp, const RVec& beta, const CVec& xi, const Multipliers& m);

/// Smallest lambda >= 0 meeting sum_i ups_i / (eig_i + lambda)^2 <= P with
/// equality when lambda > 0. Entries with ups_i == 0 are ignored.
/// Throws Error(Infeasible) when no admissible root exists.
double solve_power_equation(const RVec& eig, const RVec& ups, double power);

double solve_lambda(const SubcarrierProblem& sp, const RVec& beta, const CVec& xi, const RVec& mu);

/// Multiplier of focal angle l with the others (and lambda) fixed.
/// Returns 0 when the constraint already holds at mu_l = 0.
double solve_mu(const SubcarrierProblem& sp, const RVec& beta, const CVec& xi, double lambda,
                const RVec& mu, int l);

/// Joint multipliers. lambda is eliminated through the power equation and each
/// mu_l found by a monotone line search on its gain, cyclic over l.
Multipliers solve_multipliers(const SubcarrierProblem& sp, const RVec& beta, const CVec& xi,
                              const Multipliers& warm);

/// One v-update of the alternating loop: multipliers plus the closed form,
/// or, in the rank-deficient case where lambda = 0 already fits the budget,
/// the unconstrained optimum completed along the null space of A.
struct VStep {
    CMat v;
    Multipliers mult;
    bool null_completed = false;
};
VStep solve_v_step(const SubcarrierProblem& sp, const RVec& beta, const CVec& xi, const Multipliers& warm);

// ---- full solver ---------------------------------------------------------

struct TxOptions {
    int max_iter = 50;
    double tol = 1e-5;          // relative sum-rate change
    bool sensing_only = false;  // drop the rate term, maximize beampattern gain
};

/// Largest per-subcarrier beampattern gain sum over focal angles reachable
/// with the power budget: P * lambda_max(sum_l a_l a_l^H) / N_c.
double max_sensing_gain(const SubcarrierProblem& sp);

TxSolution optimize_subcarrier(const SubcarrierProblem& sp, const TxOptions& opt);

/// Runs the alternating optimization independently on every subcarrier.
/// Throws Error(Infeasible) if the gain requirement exceeds what the budget
/// can reach, with the achievable gain in the message.
TxSolution optimize(const CommChannelSet& ch, const SystemConfig& cfg, const std::vector<double>& focal_rad,
                    const TxOptions& opt = {});

}  // namespace isac
