// Pilot-aided channel estimators: LS, LMMSE, LS-BEM, LMMSE-BEM and the
// approximated-covariance LMMSE-BEM, plus the CE / Legendre basis designs
// and full-grid interpolation.
//
// Estimator objects do all factorizations at construction; estimate() only
// multiplies precomputed matrices. The LMMSE-BEM coefficient estimate uses
// the dual form
//     a = R_a B^H (B R_a B^H + sigma^2 I)^{-1} X^H y
// which is algebraically identical to the primal
//     a = (B^H B + sigma^2 R_a^{-1})^{-1} B^H X^H y
// whenever R_a is invertible, and extends it continuously to the
// rank-deficient R_a that the constant-PDP prior produces for N_a > L.
#pragma once

#include <optional>

#include "gfdmbem/channel.hpp"
#include "gfdmbem/core.hpp"

namespace gfdmbem {

struct PilotObservation {
    CVec y_p;           // received pilot-bin values after descaling
    CVec x_p;           // transmitted pilot symbols, |x_p| = 1
    double snr_linear;  // pilot SNR
    double beta = 1.0;  // constellation factor, 1 for QPSK

    double noise_var() const { return beta / snr_linear; }
    void validate() const;
};

struct BasisMatrix {
    enum class Kind { Ce, Lp };
    enum class Grid { Pilot, Full };

    Kind kind = Kind::Ce;
    Grid grid = Grid::Pilot;
    CMat raw;        // basis functions as defined (complex exponentials /
                     // Legendre polynomial values)
    CMat eval;       // columns used by the estimators (CE: raw; LP: raw after
                     // the pilot-grid QR change of basis)
    CMat projector;  // (eval^H eval)^{-1} eval^H, pilot grid only
    CMat lp_r;       // R factor of the pilot-grid QR (LP only)
    double condition = 0.0;

    int rows() const { return static_cast<int>(eval.rows()); }
    int n_a() const { return static_cast<int>(eval.cols()); }
};

// Complex-exponential basis: raw(q, t) = exp(-j 2 pi p_s q t / K) on the
// pilot grid; on the full grid the exponent is bin * t / grid_size, whose
// pilot rows coincide with the pilot-grid definition.
BasisMatrix ce_basis(int n_rows, int n_a, int pilot_sep, int k, BasisMatrix::Grid grid);

// Legendre basis: column t holds P_t evaluated on the row index mapped
// affinely to [-1, 1]; pilot-grid columns are orthonormalized by QR before
// use (the span is unchanged, the conditioning is not).
BasisMatrix lp_basis(int n_rows, int n_a, BasisMatrix::Grid grid);

// Pilot + full-grid pair with row-consistent evaluation (BEM estimates
// evaluated on the full grid agree with the pilot rows exactly).
struct BasisSet {
    BasisMatrix pilot;
    BasisMatrix full;
};
BasisSet make_basis_set(BasisMatrix::Kind kind, int n_a, int k, int pilot_sep,
                        int grid_size);

struct EstimateResult {
    enum class Kind { Ls, Lmmse, LsBem, LmmseBem, AlmmseBem };
    Kind kind = Kind::Ls;
    CVec h_pilot;
    CVec h_full;  // empty until interpolate_full_grid
    CVec a_hat;   // BEM kinds only, coordinates in the eval basis
};

// Multiplication counter for the complexity-contract tests.
struct OpCount {
    long long mults = 0;
};

class LsEstimator {
public:
    EstimateResult estimate(const PilotObservation& obs, OpCount* ops = nullptr) const;
};

class LmmseEstimator {
public:
    LmmseEstimator(const CovarianceMatrix& r, double noise_var);
    EstimateResult estimate(const PilotObservation& obs, OpCount* ops = nullptr) const;

private:
    CMat shrink_;  // R (R + sigma^2 I)^{-1}
    double noise_var_;
};

class LsBemEstimator {
public:
    explicit LsBemEstimator(const BasisMatrix& pilot_basis);
    EstimateResult estimate(const PilotObservation& obs, OpCount* ops = nullptr) const;

private:
    const BasisMatrix* basis_;
};

class LmmseBemEstimator {
public:
    LmmseBemEstimator(const BasisMatrix& pilot_basis, const CMat& r_a, double noise_var,
                      EstimateResult::Kind kind = EstimateResult::Kind::LmmseBem);
    EstimateResult estimate(const PilotObservation& obs, OpCount* ops = nullptr) const;
    bool fell_back_to_ls_bem() const { return fallback_; }

private:
    const BasisMatrix* basis_;
    CMat w_;  // R_a B^H (B R_a B^H + sigma^2 I)^{-1}
    double noise_var_;
    EstimateResult::Kind kind_;
    bool fallback_ = false;
};

// Algorithm-2 composition: approximated covariance -> coefficient covariance
// -> LMMSE-BEM. All channel-independent factors precomputed at construction.
class AlmmseBemEstimator {
public:
    AlmmseBemEstimator(const BasisMatrix& pilot_basis, const CovarianceMatrix& approx_r,
                       double noise_var);
    EstimateResult estimate(const PilotObservation& obs, OpCount* ops = nullptr) const;

private:
    LmmseBemEstimator inner_;
};

// R_a = (B^H B)^{-1} B^H R_h B (B^H B)^{-1}, symmetrized and eigenvalue-floored
// at zero (a warning is logged when the repair exceeds 1e-10).
CMat coefficient_covariance(const CovarianceMatrix& r_h, const BasisMatrix& pilot_basis);

// One-shot wrappers mirroring the estimator operations.
EstimateResult ls_estimate(const PilotObservation& obs, OpCount* ops = nullptr);
EstimateResult lmmse_estimate(const PilotObservation& obs, const CovarianceMatrix& r,
                              OpCount* ops = nullptr);
EstimateResult ls_bem_estimate(const PilotObservation& obs, const BasisMatrix& pilot_basis,
                               OpCount* ops = nullptr);
EstimateResult lmmse_bem_estimate(const PilotObservation& obs, const BasisMatrix& pilot_basis,
                                  const CMat& r_a, OpCount* ops = nullptr);
EstimateResult almmse_bem_estimate(const PilotObservation& obs, const BasisMatrix& pilot_basis,
                                   const CovarianceMatrix& approx_r, OpCount* ops = nullptr);

struct InterpolationContext {
    int grid_size = 0;  // K (OFDM) or N (GFDM)
    int k = 0;
    int pilot_sep = 0;
    const BasisSet* basis = nullptr;  // required for BEM kinds
};

// BEM kinds evaluate the full-grid basis with the same a_hat; LS/LMMSE use
// delay-domain interpolation (inverse DFT of the pilot estimates onto N_p
// delay taps, re-evaluated on the full grid), exact for integer delays
// below N_p samples.
void interpolate_full_grid(EstimateResult& result, const InterpolationContext& ctx);

}  // namespace gfdmbem
