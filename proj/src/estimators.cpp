#include "gfdmbem/estimators.hpp"

#include <cmath>
#include <iostream>
#include <numbers>
#include <stdexcept>

namespace gfdmbem {

namespace {

Cplx unit_phasor(double phi) { return Cplx(std::cos(phi), std::sin(phi)); }

CVec counted_matvec(const CMat& a, const CVec& x, OpCount* ops) {
    CVec y = CVec::Zero(a.rows());
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
        const Cplx xc = x(c);
        for (Eigen::Index r = 0; r < a.rows(); ++r) {
            y(r) += a(r, c) * xc;
        }
    }
    if (ops != nullptr) ops->mults += static_cast<long long>(a.rows()) * a.cols();
    return y;
}

void check_hermitian(const CMat& r, const char* who) {
    if (r.rows() != r.cols() || (r - r.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
        throw std::invalid_argument(std::string(who) + ": covariance must be Hermitian");
    }
}

double legendre_value(int degree, double x) {
    if (degree == 0) return 1.0;
    if (degree == 1) return x;
    double pm2 = 1.0, pm1 = x, p = x;
    for (int t = 2; t <= degree; ++t) {
        p = ((2.0 * t - 1.0) * x * pm1 - (t - 1.0) * pm2) / t;
        pm2 = pm1;
        pm1 = p;
    }
    return p;
}

void finalize_basis(BasisMatrix& b) {
    Eigen::JacobiSVD<CMat> svd(b.raw);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= sv(0) * 1e-13) {
        throw std::invalid_argument("basis: rank-deficient basis matrix");
    }
    b.condition = sv(0) / sv(sv.size() - 1);
    if (b.grid == BasisMatrix::Grid::Pilot) {
        b.projector = (b.eval.adjoint() * b.eval).ldlt().solve(b.eval.adjoint());
    }
}

}  // namespace

void PilotObservation::validate() const {
    if (y_p.size() != x_p.size()) throw std::invalid_argument("observation: size mismatch");
    if (!(snr_linear > 0.0)) throw std::invalid_argument("observation: SNR must be > 0");
    for (Eigen::Index i = 0; i < x_p.size(); ++i) {
        if (std::abs(std::abs(x_p(i)) - 1.0) > 1e-9) {
            throw std::invalid_argument("observation: pilots must have unit modulus");
        }
    }
}

BasisMatrix ce_basis(int n_rows, int n_a, int pilot_sep, int k, BasisMatrix::Grid grid) {
    if (n_a > n_rows) throw std::invalid_argument("ce_basis: N_a must not exceed the row count");
    if (n_a < 1) throw std::invalid_argument("ce_basis: N_a must be >= 1");
    BasisMatrix b;
    b.kind = BasisMatrix::Kind::Ce;
    b.grid = grid;
    b.raw = CMat(n_rows, n_a);
    for (int q = 0; q < n_rows; ++q) {
        // pilot grid: exponent p_s q t / K; full grid: bin q, exponent q t / grid_size
        const double step = (grid == BasisMatrix::Grid::Pilot)
                                ? static_cast<double>(pilot_sep) * q / k
                                : static_cast<double>(q) / n_rows;
        for (int t = 0; t < n_a; ++t) {
            b.raw(q, t) = unit_phasor(-2.0 * std::numbers::pi * step * t);
        }
    }
    b.eval = b.raw;
    finalize_basis(b);
    return b;
}

BasisMatrix lp_basis(int n_rows, int n_a, BasisMatrix::Grid grid) {
    if (n_a > n_rows) throw std::invalid_argument("lp_basis: N_a must not exceed the row count");
    if (n_a < 1) throw std::invalid_argument("lp_basis: N_a must be >= 1");
    BasisMatrix b;
    b.kind = BasisMatrix::Kind::Lp;
    b.grid = grid;
    b.raw = CMat(n_rows, n_a);
    for (int q = 0; q < n_rows; ++q) {
        const double x = (n_rows == 1) ? -1.0 : -1.0 + 2.0 * q / (n_rows - 1);
        for (int t = 0; t < n_a; ++t) {
            b.raw(q, t) = legendre_value(t, x);
        }
    }
    if (grid == BasisMatrix::Grid::Pilot) {
        Eigen::HouseholderQR<CMat> qr(b.raw);
        CMat q_full = qr.householderQ();
        b.eval = q_full.leftCols(n_a);
        b.lp_r = qr.matrixQR().topRows(n_a).triangularView<Eigen::Upper>();
    } else {
        b.eval = b.raw;  // rebased against the pilot R factor by make_basis_set
    }
    finalize_basis(b);
    return b;
}

BasisSet make_basis_set(BasisMatrix::Kind kind, int n_a, int k, int pilot_sep,
                        int grid_size) {
    const int n_p = k / pilot_sep;
    BasisSet set;
    if (kind == BasisMatrix::Kind::Ce) {
        set.pilot = ce_basis(n_p, n_a, pilot_sep, k, BasisMatrix::Grid::Pilot);
        set.full = ce_basis(grid_size, n_a, pilot_sep, k, BasisMatrix::Grid::Full);
        return set;
    }
    set.pilot = lp_basis(n_p, n_a, BasisMatrix::Grid::Pilot);
    // Full-grid Legendre rows evaluated on the same affine map as the pilot
    // rows (pilot bin q sits at grid position spacing*q), then pushed through
    // the pilot QR so that full-grid rows at pilot bins equal the pilot rows.
    const int spacing = grid_size / k * pilot_sep;
    BasisMatrix full;
    full.kind = BasisMatrix::Kind::Lp;
    full.grid = BasisMatrix::Grid::Full;
    full.raw = CMat(grid_size, n_a);
    for (int bin = 0; bin < grid_size; ++bin) {
        const double x = -1.0 + 2.0 * bin / (static_cast<double>(spacing) * (n_p - 1));
        for (int t = 0; t < n_a; ++t) {
            full.raw(bin, t) = legendre_value(t, x);
        }
    }
    full.eval = set.pilot.lp_r.triangularView<Eigen::Upper>()
                    .transpose()
                    .solve(full.raw.transpose())
                    .transpose();
    full.condition = set.pilot.condition;
    set.full = full;
    return set;
}

EstimateResult LsEstimator::estimate(const PilotObservation& obs, OpCount* ops) const {
    if (obs.y_p.size() != obs.x_p.size()) {
        throw std::invalid_argument("ls_estimate: observation size mismatch");
    }
    EstimateResult r;
    r.kind = EstimateResult::Kind::Ls;
    r.h_pilot = CVec(obs.y_p.size());
    for (Eigen::Index i = 0; i < obs.y_p.size(); ++i) {
        if (std::abs(obs.x_p(i)) == 0.0) {
            throw std::domain_error("ls_estimate: singular pilot symbol");
        }
        r.h_pilot(i) = obs.y_p(i) / obs.x_p(i);
    }
    if (ops != nullptr) ops->mults += obs.y_p.size();
    return r;
}

LmmseEstimator::LmmseEstimator(const CovarianceMatrix& r, double noise_var)
    : noise_var_(noise_var) {
    check_hermitian(r.r, "lmmse");
    if (!(noise_var > 0.0)) throw std::invalid_argument("lmmse: noise variance must be > 0");
    const int n = static_cast<int>(r.r.rows());
    const CMat reg = r.r + noise_var * CMat::Identity(n, n);
    shrink_ = reg.llt().solve(r.r.adjoint()).adjoint();  // R (R + s2 I)^{-1}
}

EstimateResult LmmseEstimator::estimate(const PilotObservation& obs, OpCount* ops) const {
    obs.validate();
    if (std::abs(obs.noise_var() - noise_var_) > 1e-9 * noise_var_) {
        throw std::invalid_argument("lmmse: observation noise level does not match");
    }
    EstimateResult r = LsEstimator().estimate(obs, ops);
    r.kind = EstimateResult::Kind::Lmmse;
    r.h_pilot = counted_matvec(shrink_, r.h_pilot, ops);
    return r;
}

LsBemEstimator::LsBemEstimator(const BasisMatrix& pilot_basis) : basis_(&pilot_basis) {
    if (pilot_basis.grid != BasisMatrix::Grid::Pilot) {
        throw std::invalid_argument("ls_bem: basis must be on the pilot grid");
    }
}

EstimateResult LsBemEstimator::estimate(const PilotObservation& obs, OpCount* ops) const {
    EstimateResult r = LsEstimator().estimate(obs, ops);
    r.kind = EstimateResult::Kind::LsBem;
    r.a_hat = counted_matvec(basis_->projector, r.h_pilot, ops);
    r.h_pilot = counted_matvec(basis_->eval, r.a_hat, ops);
    return r;
}

LmmseBemEstimator::LmmseBemEstimator(const BasisMatrix& pilot_basis, const CMat& r_a,
                                     double noise_var, EstimateResult::Kind kind)
    : basis_(&pilot_basis), noise_var_(noise_var), kind_(kind) {
    if (pilot_basis.grid != BasisMatrix::Grid::Pilot) {
        throw std::invalid_argument("lmmse_bem: basis must be on the pilot grid");
    }
    check_hermitian(r_a, "lmmse_bem");
    if (noise_var < 0.0) throw std::invalid_argument("lmmse_bem: negative noise variance");
    const CMat& b = pilot_basis.eval;
    const int n_p = static_cast<int>(b.rows());
    const CMat c0 = b * r_a * b.adjoint();
    Eigen::SelfAdjointEigenSolver<CMat> eig(0.5 * (c0 + c0.adjoint()));
    const RVec& ev = eig.eigenvalues();  // ascending
    const double tol = std::max(ev(n_p - 1), 0.0) * 1e-12;
    int first_kept = 0;
    while (first_kept < n_p && ev(first_kept) <= tol) ++first_kept;
    const int rank = n_p - first_kept;

    if (noise_var == 0.0 && rank < n_p) {
        // noiseless and rank-deficient: the dual form is not defined, the
        // projection estimate is the continuous limit
        std::cerr << "lmmse_bem: singular B R_a B^H at sigma^2 = 0, "
                     "falling back to LS-BEM\n";
        w_ = pilot_basis.projector;
        fallback_ = true;
        return;
    }
    // Invert on the numerically nonzero eigenspace of B R_a B^H only:
    // R_a B^H vanishes on its null space, so the restriction is exact and
    // avoids amplifying rounding noise by 1/sigma^2 at high SNR.
    const CMat u = eig.eigenvectors().rightCols(rank);
    RVec inv(rank);
    for (int i = 0; i < rank; ++i) inv(i) = 1.0 / (ev(first_kept + i) + noise_var);
    w_ = r_a * b.adjoint() * u * inv.asDiagonal() * u.adjoint();
}

EstimateResult LmmseBemEstimator::estimate(const PilotObservation& obs, OpCount* ops) const {
    obs.validate();
    EstimateResult r;
    r.kind = kind_;
    // X^H y with unit-modulus pilots equals the LS estimate
    CVec y_eff(obs.y_p.size());
    for (Eigen::Index i = 0; i < obs.y_p.size(); ++i) {
        y_eff(i) = std::conj(obs.x_p(i)) * obs.y_p(i);
    }
    if (ops != nullptr) ops->mults += obs.y_p.size();
    r.a_hat = counted_matvec(w_, y_eff, ops);
    r.h_pilot = counted_matvec(basis_->eval, r.a_hat, ops);
    return r;
}

AlmmseBemEstimator::AlmmseBemEstimator(const BasisMatrix& pilot_basis,
                                       const CovarianceMatrix& approx_r, double noise_var)
    : inner_(pilot_basis, coefficient_covariance(approx_r, pilot_basis), noise_var,
             EstimateResult::Kind::AlmmseBem) {
    if (approx_r.kind != CovarianceMatrix::Kind::Approximated) {
        throw std::invalid_argument("almmse_bem: covariance must be the approximated kind");
    }
}

EstimateResult AlmmseBemEstimator::estimate(const PilotObservation& obs, OpCount* ops) const {
    return inner_.estimate(obs, ops);
}

CMat coefficient_covariance(const CovarianceMatrix& r_h, const BasisMatrix& pilot_basis) {
    check_hermitian(r_h.r, "coefficient_covariance");
    const CMat& p = pilot_basis.projector;
    CMat r_a = p * r_h.r * p.adjoint();
    r_a = 0.5 * (r_a + r_a.adjoint().eval());
    Eigen::SelfAdjointEigenSolver<CMat> eig(r_a);
    const RVec& ev = eig.eigenvalues();
    if (ev(0) < 0.0) {
        if (-ev(0) > 1e-10) {
            std::cerr << "coefficient_covariance: PSD repair floored eigenvalue "
                      << ev(0) << "\n";
        }
        RVec floored = ev.cwiseMax(0.0);
        r_a = eig.eigenvectors() * floored.asDiagonal() * eig.eigenvectors().adjoint();
        r_a = 0.5 * (r_a + r_a.adjoint().eval());
    }
    return r_a;
}

EstimateResult ls_estimate(const PilotObservation& obs, OpCount* ops) {
    return LsEstimator().estimate(obs, ops);
}

EstimateResult lmmse_estimate(const PilotObservation& obs, const CovarianceMatrix& r,
                              OpCount* ops) {
    return LmmseEstimator(r, obs.noise_var()).estimate(obs, ops);
}

EstimateResult ls_bem_estimate(const PilotObservation& obs, const BasisMatrix& pilot_basis,
                               OpCount* ops) {
    return LsBemEstimator(pilot_basis).estimate(obs, ops);
}

EstimateResult lmmse_bem_estimate(const PilotObservation& obs, const BasisMatrix& pilot_basis,
                                  const CMat& r_a, OpCount* ops) {
    return LmmseBemEstimator(pilot_basis, r_a, obs.noise_var()).estimate(obs, ops);
}

EstimateResult almmse_bem_estimate(const PilotObservation& obs, const BasisMatrix& pilot_basis,
                                   const CovarianceMatrix& approx_r, OpCount* ops) {
    return AlmmseBemEstimator(pilot_basis, approx_r, obs.noise_var()).estimate(obs, ops);
}

void interpolate_full_grid(EstimateResult& result, const InterpolationContext& ctx) {
    if (result.h_pilot.size() == 0) {
        throw std::invalid_argument("interpolate: pilot estimates missing");
    }
    const bool bem = result.kind == EstimateResult::Kind::LsBem ||
                     result.kind == EstimateResult::Kind::LmmseBem ||
                     result.kind == EstimateResult::Kind::AlmmseBem;
    if (bem) {
        if (ctx.basis == nullptr) {
            throw std::invalid_argument("interpolate: BEM kinds need the basis set");
        }
        result.h_full = ctx.basis->full.eval * result.a_hat;
        return;
    }
    // Delay-domain interpolation: N_p taps, one sample apart, re-evaluated on
    // the full grid. Exact whenever the delay support is below N_p samples.
    const int n_p = static_cast<int>(result.h_pilot.size());
    CVec taps = CVec::Zero(n_p);
    for (int m = 0; m < n_p; ++m) {
        Cplx acc = 0.0;
        for (int q = 0; q < n_p; ++q) {
            acc += result.h_pilot(q) * unit_phasor(2.0 * std::numbers::pi * q * m / n_p);
        }
        taps(m) = acc / static_cast<double>(n_p);
    }
    result.h_full = CVec(ctx.grid_size);
    for (int b = 0; b < ctx.grid_size; ++b) {
        Cplx acc = 0.0;
        for (int m = 0; m < n_p; ++m) {
            acc += taps(m) * unit_phasor(-2.0 * std::numbers::pi * b * m / ctx.grid_size);
        }
        result.h_full(b) = acc;
    }
}

}  // namespace gfdmbem
