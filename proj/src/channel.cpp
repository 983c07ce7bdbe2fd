#include "gfdmbem/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gfdmbem/rng.hpp"

namespace gfdmbem {

namespace {

Cplx unit_phasor(double phi) { return Cplx(std::cos(phi), std::sin(phi)); }

// Interpolation matrix: tap m gets dirichlet(m - tau_l) from path l.
Eigen::MatrixXd interp_matrix(const ChannelSpec& spec) {
    Eigen::MatrixXd t(spec.fir_len(), spec.n_taps());
    for (int m = 0; m < spec.fir_len(); ++m) {
        for (int l = 0; l < spec.n_taps(); ++l) {
            t(m, l) = dirichlet_kernel(m - spec.delays(l), spec.k_grid);
        }
    }
    return t;
}

}  // namespace

double dirichlet_kernel(double x, int n) {
    const double r = std::remainder(x, static_cast<double>(n));
    if (std::abs(r) < 1e-12) return 1.0;
    return std::sin(std::numbers::pi * r) /
           (n * std::sin(std::numbers::pi * r / n));
}

ChannelSpec ChannelSpec::make(const RVec& delays, const RVec& powers, int cp_len, int k_grid) {
    ChannelSpec spec;
    spec.delays = delays;
    spec.powers = powers / powers.sum();  // unit channel power
    spec.cp_len = cp_len;
    spec.k_grid = k_grid;
    spec.validate();
    return spec;
}

ChannelSpec ChannelSpec::paper_default(int cp_len, int k_grid) {
    RVec delays(4), powers(4);
    delays << 0.0, 2.7, 3.1, 4.9;
    powers << 1.0, 0.5, 0.25, 0.125;
    return make(delays, powers, cp_len, k_grid);
}

ChannelSpec ChannelSpec::awgn_only(int cp_len, int k_grid) {
    RVec delays(1), powers(1);
    delays << 0.0;
    powers << 1.0;
    ChannelSpec spec = make(delays, powers, std::max(cp_len, 1), k_grid);
    spec.cp_len = cp_len;
    spec.fading = false;
    return spec;
}

void ChannelSpec::validate() const {
    if (n_taps() == 0) throw std::invalid_argument("channel: need at least one path");
    if (powers.size() != delays.size())
        throw std::invalid_argument("channel: delays and powers must match");
    for (int l = 0; l < n_taps(); ++l) {
        if (delays(l) < 0.0) throw std::invalid_argument("channel: negative delay");
        if (l > 0 && delays(l) <= delays(l - 1))
            throw std::invalid_argument("channel: delays must be strictly increasing");
        if (powers(l) <= 0.0) throw std::invalid_argument("channel: powers must be positive");
    }
    if (fading && delays(n_taps() - 1) >= cp_len)
        throw std::invalid_argument("channel: max delay must be below the CP length");
    if (std::abs(powers.sum() - 1.0) > 1e-12)
        throw std::invalid_argument("channel: PDP must be normalized");
}

ChannelRealization draw_channel(const ChannelSpec& spec, int grid_size, std::uint64_t seed) {
    spec.validate();
    ChannelRealization real;
    real.grid_size = grid_size;
    real.path_gains = CVec(spec.n_taps());
    if (spec.fading) {
        RandomStream stream(seed, 0, Stream::Channel);
        for (int l = 0; l < spec.n_taps(); ++l) {
            real.path_gains(l) = std::sqrt(spec.powers(l)) * stream.gauss_c();
        }
    } else {
        real.path_gains.setZero();
        real.path_gains(0) = 1.0;
    }
    real.fir = interp_matrix(spec).cast<Cplx>() * real.path_gains;
    real.freq_response = CVec(grid_size);
    for (int b = 0; b < grid_size; ++b) {
        Cplx acc = 0.0;
        for (int m = 0; m < real.fir.size(); ++m) {
            acc += real.fir(m) * unit_phasor(-2.0 * std::numbers::pi * b * m / grid_size);
        }
        real.freq_response(b) = acc;
    }
    return real;
}

CVec apply_channel(const CVec& x_cp, const ChannelRealization& real, int cp_len) {
    const int n = real.grid_size;
    if (x_cp.size() != n + cp_len)
        throw std::invalid_argument("apply_channel: block length does not match grid + CP");
    for (int m = std::max(cp_len, 1); m < real.fir.size(); ++m) {
        if (std::abs(real.fir(m)) > 0.0)
            throw std::invalid_argument("apply_channel: channel delay spread exceeds the CP");
    }
    const CMat& w = dft_cache(n);
    const CVec spectrum = w * x_cp.tail(n);
    const CVec y_core = w.adjoint() * (real.freq_response.cwiseProduct(spectrum));
    CVec y(n + cp_len);
    y.head(cp_len) = y_core.tail(cp_len);
    y.tail(n) = y_core;
    return y;
}

CVec add_awgn(const CVec& y, double sigma2, RandomStream& stream) {
    if (sigma2 < 0.0) throw std::invalid_argument("add_awgn: variance must be >= 0");
    if (sigma2 == 0.0) return y;
    const double scale = std::sqrt(sigma2);
    CVec out(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        out(i) = y(i) + scale * stream.gauss_c();
    }
    return out;
}

CVec add_awgn(const CVec& y, double sigma2, std::uint64_t seed) {
    RandomStream stream(seed, 0, Stream::Noise);
    return add_awgn(y, sigma2, stream);
}

CovarianceMatrix true_pilot_covariance(const ChannelSpec& spec, int k, int pilot_sep) {
    spec.validate();
    const int n_p = k / pilot_sep;
    const Eigen::MatrixXd t = interp_matrix(spec);
    CMat f(n_p, spec.fir_len());
    for (int q = 0; q < n_p; ++q) {
        for (int m = 0; m < spec.fir_len(); ++m) {
            f(q, m) = unit_phasor(-2.0 * std::numbers::pi * pilot_sep * q * m / k);
        }
    }
    const CMat tap_cov =
        (t * spec.powers.asDiagonal() * t.transpose()).cast<Cplx>();
    CovarianceMatrix cov;
    cov.kind = CovarianceMatrix::Kind::TruePdp;
    cov.r = f * tap_cov * f.adjoint();
    cov.r = 0.5 * (cov.r + cov.r.adjoint().eval());  // exact Hermitian symmetry
    return cov;
}

CovarianceMatrix approx_pilot_covariance(int cp_len, int k, int pilot_sep, int n_pilots) {
    if (cp_len < 1) throw std::invalid_argument("approx_pilot_covariance: L must be >= 1");
    CovarianceMatrix cov;
    cov.kind = CovarianceMatrix::Kind::Approximated;
    cov.r = CMat(n_pilots, n_pilots);
    for (int n = 0; n < n_pilots; ++n) {
        for (int p = 0; p < n_pilots; ++p) {
            if (n == p) {
                cov.r(n, p) = 1.0;  // L equal terms of 1/L
                continue;
            }
            Cplx acc = 0.0;
            for (int l = 0; l < cp_len; ++l) {
                acc += unit_phasor(-2.0 * std::numbers::pi * pilot_sep * (n - p) * l / k) /
                       static_cast<double>(cp_len);
            }
            cov.r(n, p) = acc;
        }
    }
    return cov;
}

}  // namespace gfdmbem
