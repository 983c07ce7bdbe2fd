#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gfdmbem/channel.hpp"
#include "gfdmbem/rng.hpp"
#include "gfdmbem/waveforms.hpp"

using namespace gfdmbem;

namespace {

Cplx phasor(double phi) { return Cplx(std::cos(phi), std::sin(phi)); }

}  // namespace

TEST_CASE("channel spec validation") {
    CHECK_NOTHROW(ChannelSpec::paper_default());
    CHECK(std::abs(ChannelSpec::paper_default().powers.sum() - 1.0) < 1e-12);

    RVec d(2), p(2);
    d << 0.0, 9.0;  // beyond the CP
    p << 1.0, 1.0;
    CHECK_THROWS_AS(ChannelSpec::make(d, p, 8, 128), std::invalid_argument);
    d << 3.0, 2.0;  // not increasing
    CHECK_THROWS_AS(ChannelSpec::make(d, p, 8, 128), std::invalid_argument);
}

TEST_CASE("single tap at zero delay is flat") {
    RVec d(1), p(1);
    d << 0.0;
    p << 1.0;
    const ChannelSpec spec = ChannelSpec::make(d, p, 8, 128);
    const ChannelRealization real = draw_channel(spec, 128, 123);
    const double mag = std::abs(real.freq_response(0));
    for (int b = 0; b < 128; ++b) {
        CHECK(std::abs(std::abs(real.freq_response(b)) - mag) < 1e-12);
    }
}

TEST_CASE("draws are deterministic in the seed") {
    const ChannelSpec spec = ChannelSpec::paper_default();
    const ChannelRealization a = draw_channel(spec, 640, 99);
    const ChannelRealization b = draw_channel(spec, 640, 99);
    const ChannelRealization c = draw_channel(spec, 640, 100);
    CHECK((a.path_gains - b.path_gains).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.freq_response - b.freq_response).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.path_gains - c.path_gains).cwiseAbs().maxCoeff() > 0.0);

    // the same seed gives the same path gains on either system grid
    const ChannelRealization k_grid = draw_channel(spec, 128, 99);
    CHECK((a.path_gains - k_grid.path_gains).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("path gain statistics follow the PDP") {
    const ChannelSpec spec = ChannelSpec::paper_default();
    RVec mean = RVec::Zero(4);
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        const ChannelRealization r = draw_channel(spec, 8, 1000 + i);
        mean += r.path_gains.cwiseAbs2();
    }
    mean /= draws;
    for (int l = 0; l < 4; ++l) {
        CHECK(std::abs(mean(l) - spec.powers(l)) < 0.05 * spec.powers(l));
    }
}

TEST_CASE("apply_channel: flat channel is the identity") {
    const ChannelSpec spec = ChannelSpec::awgn_only(8, 128);
    const ChannelRealization real = draw_channel(spec, 64, 1);
    RandomStream rng(2, 0, Stream::Data);
    CVec core(64);
    for (int i = 0; i < core.size(); ++i) core(i) = rng.gauss_c();
    const CVec x = add_cp(core, 8);
    CHECK((apply_channel(x, real, 8) - x).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("apply_channel: integer delay is a cyclic shift") {
    RVec d(1), p(1);
    d << 2.0;
    p << 1.0;
    const ChannelSpec spec = ChannelSpec::make(d, p, 8, 64);
    ChannelRealization real = draw_channel(spec, 64, 5);
    real.path_gains(0) = 1.0;  // strip the Rayleigh gain, keep the delay
    real.fir.setZero();
    real.fir(2) = 1.0;
    for (int b = 0; b < 64; ++b) {
        real.freq_response(b) = phasor(-2.0 * std::numbers::pi * b * 2.0 / 64.0);
    }
    RandomStream rng(3, 0, Stream::Data);
    CVec x(64);
    for (int i = 0; i < 64; ++i) x(i) = rng.gauss_c();
    const CVec y = remove_cp(apply_channel(add_cp(x, 8), real, 8), 8);
    for (int i = 0; i < 64; ++i) {
        CHECK(std::abs(y(i) - x((i - 2 + 64) % 64)) < 1e-12);
    }
}

TEST_CASE("apply_channel satisfies the FFT-ratio identity") {
    const ChannelSpec spec = ChannelSpec::paper_default(8, 16);
    const int grid = 80;
    const ChannelRealization real = draw_channel(spec, grid, 11);
    RandomStream rng(4, 0, Stream::Data);
    CVec x(grid);
    for (int i = 0; i < grid; ++i) x(i) = rng.gauss_c();
    const CVec y = remove_cp(apply_channel(add_cp(x, 8), real, 8), 8);
    const CMat& w = dft_cache(grid);
    const CVec ratio_num = w * y;
    const CVec ratio_den = w * x;
    for (int b = 0; b < grid; ++b) {
        CHECK(std::abs(ratio_num(b) / ratio_den(b) - real.freq_response(b)) < 1e-10);
    }
}

TEST_CASE("awgn statistics") {
    const CVec x = CVec::Zero(100000);
    CHECK((add_awgn(x, 0.0, 1) - x).cwiseAbs().maxCoeff() == 0.0);

    const CVec n = add_awgn(x, 1.0, 17);
    double var_re = 0.0, var_im = 0.0;
    for (int i = 0; i < n.size(); ++i) {
        var_re += n(i).real() * n(i).real();
        var_im += n(i).imag() * n(i).imag();
    }
    var_re /= n.size();
    var_im /= n.size();
    CHECK(std::abs(var_re + var_im - 1.0) < 0.02);
    CHECK(std::abs(var_re - 0.5) < 0.01);
    CHECK(std::abs(var_im - 0.5) < 0.01);

    CHECK_THROWS_AS(add_awgn(x, -1.0, 1), std::invalid_argument);
}

TEST_CASE("true pilot covariance structure and oracle") {
    const ChannelSpec spec = ChannelSpec::paper_default();
    const CovarianceMatrix cov = true_pilot_covariance(spec, 128, 4);
    REQUIRE(cov.kind == CovarianceMatrix::Kind::TruePdp);
    REQUIRE(cov.r.rows() == 32);

    CHECK((cov.r - cov.r.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<CMat> eig(cov.r);
    CHECK(eig.eigenvalues()(0) > -1e-10);
    // unit channel power spreads over the in-CP taps
    CHECK(std::abs(cov.r.trace().real() / 32.0 - 1.0) < 0.05);

    // independent literal construction of the same ensemble covariance
    const int n_p = 32, cp = 8;
    CMat t(cp, 4);
    for (int m = 0; m < cp; ++m) {
        for (int l = 0; l < 4; ++l) {
            const double x = m - spec.delays(l);
            t(m, l) = (std::abs(std::remainder(x, 128.0)) < 1e-12)
                          ? 1.0
                          : std::sin(std::numbers::pi * x) /
                                (128.0 * std::sin(std::numbers::pi * x / 128.0));
        }
    }
    CMat f(n_p, cp);
    for (int q = 0; q < n_p; ++q)
        for (int m = 0; m < cp; ++m)
            f(q, m) = phasor(-2.0 * std::numbers::pi * 4.0 * q * m / 128.0);
    const CMat ref = f * t * spec.powers.asDiagonal() * t.adjoint() * f.adjoint();
    CHECK((cov.r - ref).cwiseAbs().maxCoeff() < 1e-12);

    // single tap at zero delay: fully correlated
    RVec d(1), p(1);
    d << 0.0;
    p << 1.0;
    const CovarianceMatrix flat = true_pilot_covariance(ChannelSpec::make(d, p, 8, 128), 128, 4);
    CHECK((flat.r - CMat::Ones(32, 32)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("ensemble LS covariance matches true_pilot_covariance") {
    const ChannelSpec spec = ChannelSpec::paper_default();
    const CovarianceMatrix cov = true_pilot_covariance(spec, 128, 4);
    CMat acc = CMat::Zero(32, 32);
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        const ChannelRealization r = draw_channel(spec, 128, 5000 + i);
        CVec h(32);
        for (int q = 0; q < 32; ++q) h(q) = r.freq_response(4 * q);
        acc += h * h.adjoint();
    }
    acc /= draws;
    CHECK((acc - cov.r).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("approximated covariance: structure and geometric-series oracle") {
    const CovarianceMatrix cov = approx_pilot_covariance(8, 128, 4, 32);
    REQUIRE(cov.kind == CovarianceMatrix::Kind::Approximated);

    for (int q = 0; q < 32; ++q) {
        CHECK(cov.r(q, q) == Cplx(1.0, 0.0));  // exactly
    }
    CHECK((cov.r - cov.r.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<CMat> eig(cov.r);
    CHECK(eig.eigenvalues()(0) > -1e-10);

    // Toeplitz: entries depend only on n - p
    for (int n = 0; n < 32; ++n) {
        for (int p = 0; p < 32; ++p) {
            CHECK(std::abs(cov.r(n, p) - cov.r(n - p < 0 ? 0 : n - p, n - p < 0 ? p - n : 0)) <
                  1e-14);
        }
    }

    // closed-form geometric sum (1/L)(1 - e^{-j 2 pi p_s d L / K})/(1 - e^{-j 2 pi p_s d / K})
    auto oracle = [](int d) {
        const Cplx num = 1.0 - phasor(-2.0 * std::numbers::pi * 4.0 * d * 8.0 / 128.0);
        const Cplx den = 1.0 - phasor(-2.0 * std::numbers::pi * 4.0 * d / 128.0);
        return num / den / 8.0;
    };
    for (int n = 0; n < 32; ++n) {
        for (int p = 0; p < 32; ++p) {
            if (n == p) continue;
            CHECK(std::abs(cov.r(n, p) - oracle(n - p)) < 1e-12);
        }
    }
    // lag 4: the numerator phase is a full turn, the entry vanishes
    CHECK(std::abs(cov.r(4, 0)) < 1e-12);
    // lag 32 (one grid beyond this matrix): every term in phase
    const CovarianceMatrix wide = approx_pilot_covariance(8, 128, 4, 33);
    CHECK(std::abs(wide.r(32, 0) - Cplx(1.0, 0.0)) < 1e-12);

    CHECK_THROWS_AS(approx_pilot_covariance(0, 128, 4, 32), std::invalid_argument);
}
