#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gfdmbem/channel.hpp"
#include "gfdmbem/detection.hpp"
#include "gfdmbem/estimators.hpp"
#include "gfdmbem/rng.hpp"
#include "gfdmbem/waveforms.hpp"

using namespace gfdmbem;
using WP = WaveformParams;

namespace {

WP loopback_params() { return WP::make(WP::System::Gfdm, 16, 5, 4, 8, 0.5); }

struct Loopback {
    WP params = loopback_params();
    PrototypeFilter filter = rrc_prototype(params);
    CVec pilots;
    GfdmFrame frame;
    CVec spectrum;

    explicit Loopback(std::uint64_t seed) {
        pilots = make_pilot_sequence(params, seed);
        RandomStream data(seed, 0, Stream::Data);
        frame = make_random_gfdm_frame(params, pilots, data);
        const CVec x = gfdm_modulate_matrix(frame, params, filter);
        spectrum = dft_cache(params.n()) * x;
    }
};

}  // namespace

TEST_CASE("zf equalizer") {
    RandomStream rng(1, 0, Stream::Data);
    CVec y(64), h(64);
    for (int i = 0; i < 64; ++i) {
        y(i) = rng.gauss_c();
        h(i) = Cplx(1.0, 0.0);
    }
    CHECK((zf_equalize(y, h) - y).cwiseAbs().maxCoeff() == 0.0);

    // deep fade: regularized, flagged, finite
    h(10) = Cplx(1e-12, 0.0);
    h(11) = Cplx(0.0, 0.0);
    int fades = 0;
    const CVec out = zf_equalize(y, h, &fades);
    CHECK(fades == 2);
    CHECK(std::isfinite(std::abs(out(10))));
    CHECK(std::isfinite(std::abs(out(11))));
    CHECK(std::abs(out(10)) <= std::abs(y(10)) / 1e-8 * 1.0001);

    CHECK_THROWS_AS(zf_equalize(y, h.head(10)), std::invalid_argument);
}

TEST_CASE("perfect-CSI equalization restores the transmitted spectrum") {
    Loopback lb(21);
    const ChannelSpec spec = ChannelSpec::paper_default(8, 16);
    const ChannelRealization real = draw_channel(spec, lb.params.n(), 42);
    const CVec x = dft_cache(lb.params.n()).adjoint() * lb.spectrum;
    const CVec y = remove_cp(apply_channel(add_cp(x, 8), real, 8), 8);
    const CVec y_spec = dft_cache(lb.params.n()) * y;
    const CVec eq = zf_equalize(y_spec, real.freq_response);
    CHECK((eq - lb.spectrum).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("noiseless loopback with IC recovers every symbol") {
    for (std::uint64_t seed : {3u, 17u, 99u}) {
        Loopback lb(seed);
        const IcResult ic = ic_receive(lb.spectrum, lb.params, lb.filter, 2, lb.pilots);
        const BitErrorCount count = count_bit_errors(ic.decisions, lb.frame, lb.params);
        CHECK(count.bits == 2 * (16 * 5 - 4));
        CHECK(count.errors == 0);
    }
}

TEST_CASE("J = 0 returns the uncancelled decisions and IC can only help") {
    const WP p = loopback_params();
    const PrototypeFilter f = rrc_prototype(p);
    const CVec pilots = make_pilot_sequence(p, 5);

    long long err_j0 = 0, err_j2 = 0, bits = 0;
    const double sigma2 = 0.1;
    for (int trial = 0; trial < 300; ++trial) {
        RandomStream data(5, trial, Stream::Data);
        const GfdmFrame frame = make_random_gfdm_frame(p, pilots, data);
        const CVec x = gfdm_modulate_matrix(frame, p, f);
        RandomStream noise(5, trial, Stream::Noise);
        const CVec y = add_awgn(x, sigma2, noise);
        const CVec spectrum = dft_cache(p.n()) * y;
        const IcResult r0 = ic_receive(spectrum, p, f, 0, pilots);
        const IcResult r2 = ic_receive(spectrum, p, f, 2, pilots);
        const BitErrorCount c0 = count_bit_errors(r0.decisions, frame, p);
        const BitErrorCount c2 = count_bit_errors(r2.decisions, frame, p);
        err_j0 += c0.errors;
        err_j2 += c2.errors;
        bits += c0.bits;
    }
    CHECK(err_j0 > 0);  // the uncancelled receiver does make ICI errors here
    CHECK(err_j2 <= err_j0);

    CHECK_THROWS_AS(ic_receive(CVec::Zero(p.n()), p, f, -1, pilots),
                    std::invalid_argument);
}

TEST_CASE("genie-aided cancellation removes all adjacent energy") {
    const WP p = WP::make(WP::System::Gfdm, 16, 5, 0, 8, 0.5);  // data only
    const PrototypeFilter f = rrc_prototype(p);
    RandomStream data(7, 0, Stream::Data);
    GfdmFrame frame;
    frame.data_symbols = CMat(p.m, p.k);
    frame.pilot_symbols = CMat::Zero(p.m, p.k);
    for (int m = 0; m < p.m; ++m)
        for (int k = 0; k < p.k; ++k) frame.data_symbols(m, k) = data.qpsk_symbol();

    const CVec spectrum =
        dft_cache(p.n()) * gfdm_modulate_matrix(frame, p, f);

    const int sc = 6;
    // folded observation of subcarrier sc from the full transmission
    const CVec observed = fold_subcarrier(spectrum, sc, p, f);
    // reconstruct the two neighbours from the true symbols
    CVec neighbours = CVec::Zero(p.n());
    for (int nb : {sc - 1, sc + 1}) {
        add_subcarrier_spectrum(neighbours, nb,
                                dft_cache(p.m) * frame.data_symbols.col(nb), p, f);
    }
    const CVec cleaned = observed - fold_subcarrier(neighbours, sc, p, f);
    // with delta = 2 nothing but subcarrier sc itself remains
    CVec isolated_spectrum = CVec::Zero(p.n());
    add_subcarrier_spectrum(isolated_spectrum, sc,
                            dft_cache(p.m) * frame.data_symbols.col(sc), p, f);
    const CVec isolated = fold_subcarrier(isolated_spectrum, sc, p, f);
    CHECK((cleaned - isolated).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("bit error counting excludes pilots and respects Gray distances") {
    const WP p = loopback_params();
    Loopback lb(31);

    CMat perfect(p.m, p.k);
    for (int sc = 0; sc < p.k; ++sc) {
        if (p.is_pilot_subcarrier(sc)) {
            perfect.col(sc) = lb.frame.pilot_symbols.col(sc);
        } else {
            perfect.col(sc) = lb.frame.data_symbols.col(sc);
        }
    }
    BitErrorCount c = count_bit_errors(perfect, lb.frame, p);
    CHECK(c.errors == 0);
    CHECK(c.bits == 2 * (p.k * p.m - p.n_pilots()));

    CMat rot90 = perfect;
    rot90(2, 1) *= Cplx(0, 1);
    CHECK(count_bit_errors(rot90, lb.frame, p).errors == 1);

    CMat rot180 = perfect;
    rot180(2, 1) *= -1.0;
    CHECK(count_bit_errors(rot180, lb.frame, p).errors == 2);

    // flipping a pilot-position entry changes nothing
    CMat pilot_flip = perfect;
    pilot_flip(0, 0) *= -1.0;
    CHECK(count_bit_errors(pilot_flip, lb.frame, p).errors == 0);
}

TEST_CASE("estimated-CSI loopback stays within the interpolation error budget") {
    // end-to-end: paper channel, no noise, aLMMSE-BEM estimate, ZF, IC.
    // p_s = 2 keeps N_p = 8 pilots, enough to resolve the 8 in-CP taps.
    const WP p = WP::make(WP::System::Gfdm, 16, 5, 2, 8, 0.5);
    const PrototypeFilter f = rrc_prototype(p);
    const CVec pilots = make_pilot_sequence(p, 8);
    const ChannelSpec spec = ChannelSpec::paper_default(8, p.k);

    long long errors = 0;
    for (int trial = 0; trial < 25; ++trial) {
        RandomStream data(8, trial, Stream::Data);
        const GfdmFrame frame = make_random_gfdm_frame(p, pilots, data);
        const CVec x = gfdm_modulate_matrix(frame, p, f);
        const ChannelRealization real = draw_channel(spec, p.n(), 600 + trial);
        const CVec y = remove_cp(apply_channel(add_cp(x, p.cp_len), real, p.cp_len), p.cp_len);
        const CVec spectrum = dft_cache(p.n()) * y;

        PilotObservation obs;
        obs.y_p = extract_pilots(spectrum, p, &f);
        obs.x_p = pilots;
        obs.snr_linear = 1e12;
        const BasisSet basis = make_basis_set(BasisMatrix::Kind::Ce, 8, p.k, p.pilot_sep, p.n());
        const CovarianceMatrix approx = approx_pilot_covariance(p.cp_len, p.k, p.pilot_sep,
                                                                p.n_pilots());
        EstimateResult est = almmse_bem_estimate(obs, basis.pilot, approx);
        InterpolationContext ctx{p.n(), p.k, p.pilot_sep, &basis};
        interpolate_full_grid(est, ctx);

        const CVec eq = zf_equalize(spectrum, est.h_full);
        const IcResult ic = ic_receive(eq, p, f, 2, pilots);
        errors += count_bit_errors(ic.decisions, frame, p).errors;
    }
    CHECK(errors == 0);  // noiseless chain: estimation is exact on in-span channels
}
