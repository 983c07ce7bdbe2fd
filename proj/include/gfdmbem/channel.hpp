// Multipath Rayleigh channel generation, channel application, AWGN and the
// pilot-grid covariance constructors.
//
// The tapped-delay line with fractional path delays is realized as a CP-long
// FIR at the sample rate: each path is interpolated onto integer taps
// 0..cp_len-1 with the periodic-sinc (Dirichlet) kernel of the K grid, the
// least-squares in-CP representation. Integer delays are exact. The
// realization's frequency response is the exact response of those taps, so
// the cyclic-convolution model holds to machine precision.
#pragma once

#include <cstdint>

#include "gfdmbem/core.hpp"

namespace gfdmbem {

struct ChannelSpec {
    RVec delays;   // tau_l in samples, non-negative, strictly increasing
    RVec powers;   // linear PDP, normalized to sum 1 by make()
    int cp_len = 8;
    bool fading = true;  // false: deterministic H = 1 (AWGN-only reference)
    int k_grid = 128;    // grid defining the interpolation kernel

    int n_taps() const { return static_cast<int>(delays.size()); }
    // FIR length of the realization: the CP budget for fading channels, a
    // single tap for the deterministic flat reference.
    int fir_len() const { return fading ? cp_len : 1; }
    static ChannelSpec make(const RVec& delays, const RVec& powers, int cp_len, int k_grid);
    // PDP (1, 0.5, 0.25, 0.125) at fractional delays (0, 2.7, 3.1, 4.9).
    static ChannelSpec paper_default(int cp_len = 8, int k_grid = 128);
    static ChannelSpec awgn_only(int cp_len, int k_grid);
    void validate() const;
};

struct ChannelRealization {
    CVec path_gains;     // one CN(0, P_l) gain per path
    CVec fir;            // cp_len taps at the sample rate
    CVec freq_response;  // exact response of fir on the requested grid
    int grid_size = 0;
};

// Dirichlet (periodic sinc) interpolation kernel of an n-point grid.
double dirichlet_kernel(double x, int n);

// Deterministic for a fixed seed; grid_size is K for OFDM, N = MK for GFDM.
// The same seed yields the same path gains on either grid.
ChannelRealization draw_channel(const ChannelSpec& spec, int grid_size, std::uint64_t seed);

// y' = H x' + n without the n: applies the channel to a CP-prefixed block by
// frequency-domain multiplication of the CP-stripped core, then re-wraps the
// prefix. After CP removal at the receiver, DFT(y) = H .* DFT(x) exactly.
CVec apply_channel(const CVec& x_cp, const ChannelRealization& realization, int cp_len);

// Adds i.i.d. circular complex Gaussian noise, variance sigma2 per sample.
CVec add_awgn(const CVec& y, double sigma2, std::uint64_t seed);
CVec add_awgn(const CVec& y, double sigma2, class RandomStream& stream);

struct CovarianceMatrix {
    enum class Kind { TruePdp, Approximated };
    CMat r;
    Kind kind = Kind::TruePdp;
};

// Exact pilot-grid covariance of the realized (FIR) channel ensemble:
// R = F T diag(P) T^H F^H with T the Dirichlet interpolation matrix and
// F(q, m) = exp(-j 2 pi p_s q m / K).
CovarianceMatrix true_pilot_covariance(const ChannelSpec& spec, int k, int pilot_sep);

// Constant-PDP prior over the CP:
// R(n, p) = sum_{l=0}^{L-1} (1/L) exp(-j 2 pi p_s (n-p) l / K).
CovarianceMatrix approx_pilot_covariance(int cp_len, int k, int pilot_sep, int n_pilots);

}  // namespace gfdmbem
