// OFDM and GFDM modulation/demodulation, the RRC prototype filter and
// interference-free pilot framing.
//
// GFDM frequency-domain conventions used throughout:
//   - every transform is unitary;
//   - subcarrier k occupies a window of M*delta adjacent bins of the N-grid
//     centred on bin k*M: window entry i maps to bin k*M + i for
//     i < M*delta/2 and to bin k*M + i - M*delta otherwise (mod N);
//   - the prototype frequency window G_delta is peak-normalized
//     (G_delta[0] = 1) and satisfies sum |G_delta|^2 = M, which makes every
//     transmitted symbol, pilots included, carry unit average energy and
//     fixes the pilot scaling at lambda = 1/G_delta[0].
#pragma once

#include <cstdint>
#include <vector>

#include "gfdmbem/core.hpp"

namespace gfdmbem {

class RandomStream;

struct WaveformParams {
    enum class System { Ofdm, Gfdm };

    System system = System::Gfdm;
    int k = 128;          // subcarriers
    int m = 5;            // GFDM subsymbols per block / OFDM symbols per frame
    int delta = 2;        // subcarrier bands covered by the filter response
    double alpha = 0.5;   // RRC roll-off
    int pilot_sep = 4;    // p_s, pilot subcarrier separation (0 = no pilots)
    int cp_len = 8;
    double pilot_scale = 1.0;      // lambda
    std::vector<int> pilot_bins;   // K-grid bins (OFDM) or N-grid bins (GFDM)

    int n() const { return k * m; }
    int n_pilots() const { return pilot_sep > 0 ? k / pilot_sep : 0; }
    int grid_size() const { return system == System::Gfdm ? n() : k; }
    bool is_pilot_subcarrier(int sc) const { return pilot_sep > 0 && sc % pilot_sep == 0; }
    // number of payload symbols per frame (pilot positions excluded)
    int data_symbols_per_frame() const;

    static WaveformParams make(System system, int k, int m, int pilot_sep, int cp_len,
                               double alpha, int delta = 2);
    void validate() const;  // throws std::invalid_argument on violations
};

struct PrototypeFilter {
    RVec g;        // time pulse, length N, unit energy
    CVec g_delta;  // g downsampled by K/delta, length M*delta
    CVec G_delta;  // frequency window, length M*delta, peak-normalized
    double alpha = 0.0;
    int k = 0;
    int m = 0;
    int delta = 0;
};

// Periodized root-raised-cosine prototype. The frequency window samples the
// closed-form RRC spectrum exactly, so the response null at one subcarrier
// spacing (the pilot bins of the neighbours) is exact to machine precision.
// Construction fails if the adjacent-subcarrier response at a pilot bin
// exceeds 1e-6.
PrototypeFilter rrc_prototype(const WaveformParams& params);

// Closed-form time-domain RRC impulse response, t in units of the subcarrier
// symbol period; singular points evaluated by their analytic limits.
// Exposed for the waveform tests, which cross-check the periodized pulse.
double rrc_impulse(double t, double alpha);

struct GfdmFrame {
    // column k of data_symbols holds the time subsymbols of data
    // subcarrier k (zero columns at pilot subcarriers); column k of
    // pilot_symbols holds d-tilde_k: row 0 the pilot symbol, rows 1..M-1
    // the frequency-placed payload of pilot subcarrier k.
    CMat data_symbols;   // M x K
    CMat pilot_symbols;  // M x K
    CVec time_signal;    // N, filled by the modulator
    CVec with_cp;        // N + cp_len

    void check_disjoint_support(const WaveformParams& params) const;
};

// Random payload with the configured pilot pattern. Pilots are a
// deterministic QPSK sequence drawn from the pilot stream.
GfdmFrame make_random_gfdm_frame(const WaveformParams& params, const CVec& pilots,
                                 RandomStream& data);

// Deterministic QPSK pilot sequence for a configuration.
CVec make_pilot_sequence(const WaveformParams& params, std::uint64_t master_seed);

// Eq-style direct modulators -------------------------------------------------

// x = unitary IDFT of the K data symbols.
CVec ofdm_modulate(const CVec& d);
CVec ofdm_demodulate(const CVec& x);

// Literal direct-sum GFDM modulator: x[n] = sum_k sum_m d(m,k)
// g[(n - mK) mod N] e^{j 2 pi k n / K}.
CVec gfdm_modulate_direct(const CMat& d, const WaveformParams& params,
                          const PrototypeFilter& filter);

// Frequency-domain matrix modulator with interference-free pilot insertion.
CVec gfdm_modulate_matrix(const GfdmFrame& frame, const WaveformParams& params,
                          const PrototypeFilter& filter);

// Matched-filter demodulation of subcarrier k from the time signal.
CVec gfdm_demodulate(const CVec& y, int subcarrier, const WaveformParams& params,
                     const PrototypeFilter& filter);

// Per-subcarrier frequency helpers shared by the modulator and the
// interference-cancelling receiver (single source of truth).
//
// M-point coefficient vector of subcarrier k (W_M d for data subcarriers,
// Gamma d-tilde for pilot subcarriers).
CVec subcarrier_coefficients(const GfdmFrame& frame, int subcarrier,
                             const WaveformParams& params);
// Adds the filtered window of one subcarrier into the N-grid spectrum.
void add_subcarrier_spectrum(CVec& spectrum, int subcarrier, const CVec& coeffs,
                             const WaveformParams& params, const PrototypeFilter& filter);
// Matched-filter fold of subcarrier k's window out of the N-grid spectrum;
// unit diagonal gain by the Nyquist property of the RRC window.
CVec fold_subcarrier(const CVec& spectrum, int subcarrier, const WaveformParams& params,
                     const PrototypeFilter& filter);
// Gamma = P' blkdiag(lambda I, W_{M-1}) and its inverse, acting on
// [pilot; payload] vectors of a pilot subcarrier.
CVec gamma_apply(Cplx pilot, const CVec& payload, const WaveformParams& params);
void gamma_invert(const CVec& coeffs, const WaveformParams& params, Cplx& pilot,
                  CVec& payload);

// Pilot extraction from the full-grid spectrum (length N for GFDM, K for
// OFDM), descaled by lambda and the filter gain at the pilot bin so a flat
// channel returns the transmitted pilot symbols.
CVec extract_pilots(const CVec& y_freq, const WaveformParams& params,
                    const PrototypeFilter* filter = nullptr);

CVec add_cp(const CVec& x, int cp_len);
CVec remove_cp(const CVec& x_cp, int cp_len);

}  // namespace gfdmbem
