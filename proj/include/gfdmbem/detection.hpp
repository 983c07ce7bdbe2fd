// Zero-forcing equalization, the iterative interference-cancellation GFDM
// receiver and bit-error accounting.
#pragma once

#include "gfdmbem/core.hpp"
#include "gfdmbem/waveforms.hpp"

namespace gfdmbem {

// Per-bin division of the received spectrum by the channel estimate. Bins
// with |H| below 1e-8 are regularized along the estimate's phase instead of
// producing Inf; the count of such deep fades is reported when fades != null.
CVec zf_equalize(const CVec& y_freq, const CVec& h_full, int* fades = nullptr);

// Decisions of one GFDM block, mirroring the frame layout: columns of data
// subcarriers hold the M sliced subsymbols, columns of pilot subcarriers
// hold the known pilot in row 0 and the sliced frequency-placed payload in
// rows 1..M-1.
struct IcResult {
    CMat decisions;  // M x K
    int iterations = 0;
};

// Algorithm-style interference cancellation on the equalized spectrum:
// matched-filter detection of every subcarrier, then J Jacobi sweeps that
// subtract the reconstructed adjacent-subcarrier interference (rebuilt with
// the modulator's own per-subcarrier path) and re-slice. J = 0 returns the
// uncancelled decisions. Pilot positions are never re-sliced; the known
// pilots are used when rebuilding pilot-subcarrier interference.
IcResult ic_receive(const CVec& y_eq_freq, const WaveformParams& params,
                    const PrototypeFilter& filter, int iterations, const CVec& known_pilots);

// Gray-mapped bit comparison over the payload positions of a frame; pilot
// positions are excluded.
struct BitErrorCount {
    long long errors = 0;
    long long bits = 0;
};
BitErrorCount count_bit_errors(const CMat& decided, const GfdmFrame& truth,
                               const WaveformParams& params);

}  // namespace gfdmbem
