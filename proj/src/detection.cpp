#include "gfdmbem/detection.hpp"

#include <cmath>
#include <stdexcept>

namespace gfdmbem {

namespace {

// Slice the M-point coefficient window of one subcarrier into symbol
// decisions, leaving pilot entries untouched.
void slice_subcarrier(const CVec& folded, int sc, const WaveformParams& params,
                      const CVec& known_pilots, CMat& decisions) {
    const int m = params.m;
    if (params.is_pilot_subcarrier(sc)) {
        Cplx pilot;
        CVec payload;
        gamma_invert(folded, params, pilot, payload);
        decisions(0, sc) = known_pilots(sc / params.pilot_sep);
        for (int r = 1; r < m; ++r) {
            decisions(r, sc) = qpsk_slice(payload(r - 1));
        }
    } else {
        const CVec d = dft_cache(m).adjoint() * folded;
        for (int r = 0; r < m; ++r) {
            decisions(r, sc) = qpsk_slice(d(r));
        }
    }
}

// Coefficient window of subcarrier sc rebuilt from current decisions; the
// known pilot replaces the decided value on pilot subcarriers.
CVec rebuild_coefficients(const CMat& decisions, int sc, const WaveformParams& params,
                          const CVec& known_pilots) {
    if (params.is_pilot_subcarrier(sc)) {
        const CVec payload = decisions.col(sc).tail(params.m - 1);
        return gamma_apply(known_pilots(sc / params.pilot_sep), payload, params);
    }
    return dft_cache(params.m) * decisions.col(sc);
}

}  // namespace

CVec zf_equalize(const CVec& y_freq, const CVec& h_full, int* fades) {
    if (y_freq.size() != h_full.size()) {
        throw std::invalid_argument("zf_equalize: grid size mismatch");
    }
    constexpr double kFloor = 1e-8;
    CVec out(y_freq.size());
    int deep = 0;
    for (Eigen::Index i = 0; i < y_freq.size(); ++i) {
        Cplx h = h_full(i);
        const double mag = std::abs(h);
        if (mag < kFloor) {
            // keep the estimate's phase, lift the magnitude to the floor
            h = (mag == 0.0) ? Cplx(kFloor, 0.0) : h * (kFloor / mag);
            ++deep;
        }
        out(i) = y_freq(i) / h;
    }
    if (fades != nullptr) *fades = deep;
    return out;
}

IcResult ic_receive(const CVec& y_eq_freq, const WaveformParams& params,
                    const PrototypeFilter& filter, int iterations, const CVec& known_pilots) {
    if (y_eq_freq.size() != params.n()) {
        throw std::invalid_argument("ic_receive: spectrum must have N entries");
    }
    if (iterations < 0) throw std::invalid_argument("ic_receive: J must be >= 0");
    if (known_pilots.size() != params.n_pilots()) {
        throw std::invalid_argument("ic_receive: pilot vector does not match N_p");
    }
    const int k = params.k;
    const int m = params.m;

    // y_k^(0): matched-filter windows before any cancellation
    std::vector<CVec> folded0(k);
    for (int sc = 0; sc < k; ++sc) {
        folded0[sc] = fold_subcarrier(y_eq_freq, sc, params, filter);
    }

    IcResult result;
    result.decisions = CMat::Zero(m, k);
    result.iterations = iterations;
    for (int sc = 0; sc < k; ++sc) {
        slice_subcarrier(folded0[sc], sc, params, known_pilots, result.decisions);
    }

    CVec neighbours = CVec::Zero(params.n());
    for (int j = 1; j <= iterations; ++j) {
        const CMat previous = result.decisions;  // Jacobi sweep: j-1 snapshot only
        for (int sc = 0; sc < k; ++sc) {
            const int left = (sc - 1 + k) % k;
            const int right = (sc + 1) % k;
            neighbours.setZero();
            add_subcarrier_spectrum(neighbours, left,
                                    rebuild_coefficients(previous, left, params, known_pilots),
                                    params, filter);
            add_subcarrier_spectrum(neighbours, right,
                                    rebuild_coefficients(previous, right, params, known_pilots),
                                    params, filter);
            const CVec cleaned =
                folded0[sc] - fold_subcarrier(neighbours, sc, params, filter);
            slice_subcarrier(cleaned, sc, params, known_pilots, result.decisions);
        }
    }
    return result;
}

BitErrorCount count_bit_errors(const CMat& decided, const GfdmFrame& truth,
                               const WaveformParams& params) {
    if (decided.rows() != params.m || decided.cols() != params.k) {
        throw std::invalid_argument("count_bit_errors: decision matrix must be M x K");
    }
    BitErrorCount count;
    for (int sc = 0; sc < params.k; ++sc) {
        if (params.is_pilot_subcarrier(sc)) {
            for (int r = 1; r < params.m; ++r) {
                count.errors += qpsk_bit_errors(decided(r, sc), truth.pilot_symbols(r, sc));
                count.bits += 2;
            }
        } else {
            for (int r = 0; r < params.m; ++r) {
                count.errors += qpsk_bit_errors(decided(r, sc), truth.data_symbols(r, sc));
                count.bits += 2;
            }
        }
    }
    return count;
}

}  // namespace gfdmbem
