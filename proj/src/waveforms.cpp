#include "gfdmbem/waveforms.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gfdmbem/rng.hpp"

namespace gfdmbem {

namespace {

// Raised-cosine spectrum, f in units of the subcarrier spacing.
double raised_cosine(double f, double alpha) {
    const double af = std::abs(f);
    const double lo = 0.5 * (1.0 - alpha);
    const double hi = 0.5 * (1.0 + alpha);
    if (af <= lo) return 1.0;
    if (af >= hi) return 0.0;
    return 0.5 * (1.0 + std::cos(std::numbers::pi / alpha * (af - lo)));
}

// Frequency offset (in subcarrier spacings) of window entry i.
double window_offset(int i, int m, int delta) {
    const int half = m * delta / 2;
    return (i < half ? i : i - m * delta) / static_cast<double>(m);
}

// N-grid bin occupied by window entry i of subcarrier sc.
int window_bin(int sc, int i, const WaveformParams& p) {
    const int half = p.m * p.delta / 2;
    const int offset = (i < half) ? i : i - p.m * p.delta;
    const int n = p.n();
    return ((sc * p.m + offset) % n + n) % n;
}

}  // namespace

int WaveformParams::data_symbols_per_frame() const {
    if (system == System::Ofdm) return (k - n_pilots()) * m;
    return k * m - n_pilots();
}

WaveformParams WaveformParams::make(System system, int k, int m, int pilot_sep, int cp_len,
                                    double alpha, int delta) {
    WaveformParams p;
    p.system = system;
    p.k = k;
    p.m = m;
    p.pilot_sep = pilot_sep;
    p.cp_len = cp_len;
    p.alpha = alpha;
    p.delta = delta;
    p.pilot_scale = 1.0;  // peak-normalized prototype window
    if (pilot_sep > 0) {
        for (int sc = 0; sc < k; sc += pilot_sep) {
            p.pilot_bins.push_back(system == System::Gfdm ? sc * m : sc);
        }
    }
    p.validate();
    return p;
}

void WaveformParams::validate() const {
    if (k < 1 || m < 1) throw std::invalid_argument("params: K and M must be positive");
    if (pilot_sep < 0) throw std::invalid_argument("params: pilot separation must be >= 0");
    if (pilot_sep > 0 && k % pilot_sep != 0)
        throw std::invalid_argument("params: pilot separation must divide K");
    if (delta < 1 || delta > m)
        throw std::invalid_argument("params: delta must satisfy 1 <= delta <= M");
    if (static_cast<long long>(delta) * m > static_cast<long long>(n()))
        throw std::invalid_argument("params: delta*M exceeds N");
    if (alpha <= 0.0 || alpha > 1.0)
        throw std::invalid_argument("params: roll-off must be in (0, 1]");
    if (cp_len < 0 || cp_len > n()) throw std::invalid_argument("params: bad CP length");
    if (pilot_scale <= 0.0) throw std::invalid_argument("params: pilot scale must be > 0");
    if (static_cast<int>(pilot_bins.size()) != n_pilots())
        throw std::invalid_argument("params: pilot bin list does not match N_p");
    const int grid = grid_size();
    for (int b : pilot_bins) {
        if (b < 0 || b >= grid) throw std::invalid_argument("params: pilot bin out of range");
    }
}

double rrc_impulse(double t, double alpha) {
    const double pi = std::numbers::pi;
    if (std::abs(t) < 1e-12) {
        return 1.0 - alpha + 4.0 * alpha / pi;
    }
    const double s = 4.0 * alpha * t;
    if (std::abs(std::abs(s) - 1.0) < 1e-9) {
        // analytic limit at t = +-1/(4 alpha)
        return alpha / std::numbers::sqrt2 *
               ((1.0 + 2.0 / pi) * std::sin(pi / (4.0 * alpha)) +
                (1.0 - 2.0 / pi) * std::cos(pi / (4.0 * alpha)));
    }
    return (std::sin(pi * t * (1.0 - alpha)) + s * std::cos(pi * t * (1.0 + alpha))) /
           (pi * t * (1.0 - s * s));
}

PrototypeFilter rrc_prototype(const WaveformParams& params) {
    params.validate();
    if (params.k % params.delta != 0)
        throw std::invalid_argument("rrc_prototype: delta must divide K");
    const int m = params.m;
    const int delta = params.delta;
    const int n = params.n();
    const int w = m * delta;

    PrototypeFilter f;
    f.alpha = params.alpha;
    f.k = params.k;
    f.m = m;
    f.delta = delta;

    // Exact frequency samples of the RRC spectrum on the window. This is the
    // infinite periodization of the time-domain pulse evaluated in closed
    // form; truncated time-domain summation cannot reach the 1e-10
    // pilot-orthogonality budget.
    f.G_delta = CVec::Zero(w);
    for (int i = 0; i < w; ++i) {
        f.G_delta(i) = std::sqrt(raised_cosine(window_offset(i, m, delta), params.alpha));
    }
    // Adjacent-subcarrier response at a pilot bin (offset of one full
    // subcarrier spacing) must be a null or pilots are not interference-free.
    if (std::sqrt(raised_cosine(1.0, params.alpha)) > 1e-6) {
        throw std::runtime_error("rrc_prototype: adjacent-subcarrier response not null");
    }

    // Time pulse: place the window on the N grid and inverse transform.
    CVec spectrum = CVec::Zero(n);
    for (int i = 0; i < w; ++i) {
        const int half = w / 2;
        const int bin = (i < half) ? i : n + i - w;
        spectrum(bin) = f.G_delta(i);
    }
    CVec g = dft_cache(n).adjoint() * spectrum / std::sqrt(static_cast<double>(m));
    f.g = g.real();
    if (g.imag().cwiseAbs().maxCoeff() > 1e-9) {
        throw std::runtime_error("rrc_prototype: time pulse not real");
    }
    f.g /= f.g.norm();  // unit energy, exact

    const int down = params.k / delta;
    f.g_delta = CVec::Zero(w);
    for (int i = 0; i < w; ++i) {
        f.g_delta(i) = f.g(i * down);
    }
    return f;
}

void GfdmFrame::check_disjoint_support(const WaveformParams& params) const {
    if (data_symbols.rows() != params.m || data_symbols.cols() != params.k ||
        pilot_symbols.rows() != params.m || pilot_symbols.cols() != params.k) {
        throw std::invalid_argument("frame: symbol matrices must be M x K");
    }
    for (int sc = 0; sc < params.k; ++sc) {
        const bool pilot_sc = params.is_pilot_subcarrier(sc);
        const double data_norm = data_symbols.col(sc).norm();
        const double pilot_norm = pilot_symbols.col(sc).norm();
        if (pilot_sc && data_norm != 0.0)
            throw std::invalid_argument("frame: data symbols on a pilot subcarrier");
        if (!pilot_sc && pilot_norm != 0.0)
            throw std::invalid_argument("frame: pilot symbols on a data subcarrier");
    }
}

CVec make_pilot_sequence(const WaveformParams& params, std::uint64_t master_seed) {
    RandomStream stream(master_seed, 0, Stream::Pilot);
    CVec pilots(params.n_pilots());
    for (int q = 0; q < pilots.size(); ++q) {
        pilots(q) = stream.qpsk_symbol();
    }
    return pilots;
}

GfdmFrame make_random_gfdm_frame(const WaveformParams& params, const CVec& pilots,
                                 RandomStream& data) {
    if (pilots.size() != params.n_pilots())
        throw std::invalid_argument("frame: pilot vector does not match N_p");
    GfdmFrame frame;
    frame.data_symbols = CMat::Zero(params.m, params.k);
    frame.pilot_symbols = CMat::Zero(params.m, params.k);
    int q = 0;
    for (int sc = 0; sc < params.k; ++sc) {
        if (params.is_pilot_subcarrier(sc)) {
            frame.pilot_symbols(0, sc) = pilots(q++);
            for (int r = 1; r < params.m; ++r) {
                frame.pilot_symbols(r, sc) = data.qpsk_symbol();
            }
        } else {
            for (int r = 0; r < params.m; ++r) {
                frame.data_symbols(r, sc) = data.qpsk_symbol();
            }
        }
    }
    return frame;
}

CVec ofdm_modulate(const CVec& d) {
    return dft_cache(static_cast<int>(d.size())).adjoint() * d;
}

CVec ofdm_demodulate(const CVec& x) {
    return dft_cache(static_cast<int>(x.size())) * x;
}

CVec gfdm_modulate_direct(const CMat& d, const WaveformParams& params,
                          const PrototypeFilter& filter) {
    if (d.rows() != params.m || d.cols() != params.k)
        throw std::invalid_argument("gfdm_modulate_direct: symbol matrix must be M x K");
    const int n = params.n();
    CVec x = CVec::Zero(n);
    for (int nn = 0; nn < n; ++nn) {
        Cplx acc = 0.0;
        for (int sc = 0; sc < params.k; ++sc) {
            const double phi = 2.0 * std::numbers::pi * sc * nn / params.k;
            const Cplx carrier(std::cos(phi), std::sin(phi));
            Cplx sub = 0.0;
            for (int mm = 0; mm < params.m; ++mm) {
                const int idx = ((nn - mm * params.k) % n + n) % n;
                sub += d(mm, sc) * filter.g(idx);
            }
            acc += sub * carrier;
        }
        x(nn) = acc;
    }
    return x;
}

CVec subcarrier_coefficients(const GfdmFrame& frame, int subcarrier,
                             const WaveformParams& params) {
    if (params.is_pilot_subcarrier(subcarrier)) {
        const CVec col = frame.pilot_symbols.col(subcarrier);
        return gamma_apply(col(0), col.tail(params.m - 1), params);
    }
    return dft_cache(params.m) * frame.data_symbols.col(subcarrier);
}

CVec gamma_apply(Cplx pilot, const CVec& payload, const WaveformParams& params) {
    if (payload.size() != params.m - 1)
        throw std::invalid_argument("gamma_apply: payload must have M-1 entries");
    CVec c(params.m);
    c(0) = params.pilot_scale * pilot;
    if (params.m > 1) {
        c.tail(params.m - 1) = dft_cache(params.m - 1) * payload;
    }
    return c;
}

void gamma_invert(const CVec& coeffs, const WaveformParams& params, Cplx& pilot,
                  CVec& payload) {
    if (coeffs.size() != params.m)
        throw std::invalid_argument("gamma_invert: coefficient vector must have M entries");
    pilot = coeffs(0) / params.pilot_scale;
    payload = CVec::Zero(params.m - 1);
    if (params.m > 1) {
        payload = dft_cache(params.m - 1).adjoint() * coeffs.tail(params.m - 1);
    }
}

void add_subcarrier_spectrum(CVec& spectrum, int subcarrier, const CVec& coeffs,
                             const WaveformParams& params, const PrototypeFilter& filter) {
    if (spectrum.size() != params.n())
        throw std::invalid_argument("add_subcarrier_spectrum: spectrum must have N entries");
    if (coeffs.size() != params.m)
        throw std::invalid_argument("add_subcarrier_spectrum: coefficients must have M entries");
    const int w = params.m * params.delta;
    for (int i = 0; i < w; ++i) {
        spectrum(window_bin(subcarrier, i, params)) +=
            filter.G_delta(i) * coeffs(i % params.m);
    }
}

CVec fold_subcarrier(const CVec& spectrum, int subcarrier, const WaveformParams& params,
                     const PrototypeFilter& filter) {
    if (spectrum.size() != params.n())
        throw std::invalid_argument("fold_subcarrier: spectrum must have N entries");
    CVec z = CVec::Zero(params.m);
    const int w = params.m * params.delta;
    for (int i = 0; i < w; ++i) {
        z(i % params.m) +=
            std::conj(filter.G_delta(i)) * spectrum(window_bin(subcarrier, i, params));
    }
    return z;
}

CVec gfdm_modulate_matrix(const GfdmFrame& frame, const WaveformParams& params,
                          const PrototypeFilter& filter) {
    frame.check_disjoint_support(params);
    CVec spectrum = CVec::Zero(params.n());
    for (int sc = 0; sc < params.k; ++sc) {
        add_subcarrier_spectrum(spectrum, sc, subcarrier_coefficients(frame, sc, params),
                                params, filter);
    }
    return dft_cache(params.n()).adjoint() * spectrum;
}

CVec gfdm_demodulate(const CVec& y, int subcarrier, const WaveformParams& params,
                     const PrototypeFilter& filter) {
    if (subcarrier < 0 || subcarrier >= params.k)
        throw std::out_of_range("gfdm_demodulate: subcarrier index out of range");
    if (y.size() != params.n())
        throw std::invalid_argument("gfdm_demodulate: signal must have N samples");
    const CVec spectrum = dft_cache(params.n()) * y;
    return dft_cache(params.m).adjoint() * fold_subcarrier(spectrum, subcarrier, params, filter);
}

CVec extract_pilots(const CVec& y_freq, const WaveformParams& params,
                    const PrototypeFilter* filter) {
    if (y_freq.size() != params.grid_size())
        throw std::invalid_argument("extract_pilots: spectrum size does not match grid");
    double gain = params.pilot_scale;
    if (params.system == WaveformParams::System::Gfdm) {
        if (filter == nullptr)
            throw std::invalid_argument("extract_pilots: GFDM extraction needs the filter");
        gain *= std::abs(filter->G_delta(0));
    }
    CVec out(params.n_pilots());
    for (int q = 0; q < out.size(); ++q) {
        const int bin = params.pilot_bins.at(q);
        if (bin >= y_freq.size()) throw std::out_of_range("extract_pilots: pilot bin out of range");
        out(q) = y_freq(bin) / gain;
    }
    return out;
}

CVec add_cp(const CVec& x, int cp_len) {
    if (cp_len < 0 || cp_len > x.size())
        throw std::invalid_argument("add_cp: CP length must be in [0, len(x)]");
    CVec out(x.size() + cp_len);
    out.head(cp_len) = x.tail(cp_len);
    out.tail(x.size()) = x;
    return out;
}

CVec remove_cp(const CVec& x_cp, int cp_len) {
    if (cp_len < 0 || cp_len > x_cp.size())
        throw std::invalid_argument("remove_cp: CP length must be in [0, len(x)]");
    return x_cp.tail(x_cp.size() - cp_len);
}

}  // namespace gfdmbem
