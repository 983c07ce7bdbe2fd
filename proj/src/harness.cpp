#include "gfdmbem/harness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <optional>
#include <stdexcept>
#include <thread>

#include "gfdmbem/detection.hpp"
#include "gfdmbem/rng.hpp"

namespace gfdmbem {

namespace {

std::uint64_t trial_seed(std::uint64_t master, long trial) {
    return mix_seed(master ^ mix_seed(static_cast<std::uint64_t>(trial)));
}

struct SweepSetup {
    WaveformParams params;
    PrototypeFilter filter;
    ChannelSpec channel;
    CVec pilots;
    BasisSet basis;
    CovarianceMatrix true_cov;
    CovarianceMatrix approx_cov;
    InterpolationContext interp;
};

SweepSetup make_setup(const SimConfig& cfg) {
    SweepSetup s;
    s.params = cfg.waveform_params();
    s.filter = rrc_prototype(s.params);
    s.channel = cfg.channel_spec();
    s.pilots = make_pilot_sequence(s.params, cfg.master_seed);
    s.basis = make_basis_set(cfg.basis, cfg.n_a, cfg.k, cfg.pilot_sep, s.params.grid_size());
    s.true_cov = true_pilot_covariance(s.channel, cfg.k, cfg.pilot_sep);
    s.approx_cov = approx_pilot_covariance(cfg.cp_len, cfg.k, cfg.pilot_sep,
                                           s.params.n_pilots());
    s.interp.grid_size = s.params.grid_size();
    s.interp.k = cfg.k;
    s.interp.pilot_sep = cfg.pilot_sep;
    s.interp.basis = nullptr;  // rebound after the struct settles
    // warm the transform cache so workers never build matrices concurrently
    dft_cache(s.params.n());
    dft_cache(cfg.k);
    dft_cache(cfg.m);
    if (cfg.m > 1) dft_cache(cfg.m - 1);
    return s;
}

// Estimator objects for one noise level; construction does every inversion,
// estimate() only touches precomputed factors.
struct EstimatorBank {
    double noise_var = 0.0;
    std::optional<LmmseEstimator> lmmse;
    std::optional<LsBemEstimator> ls_bem;
    std::optional<LmmseBemEstimator> lmmse_bem;
    std::optional<AlmmseBemEstimator> almmse_bem;

    EstimatorBank(const SweepSetup& s, const std::vector<EstimatorKind>& kinds,
                  double sigma2)
        : noise_var(sigma2) {
        for (EstimatorKind kind : kinds) {
            switch (kind) {
                case EstimatorKind::Lmmse:
                    lmmse.emplace(s.true_cov, sigma2);
                    break;
                case EstimatorKind::LsBem:
                    ls_bem.emplace(s.basis.pilot);
                    break;
                case EstimatorKind::LmmseBem:
                    lmmse_bem.emplace(s.basis.pilot,
                                      coefficient_covariance(s.true_cov, s.basis.pilot),
                                      sigma2);
                    break;
                case EstimatorKind::AlmmseBem:
                    almmse_bem.emplace(s.basis.pilot, s.approx_cov, sigma2);
                    break;
                default:
                    break;
            }
        }
    }

    EstimateResult run(EstimatorKind kind, const PilotObservation& obs) const {
        switch (kind) {
            case EstimatorKind::Ls:
                return LsEstimator().estimate(obs);
            case EstimatorKind::Lmmse:
                return lmmse->estimate(obs);
            case EstimatorKind::LsBem:
                return ls_bem->estimate(obs);
            case EstimatorKind::LmmseBem:
                return lmmse_bem->estimate(obs);
            case EstimatorKind::AlmmseBem:
                return almmse_bem->estimate(obs);
            default:
                throw std::logic_error("estimator bank: perfect CSI is not an estimator");
        }
    }
};

struct ReceivedBlock {
    ChannelRealization realization;
    GfdmFrame frame;      // GFDM payload truth
    CVec ofdm_symbols;    // K x M flattened truth for OFDM (column s at s*K)
    std::vector<CVec> spectra;  // GFDM: one N spectrum; OFDM: M K-spectra
};

// Common transmit/channel/receive chain of one trial at one noise level.
ReceivedBlock run_chain(const SweepSetup& s, const SimConfig& cfg, long trial,
                        double sigma2) {
    ReceivedBlock block;
    block.realization =
        draw_channel(s.channel, s.params.grid_size(), trial_seed(cfg.master_seed, trial));
    RandomStream data(cfg.master_seed, static_cast<std::uint64_t>(trial), Stream::Data);
    RandomStream noise(cfg.master_seed, static_cast<std::uint64_t>(trial), Stream::Noise);

    if (cfg.system == WaveformParams::System::Gfdm) {
        block.frame = make_random_gfdm_frame(s.params, s.pilots, data);
        const CVec x = gfdm_modulate_matrix(block.frame, s.params, s.filter);
        const CVec y = add_awgn(
            apply_channel(add_cp(x, cfg.cp_len), block.realization, cfg.cp_len), sigma2,
            noise);
        block.spectra.push_back(dft_cache(s.params.n()) * remove_cp(y, cfg.cp_len));
        return block;
    }

    block.ofdm_symbols = CVec(cfg.k * cfg.m);
    for (int sym = 0; sym < cfg.m; ++sym) {
        CVec d(cfg.k);
        int q = 0;
        for (int bin = 0; bin < cfg.k; ++bin) {
            if (s.params.pilot_sep > 0 && bin % s.params.pilot_sep == 0) {
                d(bin) = s.params.pilot_scale * s.pilots(q++);
            } else {
                d(bin) = data.qpsk_symbol();
            }
        }
        block.ofdm_symbols.segment(sym * cfg.k, cfg.k) = d;
        const CVec x = ofdm_modulate(d);
        const CVec y = add_awgn(
            apply_channel(add_cp(x, cfg.cp_len), block.realization, cfg.cp_len), sigma2,
            noise);
        block.spectra.push_back(dft_cache(cfg.k) * remove_cp(y, cfg.cp_len));
    }
    return block;
}

PilotObservation make_observation(const SweepSetup& s, const CVec& spectrum,
                                  double sigma2) {
    PilotObservation obs;
    obs.y_p = extract_pilots(spectrum, s.params,
                             s.params.system == WaveformParams::System::Gfdm ? &s.filter
                                                                             : nullptr);
    obs.x_p = s.pilots;
    obs.snr_linear = 1.0 / sigma2;
    obs.beta = 1.0;
    return obs;
}

CVec pilot_bin_response(const SweepSetup& s, const ChannelRealization& real) {
    CVec h(s.params.n_pilots());
    for (int q = 0; q < h.size(); ++q) {
        h(q) = real.freq_response(s.params.pilot_bins[q]);
    }
    return h;
}

struct MseSample {
    double nmse_pilot = 0.0;
    double nmse_full = 0.0;
};

std::vector<MseSample> mse_trial(const SweepSetup& s, const SimConfig& cfg,
                                 const EstimatorBank& bank,
                                 const std::vector<EstimatorKind>& kinds, long trial,
                                 double sigma2) {
    const ReceivedBlock block = run_chain(s, cfg, trial, sigma2);
    const PilotObservation obs = make_observation(s, block.spectra.front(), sigma2);
    const CVec h_p = pilot_bin_response(s, block.realization);
    const double pilot_energy = h_p.squaredNorm();
    const double full_energy = block.realization.freq_response.squaredNorm();

    InterpolationContext interp = s.interp;
    interp.basis = &s.basis;

    std::vector<MseSample> out(kinds.size());
    for (std::size_t e = 0; e < kinds.size(); ++e) {
        EstimateResult est = bank.run(kinds[e], obs);
        out[e].nmse_pilot = (est.h_pilot - h_p).squaredNorm() / pilot_energy;
        interpolate_full_grid(est, interp);
        out[e].nmse_full =
            (est.h_full - block.realization.freq_response).squaredNorm() / full_energy;
    }
    return out;
}

struct BerSample {
    long long errors = 0;
    long long bits = 0;
};

std::vector<BerSample> ber_trial(const SweepSetup& s, const SimConfig& cfg,
                                 const EstimatorBank& bank,
                                 const std::vector<EstimatorKind>& kinds,
                                 const std::vector<char>& active, long trial,
                                 double sigma2) {
    const ReceivedBlock block = run_chain(s, cfg, trial, sigma2);
    InterpolationContext interp = s.interp;
    interp.basis = &s.basis;

    std::vector<BerSample> out(kinds.size());
    if (cfg.system == WaveformParams::System::Gfdm) {
        const PilotObservation obs = make_observation(s, block.spectra.front(), sigma2);
        for (std::size_t e = 0; e < kinds.size(); ++e) {
            if (!active[e]) continue;
            CVec h_full;
            if (kinds[e] == EstimatorKind::PerfectCsi) {
                h_full = block.realization.freq_response;
            } else {
                EstimateResult est = bank.run(kinds[e], obs);
                interpolate_full_grid(est, interp);
                h_full = est.h_full;
            }
            const CVec y_eq = zf_equalize(block.spectra.front(), h_full);
            const IcResult ic =
                ic_receive(y_eq, s.params, s.filter, cfg.ic_iterations, s.pilots);
            const BitErrorCount count = count_bit_errors(ic.decisions, block.frame, s.params);
            out[e].errors = count.errors;
            out[e].bits = count.bits;
        }
        return out;
    }

    // OFDM: per-symbol estimation, equalization and slicing; no IC.
    for (int sym = 0; sym < cfg.m; ++sym) {
        const CVec& spectrum = block.spectra[sym];
        const PilotObservation obs = make_observation(s, spectrum, sigma2);
        const CVec truth = block.ofdm_symbols.segment(sym * cfg.k, cfg.k);
        for (std::size_t e = 0; e < kinds.size(); ++e) {
            if (!active[e]) continue;
            CVec h_full;
            if (kinds[e] == EstimatorKind::PerfectCsi) {
                h_full = block.realization.freq_response;
            } else {
                EstimateResult est = bank.run(kinds[e], obs);
                interpolate_full_grid(est, interp);
                h_full = est.h_full;
            }
            const CVec y_eq = zf_equalize(spectrum, h_full);
            for (int bin = 0; bin < cfg.k; ++bin) {
                if (s.params.pilot_sep > 0 && bin % s.params.pilot_sep == 0) continue;
                out[e].errors += qpsk_bit_errors(qpsk_slice(y_eq(bin)), truth(bin));
                out[e].bits += 2;
            }
        }
    }
    return out;
}

// Runs fn(trial) for trial in [t0, t1) on the worker pool; results land in
// trial order regardless of the worker count.
template <typename Result, typename Fn>
std::vector<Result> run_batch(long t0, long t1, int workers, Fn&& fn) {
    const long count = t1 - t0;
    std::vector<Result> results(static_cast<std::size_t>(count));
    if (workers <= 1 || count <= 1) {
        for (long t = t0; t < t1; ++t) {
            results[static_cast<std::size_t>(t - t0)] = fn(t);
        }
        return results;
    }
    const int used = static_cast<int>(std::min<long>(workers, count));
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(used);
    for (int w = 0; w < used; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (long t = t0 + w; t < t1; t += used) {
                    results[static_cast<std::size_t>(t - t0)] = fn(t);
                }
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return results;
}

double to_db(double x) { return x > 0.0 ? 10.0 * std::log10(x) : -400.0; }

}  // namespace

std::string to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::Ls: return "ls";
        case EstimatorKind::Lmmse: return "lmmse";
        case EstimatorKind::LsBem: return "ls-bem";
        case EstimatorKind::LmmseBem: return "lmmse-bem";
        case EstimatorKind::AlmmseBem: return "almmse-bem";
        case EstimatorKind::PerfectCsi: return "perfect-csi";
    }
    return "?";
}

EstimatorKind estimator_from_string(const std::string& name) {
    if (name == "ls") return EstimatorKind::Ls;
    if (name == "lmmse") return EstimatorKind::Lmmse;
    if (name == "ls-bem") return EstimatorKind::LsBem;
    if (name == "lmmse-bem") return EstimatorKind::LmmseBem;
    if (name == "almmse-bem") return EstimatorKind::AlmmseBem;
    if (name == "perfect-csi") return EstimatorKind::PerfectCsi;
    throw std::invalid_argument("unknown estimator: " + name);
}

std::string to_string(WaveformParams::System system) {
    return system == WaveformParams::System::Gfdm ? "gfdm" : "ofdm";
}

std::string to_string(BasisMatrix::Kind kind) {
    return kind == BasisMatrix::Kind::Ce ? "ce" : "lp";
}

ChannelSpec SimConfig::channel_spec() const {
    if (awgn_channel) return ChannelSpec::awgn_only(cp_len, k);
    return ChannelSpec::paper_default(cp_len, k);
}

WaveformParams SimConfig::waveform_params() const {
    return WaveformParams::make(system, k, m, pilot_sep, cp_len, alpha);
}

void SimConfig::validate() const {
    waveform_params();           // throws on bad waveform geometry
    channel_spec().validate();   // throws on CP/delay conflicts
    if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
    if (n_a < 1 || (pilot_sep > 0 && n_a > k / pilot_sep))
        throw std::invalid_argument("config: N_a must lie in [1, N_p]");
    if (ic_iterations < 0) throw std::invalid_argument("config: J must be >= 0");
    if (workers < 1) throw std::invalid_argument("config: workers must be >= 1");
    if (early_stop_errors < 0)
        throw std::invalid_argument("config: early stop threshold must be >= 0");
    if (ebn0_grid_db.empty()) throw std::invalid_argument("config: Eb/N0 grid is empty");
    for (EstimatorKind kind : estimators) {
        if ((kind == EstimatorKind::Lmmse || kind == EstimatorKind::LsBem ||
             kind == EstimatorKind::LmmseBem || kind == EstimatorKind::AlmmseBem ||
             kind == EstimatorKind::Ls) &&
            pilot_sep == 0) {
            throw std::invalid_argument("config: estimators need pilots (pilot_sep > 0)");
        }
    }
}

double ebn0_to_noise_variance(double ebn0_db, const SimConfig& config) {
    const double ebn0 = std::pow(10.0, ebn0_db / 10.0);
    const double k = config.k;
    const double n = static_cast<double>(config.k) * config.m;
    const double cp_factor = config.system == WaveformParams::System::Ofdm
                                 ? (k + config.cp_len) / k
                                 : (n + config.cp_len) / n;
    const double n_p = config.pilot_sep > 0 ? k / config.pilot_sep : 0.0;
    const double pilot_factor = n_p > 0.0 ? k / (k - n_p) : 1.0;
    return cp_factor * pilot_factor / (2.0 * ebn0);
}

SweepReport run_mse_sweep(const SimConfig& config) {
    config.validate();
    const SweepSetup setup = make_setup(config);

    std::vector<EstimatorKind> kinds;
    for (EstimatorKind kind : config.estimators) {
        if (kind != EstimatorKind::PerfectCsi) kinds.push_back(kind);
    }

    SweepReport report;
    report.kind = "mse";
    report.seed = config.master_seed;
    report.config_json = config.to_json();

    for (double ebn0 : config.ebn0_grid_db) {
        if (kinds.empty()) break;
        const double sigma2 = ebn0_to_noise_variance(ebn0, config);
        const EstimatorBank bank(setup, kinds, sigma2);
        std::vector<double> sum_p(kinds.size(), 0.0), sumsq_p(kinds.size(), 0.0);
        std::vector<double> sum_f(kinds.size(), 0.0);
        constexpr long kBatch = 256;
        for (long t0 = 0; t0 < config.trials; t0 += kBatch) {
            const long t1 = std::min<long>(config.trials, t0 + kBatch);
            auto samples = run_batch<std::vector<MseSample>>(
                t0, t1, config.workers, [&](long trial) {
                    return mse_trial(setup, config, bank, kinds, trial, sigma2);
                });
            for (const auto& per_trial : samples) {
                for (std::size_t e = 0; e < kinds.size(); ++e) {
                    sum_p[e] += per_trial[e].nmse_pilot;
                    sumsq_p[e] += per_trial[e].nmse_pilot * per_trial[e].nmse_pilot;
                    sum_f[e] += per_trial[e].nmse_full;
                }
            }
        }
        for (std::size_t e = 0; e < kinds.size(); ++e) {
            const double tcount = static_cast<double>(config.trials);
            const double mean = sum_p[e] / tcount;
            const double var =
                std::max(0.0, sumsq_p[e] / tcount - mean * mean) * tcount / (tcount - 1.0);
            const double hw = 1.96 * std::sqrt(var / tcount);
            SweepCell cell;
            cell.system = to_string(config.system);
            cell.estimator = to_string(kinds[e]);
            cell.basis = to_string(config.basis);
            cell.ebn0_db = ebn0;
            cell.mse_db = to_db(mean);
            cell.mse_full_db = to_db(sum_f[e] / tcount);
            cell.ber = std::nan("");
            cell.trials = config.trials;
            cell.ci_halfwidth = mean > 0.0 ? to_db(mean + hw) - to_db(mean) : 0.0;
            report.cells.push_back(cell);
        }
    }
    return report;
}

SweepReport run_ber_sweep(const SimConfig& config) {
    config.validate();
    const SweepSetup setup = make_setup(config);

    std::vector<EstimatorKind> kinds{EstimatorKind::PerfectCsi};
    for (EstimatorKind kind : config.estimators) {
        if (kind != EstimatorKind::PerfectCsi) kinds.push_back(kind);
    }

    SweepReport report;
    report.kind = "ber";
    report.seed = config.master_seed;
    report.config_json = config.to_json();

    for (double ebn0 : config.ebn0_grid_db) {
        const double sigma2 = ebn0_to_noise_variance(ebn0, config);
        const EstimatorBank bank(setup, kinds, sigma2);
        std::vector<BerSample> totals(kinds.size());
        std::vector<long long> trials_used(kinds.size(), 0);
        std::vector<char> active(kinds.size(), 1);
        constexpr long kBatch = 64;
        for (long t0 = 0; t0 < config.trials; t0 += kBatch) {
            if (std::none_of(active.begin(), active.end(), [](char a) { return a != 0; }))
                break;
            const long t1 = std::min<long>(config.trials, t0 + kBatch);
            auto samples = run_batch<std::vector<BerSample>>(
                t0, t1, config.workers, [&](long trial) {
                    return ber_trial(setup, config, bank, kinds, active, trial, sigma2);
                });
            for (const auto& per_trial : samples) {
                for (std::size_t e = 0; e < kinds.size(); ++e) {
                    if (!active[e]) continue;
                    totals[e].errors += per_trial[e].errors;
                    totals[e].bits += per_trial[e].bits;
                }
            }
            for (std::size_t e = 0; e < kinds.size(); ++e) {
                if (!active[e]) continue;
                trials_used[e] = t1;
                if (config.early_stop_errors > 0 &&
                    totals[e].errors >= config.early_stop_errors) {
                    active[e] = 0;
                }
            }
        }
        for (std::size_t e = 0; e < kinds.size(); ++e) {
            const double bits = static_cast<double>(totals[e].bits);
            const double p = bits > 0.0 ? totals[e].errors / bits : 0.0;
            SweepCell cell;
            cell.system = to_string(config.system);
            cell.estimator = to_string(kinds[e]);
            cell.basis = to_string(config.basis);
            cell.ebn0_db = ebn0;
            cell.mse_db = std::nan("");
            cell.mse_full_db = std::nan("");
            cell.ber = p;
            cell.trials = trials_used[e];
            cell.ci_halfwidth = bits > 0.0 ? 1.96 * std::sqrt(p * (1.0 - p) / bits) : 0.0;
            report.cells.push_back(cell);
        }
    }
    return report;
}

double ebn0_at_ber(const std::vector<double>& ebn0_db, const std::vector<double>& ber,
                   double target) {
    if (ebn0_db.size() != ber.size() || ebn0_db.size() < 2) {
        throw std::invalid_argument("ebn0_at_ber: need matching curves");
    }
    constexpr double kFloor = 1e-12;
    for (std::size_t i = 0; i + 1 < ber.size(); ++i) {
        const double hi = std::max(ber[i], kFloor);
        const double lo = std::max(ber[i + 1], kFloor);
        if (hi >= target && lo <= target) {
            const double lh = std::log10(hi), ll = std::log10(lo), lt = std::log10(target);
            if (lh == ll) return ebn0_db[i];
            const double f = (lh - lt) / (lh - ll);
            return ebn0_db[i] + f * (ebn0_db[i + 1] - ebn0_db[i]);
        }
    }
    return std::nan("");
}

}  // namespace gfdmbem
