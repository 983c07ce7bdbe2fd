// Configuration, seeded Monte Carlo MSE/BER sweeps and report emission.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gfdmbem/channel.hpp"
#include "gfdmbem/estimators.hpp"
#include "gfdmbem/waveforms.hpp"

namespace gfdmbem {

enum class EstimatorKind { Ls, Lmmse, LsBem, LmmseBem, AlmmseBem, PerfectCsi };

std::string to_string(EstimatorKind kind);
EstimatorKind estimator_from_string(const std::string& name);
std::string to_string(WaveformParams::System system);
std::string to_string(BasisMatrix::Kind kind);

struct SimConfig {
    WaveformParams::System system = WaveformParams::System::Gfdm;
    int k = 128;
    int m = 5;
    int pilot_sep = 4;
    int cp_len = 8;
    double alpha = 0.5;
    int n_a = 18;
    int ic_iterations = 2;  // J
    BasisMatrix::Kind basis = BasisMatrix::Kind::Ce;
    std::vector<EstimatorKind> estimators{EstimatorKind::Ls, EstimatorKind::Lmmse,
                                          EstimatorKind::LsBem, EstimatorKind::LmmseBem,
                                          EstimatorKind::AlmmseBem};
    std::vector<double> ebn0_grid_db{0, 5, 10, 15, 20, 25, 30};
    long trials = 2000;            // MSE trials / BER trial cap per cell
    int early_stop_errors = 200;   // BER early stop threshold (0 = off)
    std::uint64_t master_seed = 42;
    bool awgn_channel = false;     // deterministic flat channel reference
    int workers = 1;

    ChannelSpec channel_spec() const;
    WaveformParams waveform_params() const;
    void validate() const;

    std::string to_json() const;
    static SimConfig from_json(const std::string& text);
};

// sigma^2 = Es / (bits_per_symbol * ebn0_linear) * overhead, with the CP
// charged per OFDM symbol but once per GFDM block, and the pilot overhead
// K/(K - N_p) charged to both systems.
double ebn0_to_noise_variance(double ebn0_db, const SimConfig& config);

struct SweepCell {
    std::string system;
    std::string estimator;
    std::string basis;
    double ebn0_db = 0.0;
    double mse_db = 0.0;        // pilot-bin normalized MSE, dB (NaN in BER sweeps)
    double mse_full_db = 0.0;   // full-grid normalized MSE, dB (secondary)
    double ber = 0.0;           // NaN in MSE sweeps
    long long trials = 0;
    double ci_halfwidth = 0.0;  // dB for MSE cells, absolute for BER cells
};

struct SweepReport {
    std::string schema_version = "1";
    std::string kind;  // "mse" or "ber"
    std::uint64_t seed = 0;
    std::string config_json;
    std::vector<SweepCell> cells;
};

SweepReport run_mse_sweep(const SimConfig& config);
SweepReport run_ber_sweep(const SimConfig& config);

std::string report_to_csv(const SweepReport& report);
std::string report_to_json(const SweepReport& report);
void write_report(const SweepReport& report, const std::string& path, bool json);

// log-domain linear interpolation of the Eb/N0 (dB) where a BER curve
// crosses `target`; used for horizontal-gap comparisons.
double ebn0_at_ber(const std::vector<double>& ebn0_db, const std::vector<double>& ber,
                   double target);

}  // namespace gfdmbem
