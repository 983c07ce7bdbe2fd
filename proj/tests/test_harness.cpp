#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gfdmbem/harness.hpp"

using namespace gfdmbem;

namespace {

SimConfig small_config() {
    SimConfig c;
    c.system = WaveformParams::System::Gfdm;
    c.k = 32;
    c.m = 5;
    c.pilot_sep = 4;
    c.cp_len = 8;
    c.n_a = 8;
    c.trials = 60;
    c.ebn0_grid_db = {5, 15};
    c.master_seed = 7;
    return c;
}

}  // namespace

TEST_CASE("noise variance accounting") {
    SimConfig c;
    c.system = WaveformParams::System::Ofdm;
    c.k = 128;
    c.m = 5;
    c.pilot_sep = 0;
    c.cp_len = 0;
    c.estimators.clear();
    CHECK(ebn0_to_noise_variance(0.0, c) == doctest::Approx(0.5).epsilon(1e-12));

    SimConfig gfdm;
    gfdm.system = WaveformParams::System::Gfdm;
    const double overhead_gfdm = ebn0_to_noise_variance(0.0, gfdm) * 2.0;
    CHECK(overhead_gfdm == doctest::Approx(648.0 / 640.0 * 128.0 / 96.0).epsilon(1e-12));

    SimConfig ofdm = gfdm;
    ofdm.system = WaveformParams::System::Ofdm;
    const double overhead_ofdm = ebn0_to_noise_variance(0.0, ofdm) * 2.0;
    CHECK(overhead_ofdm == doctest::Approx(136.0 / 128.0 * 128.0 / 96.0).epsilon(1e-12));
    CHECK(overhead_ofdm > overhead_gfdm);  // CP in every OFDM symbol
}

TEST_CASE("config validation and JSON round trip") {
    SimConfig c = small_config();
    CHECK_NOTHROW(c.validate());

    SimConfig bad = c;
    bad.pilot_sep = 5;  // does not divide K
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = c;
    bad.n_a = 9;  // exceeds N_p
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = c;
    bad.trials = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    const SimConfig back = SimConfig::from_json(c.to_json());
    CHECK(back.to_json() == c.to_json());
    CHECK(back.k == c.k);
    CHECK(back.master_seed == c.master_seed);
    CHECK(back.estimators.size() == c.estimators.size());

    CHECK_THROWS_AS(SimConfig::from_json("{ not json"), std::invalid_argument);
    CHECK_THROWS_AS(estimator_from_string("bogus"), std::invalid_argument);
}

TEST_CASE("mse sweep: determinism across runs and worker counts") {
    SimConfig c = small_config();
    c.workers = 1;
    const std::string csv1 = report_to_csv(run_mse_sweep(c));
    const std::string csv2 = report_to_csv(run_mse_sweep(c));
    CHECK(csv1 == csv2);

    c.workers = 3;
    const std::string csv3 = report_to_csv(run_mse_sweep(c));
    CHECK(csv1 == csv3);

    SimConfig other = c;
    other.master_seed = 8;
    CHECK(report_to_csv(run_mse_sweep(other)) != csv1);
}

TEST_CASE("mse sweep: noise off recovers the channel exactly") {
    SimConfig c = small_config();
    c.estimators = {EstimatorKind::Ls};
    c.ebn0_grid_db = {300.0};
    c.trials = 20;
    const SweepReport r = run_mse_sweep(c);
    REQUIRE(r.cells.size() == 1);
    CHECK(r.cells[0].mse_db < -100.0);
}

TEST_CASE("mse sweep: cells carry metadata and are grid-monotone") {
    SimConfig c = small_config();
    c.ebn0_grid_db = {0, 10, 20};
    c.trials = 150;
    const SweepReport r = run_mse_sweep(c);
    REQUIRE(r.cells.size() == 3 * c.estimators.size());
    for (const SweepCell& cell : r.cells) {
        CHECK(cell.system == "gfdm");
        CHECK(cell.trials == 150);
        CHECK(std::isfinite(cell.mse_db));
        CHECK(std::isnan(cell.ber));
    }
    // per estimator, MSE does not increase with Eb/N0 (well beyond the CI here)
    for (std::size_t e = 0; e < c.estimators.size(); ++e) {
        const double m0 = r.cells[e].mse_db;
        const double m1 = r.cells[e + c.estimators.size()].mse_db;
        const double m2 = r.cells[e + 2 * c.estimators.size()].mse_db;
        CHECK(m1 < m0);
        CHECK(m2 < m1);
    }
}

TEST_CASE("ber sweep: perfect CSI bounds the estimated curves") {
    SimConfig c = small_config();
    c.estimators = {EstimatorKind::Ls, EstimatorKind::AlmmseBem};
    c.ebn0_grid_db = {6.0};
    c.trials = 120;
    c.early_stop_errors = 0;  // fixed trial count for the comparison
    const SweepReport r = run_ber_sweep(c);
    REQUIRE(r.cells.size() == 3);  // perfect-csi + 2 estimators
    CHECK(r.cells[0].estimator == "perfect-csi");
    const double p_csi = r.cells[0].ber;
    for (std::size_t i = 1; i < r.cells.size(); ++i) {
        CHECK(r.cells[i].ber >= p_csi - 1e-12);
    }
}

TEST_CASE("ber sweep: early stopping records the trials used") {
    SimConfig c = small_config();
    c.estimators = {EstimatorKind::Ls};
    c.ebn0_grid_db = {0.0};  // high BER: a handful of frames suffices
    c.trials = 5000;
    c.early_stop_errors = 100;
    const SweepReport r = run_ber_sweep(c);
    for (const SweepCell& cell : r.cells) {
        CHECK(cell.trials < 5000);
        CHECK(cell.ber * 2.0 * (c.k * c.m - c.k / c.pilot_sep) * cell.trials >= 100);
    }
}

TEST_CASE("report emission") {
    SimConfig c = small_config();
    c.estimators.clear();
    const SweepReport empty = run_mse_sweep(c);
    const std::string csv = report_to_csv(empty);
    CHECK(csv ==
          "system,estimator,basis,ebn0_db,mse_db,ber,trials,ci_halfwidth,seed,mse_full_db\n");

    c.estimators = {EstimatorKind::Ls};
    c.ebn0_grid_db = {10.0};
    c.trials = 10;
    const SweepReport one = run_mse_sweep(c);
    const std::string csv_one = report_to_csv(one);
    CHECK(std::count(csv_one.begin(), csv_one.end(), '\n') == 2);

    const std::string json = report_to_json(one);
    CHECK(json.find("\"schema_version\": \"1\"") != std::string::npos);
    CHECK(json.find("\"kind\": \"mse\"") != std::string::npos);

    // unwritable path reports an I/O error with the path in the message
    CHECK_THROWS_WITH_AS(write_report(one, "/nonexistent-dir/x.csv", false),
                         doctest::Contains("/nonexistent-dir/x.csv"), std::runtime_error);
}

TEST_CASE("ebn0_at_ber interpolation") {
    const std::vector<double> grid{0, 2, 4, 6};
    const std::vector<double> ber{1e-1, 1e-2, 1e-3, 1e-4};
    CHECK(ebn0_at_ber(grid, ber, 1e-2) == doctest::Approx(2.0));
    CHECK(ebn0_at_ber(grid, ber, 3.16227766e-3) == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(std::isnan(ebn0_at_ber(grid, ber, 1e-6)));
}
