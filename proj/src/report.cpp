#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "gfdmbem/harness.hpp"

namespace gfdmbem {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace

std::string SimConfig::to_json() const {
    nlohmann::ordered_json j;
    j["system"] = gfdmbem::to_string(system);
    j["k"] = k;
    j["m"] = m;
    j["pilot_sep"] = pilot_sep;
    j["cp_len"] = cp_len;
    j["alpha"] = alpha;
    j["n_a"] = n_a;
    j["ic_iterations"] = ic_iterations;
    j["basis"] = gfdmbem::to_string(basis);
    std::vector<std::string> est;
    for (EstimatorKind kind : estimators) est.push_back(gfdmbem::to_string(kind));
    j["estimators"] = est;
    j["ebn0_grid_db"] = ebn0_grid_db;
    j["trials"] = trials;
    j["early_stop_errors"] = early_stop_errors;
    j["master_seed"] = master_seed;
    j["awgn_channel"] = awgn_channel;
    j["workers"] = workers;
    return j.dump();
}

SimConfig SimConfig::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config: bad JSON: ") + e.what());
    }
    SimConfig c;
    try {
        if (j.contains("system")) {
            const std::string s = j["system"];
            if (s == "gfdm") c.system = WaveformParams::System::Gfdm;
            else if (s == "ofdm") c.system = WaveformParams::System::Ofdm;
            else throw std::invalid_argument("config: unknown system " + s);
        }
        c.k = j.value("k", c.k);
        c.m = j.value("m", c.m);
        c.pilot_sep = j.value("pilot_sep", c.pilot_sep);
        c.cp_len = j.value("cp_len", c.cp_len);
        c.alpha = j.value("alpha", c.alpha);
        c.n_a = j.value("n_a", c.n_a);
        c.ic_iterations = j.value("ic_iterations", c.ic_iterations);
        if (j.contains("basis")) {
            const std::string b = j["basis"];
            if (b == "ce") c.basis = BasisMatrix::Kind::Ce;
            else if (b == "lp") c.basis = BasisMatrix::Kind::Lp;
            else throw std::invalid_argument("config: unknown basis " + b);
        }
        if (j.contains("estimators")) {
            c.estimators.clear();
            for (const auto& name : j["estimators"]) {
                c.estimators.push_back(estimator_from_string(name.get<std::string>()));
            }
        }
        if (j.contains("ebn0_grid_db")) {
            c.ebn0_grid_db = j["ebn0_grid_db"].get<std::vector<double>>();
        }
        c.trials = j.value("trials", c.trials);
        c.early_stop_errors = j.value("early_stop_errors", c.early_stop_errors);
        c.master_seed = j.value("master_seed", c.master_seed);
        c.awgn_channel = j.value("awgn_channel", c.awgn_channel);
        c.workers = j.value("workers", c.workers);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config: bad field: ") + e.what());
    }
    return c;
}

std::string report_to_csv(const SweepReport& report) {
    std::string out =
        "system,estimator,basis,ebn0_db,mse_db,ber,trials,ci_halfwidth,seed,mse_full_db\n";
    for (const SweepCell& c : report.cells) {
        out += c.system + ',' + c.estimator + ',' + c.basis + ',' + fmt(c.ebn0_db) + ',' +
               fmt(c.mse_db) + ',' + fmt(c.ber) + ',' + std::to_string(c.trials) + ',' +
               fmt(c.ci_halfwidth) + ',' + std::to_string(report.seed) + ',' +
               fmt(c.mse_full_db) + '\n';
    }
    return out;
}

std::string report_to_json(const SweepReport& report) {
    nlohmann::ordered_json j;
    j["schema_version"] = report.schema_version;
    j["kind"] = report.kind;
    j["seed"] = report.seed;
    j["config"] = nlohmann::ordered_json::parse(report.config_json);
    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    for (const SweepCell& c : report.cells) {
        nlohmann::ordered_json jc;
        jc["system"] = c.system;
        jc["estimator"] = c.estimator;
        jc["basis"] = c.basis;
        jc["ebn0_db"] = c.ebn0_db;
        auto number_or_null = [](double v) {
            return std::isnan(v) ? nlohmann::ordered_json() : nlohmann::ordered_json(v);
        };
        jc["mse_db"] = number_or_null(c.mse_db);
        jc["mse_full_db"] = number_or_null(c.mse_full_db);
        jc["ber"] = number_or_null(c.ber);
        jc["trials"] = c.trials;
        jc["ci_halfwidth"] = c.ci_halfwidth;
        cells.push_back(jc);
    }
    j["cells"] = cells;
    return j.dump(2) + "\n";
}

void write_report(const SweepReport& report, const std::string& path, bool json) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open output file: " + path);
    }
    out << (json ? report_to_json(report) : report_to_csv(report));
    if (!out) {
        throw std::runtime_error("write failed: " + path);
    }
}

}  // namespace gfdmbem
