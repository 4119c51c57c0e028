#include "config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rrw {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <class T>
std::string join(const std::vector<T>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ' ';
        if constexpr (std::is_same_v<T, double>)
            s += fmt(v[i]);
        else
            s += std::to_string(v[i]);
    }
    return s;
}

struct LineParser {
    std::istringstream in;
    int lineno;
    std::string key;

    [[noreturn]] void fail(const std::string& what) {
        throw std::invalid_argument("config line " + std::to_string(lineno) + " (" + key +
                                    "): " + what);
    }
    double num() {
        double v;
        if (!(in >> v)) fail("expected a number");
        return v;
    }
    long integer() {
        long v;
        if (!(in >> v)) fail("expected an integer");
        return v;
    }
    std::string word() {
        std::string w;
        if (!(in >> w)) fail("expected a word");
        return w;
    }
    std::vector<double> nums() {
        std::vector<double> v;
        double x;
        while (in >> x) v.push_back(x);
        if (v.empty()) fail("expected numbers");
        return v;
    }
    std::vector<long> ints() {
        std::vector<long> v;
        long x;
        while (in >> x) v.push_back(x);
        if (v.empty()) fail("expected integers");
        return v;
    }
    bool flag() {
        const std::string w = word();
        if (w == "on" || w == "true" || w == "1") return true;
        if (w == "off" || w == "false" || w == "0") return false;
        fail("expected on/off");
    }
};

}  // namespace

IncrementModel ExperimentConfig::model() const {
    return IncrementModel::make(model_family, model_params);
}

std::string ExperimentConfig::serialize() const {
    std::ostringstream o;
    o << "model " << model_family << ' ' << join(model_params) << '\n';
    o << "p " << fmt(p) << '\n';
    o << "seed " << seed << '\n';
    o << "out " << out_dir << '\n';
    o << "format " << format << '\n';
    o << "cycles " << cycles << '\n';
    if (!w1_levels.empty()) o << "w1-levels " << join(w1_levels) << '\n';
    o << "vbar-reps " << vbar_reps << '\n';
    o << "vbar-n " << join(vbar_n) << '\n';
    o << "vbar-b " << join(vbar_b) << '\n';
    o << "start-mode " << start_mode << '\n';
    o << "findim-times " << join(findim_times) << '\n';
    if (!findim_thresholds.empty()) o << "findim-thresholds " << join(findim_thresholds) << '\n';
    o << "findim-n " << join(findim_n) << '\n';
    o << "findim-reps " << findim_reps << '\n';
    o << "solver-m " << solver_m << '\n';
    o << "bpi-k " << bpi_k << '\n';
    o << "bpi-m " << bpi_m << '\n';
    if (!y_grid.empty()) o << "y-grid " << join(y_grid) << '\n';
    o << "oracle-K " << oracle_K << '\n';
    o << "oracle " << (oracle_on ? "on" : "off") << '\n';
    o << "oracle-max-tau " << oracle_max_tau << '\n';
    o << "oracle-max-area " << fmt(oracle_max_area) << '\n';
    o << "duality-n " << duality_n << '\n';
    o << "duality-b " << fmt(duality_b) << '\n';
    o << "m1p-mesh " << fmt(m1p_mesh) << '\n';
    o << "eqv-n " << join(eqv_n) << '\n';
    o << "eqv-reps " << eqv_reps << '\n';
    o << "sim-cycles " << sim_cycles << '\n';
    o << "sim-n " << sim_n << '\n';
    o << "sim-reps " << sim_reps << '\n';
    o << "sim-grid " << sim_grid << '\n';
    o << "min-exceed " << min_exceed << '\n';
    o << "band-z " << fmt(band_z) << '\n';
    return o.str();
}

std::uint64_t ExperimentConfig::hash() const {
    const std::string s = serialize();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
    ExperimentConfig c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line.erase(hash_pos);
        std::istringstream probe(line);
        std::string key;
        if (!(probe >> key)) continue;
        const auto pos = probe.tellg();
        const std::string rest = (pos == std::istringstream::pos_type(-1))
                                     ? std::string()
                                     : line.substr(static_cast<size_t>(pos));
        LineParser lp{std::istringstream(rest), lineno, key};

        if (key == "model") {
            c.model_family = lp.word();
            c.model_params = lp.nums();
            IncrementModel::make(c.model_family, c.model_params);  // validate now
        } else if (key == "p") {
            c.p = lp.num();
            if (!(c.p > 0.0)) lp.fail("p must be positive");
        } else if (key == "seed") {
            c.seed = static_cast<std::uint64_t>(lp.integer());
        } else if (key == "out") {
            c.out_dir = lp.word();
        } else if (key == "format") {
            c.format = lp.word();
            if (c.format != "csv" && c.format != "json") lp.fail("format must be csv or json");
        } else if (key == "cycles") {
            c.cycles = lp.integer();
            if (c.cycles < 1) lp.fail("budget must be positive");
        } else if (key == "w1-levels") {
            c.w1_levels = lp.nums();
        } else if (key == "vbar-reps") {
            c.vbar_reps = lp.integer();
            if (c.vbar_reps < 1) lp.fail("budget must be positive");
        } else if (key == "vbar-n") {
            c.vbar_n = lp.ints();
        } else if (key == "vbar-b") {
            c.vbar_b = lp.nums();
        } else if (key == "start-mode") {
            c.start_mode = lp.word();
            if (c.start_mode != "zero" && c.start_mode != "warmed" && c.start_mode != "both")
                lp.fail("start-mode must be zero, warmed, or both");
        } else if (key == "findim-times") {
            c.findim_times = lp.nums();
        } else if (key == "findim-thresholds") {
            c.findim_thresholds = lp.nums();
        } else if (key == "findim-n") {
            c.findim_n = lp.ints();
        } else if (key == "findim-reps") {
            c.findim_reps = lp.integer();
        } else if (key == "solver-m") {
            c.solver_m = static_cast<int>(lp.integer());
            if (c.solver_m < 16) lp.fail("solver-m must be >= 16");
        } else if (key == "bpi-k") {
            c.bpi_k = static_cast<int>(lp.integer());
            if (c.bpi_k < 2) lp.fail("bpi-k must be >= 2");
        } else if (key == "bpi-m") {
            c.bpi_m = static_cast<int>(lp.integer());
        } else if (key == "y-grid") {
            c.y_grid = lp.nums();
        } else if (key == "oracle-K") {
            c.oracle_K = static_cast<int>(lp.integer());
            if (c.oracle_K < 1) lp.fail("oracle-K must be >= 1");
        } else if (key == "oracle") {
            c.oracle_on = lp.flag();
        } else if (key == "oracle-max-tau") {
            c.oracle_max_tau = lp.integer();
        } else if (key == "oracle-max-area") {
            c.oracle_max_area = lp.num();
        } else if (key == "duality-n") {
            c.duality_n = static_cast<int>(lp.integer());
        } else if (key == "duality-b") {
            c.duality_b = lp.num();
        } else if (key == "m1p-mesh") {
            c.m1p_mesh = lp.num();
            if (!(c.m1p_mesh > 0.0)) lp.fail("mesh must be positive");
        } else if (key == "eqv-n") {
            c.eqv_n = lp.ints();
        } else if (key == "eqv-reps") {
            c.eqv_reps = static_cast<int>(lp.integer());
        } else if (key == "sim-cycles") {
            c.sim_cycles = lp.integer();
        } else if (key == "sim-n") {
            c.sim_n = lp.integer();
        } else if (key == "sim-reps") {
            c.sim_reps = static_cast<int>(lp.integer());
        } else if (key == "sim-grid") {
            c.sim_grid = static_cast<int>(lp.integer());
        } else if (key == "min-exceed") {
            c.min_exceed = static_cast<int>(lp.integer());
        } else if (key == "band-z") {
            c.band_z = lp.num();
        } else {
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": unknown key '" + key + "'");
        }
    }
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

}  // namespace rrw
