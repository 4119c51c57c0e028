// Command-line front end for the rrwlab shared library. Everything goes
// through the C interface in rrwlab/rrwlab.h; the heavy lifting lives in
// the library.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "rrwlab/rrwlab.h"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw CLI::ValidationError("--config", "cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rrwlab: busy-period large-deviations laboratory for the reflected random walk"};
    app.require_subcommand(1);
    app.fallthrough();  // allow global flags after the subcommand

    std::string config_path, out_dir, format;
    bool have_seed = false;
    unsigned long long seed = 0;
    app.add_option("--config", config_path, "experiment config file");
    app.add_option("--seed", seed, "override the config seed")->each([&](const std::string&) {
        have_seed = true;
    });
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--format", format, "table format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    for (const char* name : {"conjugate", "rate", "simulate", "tail-w1", "tail-vbar",
                             "findim", "oracle", "verify"}) {
        app.add_subcommand(name)->silent(false);
    }

    CLI11_PARSE(app, argc, argv);
    const std::string cmd = app.get_subcommands().front()->get_name();

    std::string config_text;
    if (!config_path.empty()) {
        try {
            config_text = read_file(config_path);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 2;
        }
    }
    std::string extra;
    if (have_seed) extra += "seed " + std::to_string(seed) + "\n";
    if (!out_dir.empty()) extra += "out " + out_dir + "\n";
    if (!format.empty()) extra += "format " + format + "\n";

    char* summary = nullptr;
    const int rc = rrw_run(cmd.c_str(), config_text.c_str(), extra.c_str(), &summary);
    if (rc != RRW_OK) {
        std::cerr << "error (" << rc << "): " << rrw_last_error() << "\n";
        return rc;
    }
    if (summary) {
        std::cout << summary << "\n";
        rrw_string_free(summary);
    }
    return 0;
}
