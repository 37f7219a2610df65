// varexp <experiment> [--kappa R] [--seed N] [--samples N] [--out DIR] [--config FILE]
// Exit status: 0 every criterion passed, 1 some failed, 2 bad configuration.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "varith/experiments.hpp"

namespace fs = std::filesystem;
namespace ex = varith::experiments;

namespace {

constexpr int kExitPass = 0, kExitFail = 1, kExitConfig = 2;

std::string names_list() {
    std::string s;
    for (const auto& n : ex::experiment_names()) s += (s.empty() ? "" : ", ") + n;
    return s;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    f << text;
    if (!f) throw std::runtime_error("cannot write " + p.string());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Variance arithmetic experiments"};
    std::string experiment, configFile;
    std::vector<std::pair<std::string, std::string>> overrides;
    std::string kappa, seed, samples, out;

    app.add_option("experiment", experiment, "one of: " + names_list())->required();
    app.add_option("--kappa", kappa, "bounding factor (default 5)");
    app.add_option("--seed", seed, "random seed");
    app.add_option("--samples", samples, "Monte Carlo samples per point");
    app.add_option("--out", out, "output directory");
    app.add_option("--config", configFile, "key = value file; flags take precedence");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    ex::Config cfg;
    try {
        if (!configFile.empty()) {
            std::ifstream f(configFile);
            if (!f) throw varith::Error(varith::Errc::ConfigInvalid, "cannot open " + configFile);
            ex::load_config(cfg, f);
        }
        if (app.count("--kappa")) ex::apply_setting(cfg, "kappa", kappa);
        if (app.count("--seed")) ex::apply_setting(cfg, "seed", seed);
        if (app.count("--samples")) ex::apply_setting(cfg, "samples", samples);
        if (app.count("--out")) ex::apply_setting(cfg, "out", out);
        ex::validate(cfg);
        const auto& names = ex::experiment_names();
        if (std::find(names.begin(), names.end(), experiment) == names.end())
            throw varith::Error(varith::Errc::UnknownExperiment, "unknown experiment '" + experiment + "'; expected " + names_list());
    } catch (const varith::Error& e) {
        std::cerr << "varexp: " << varith::errc_name(e.code()) << ": " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        const ex::Output result = ex::run(experiment, cfg);
        const fs::path dir(cfg.outputDirectory);
        fs::create_directories(dir);
        for (const auto& [name, text] : result.files) write_file(dir / name, text);

        std::string summary;
        bool all = true;
        for (const auto& c : result.criteria) {
            summary += ex::acceptance_line(c) + '\n';
            all = all && c.pass;
        }
        write_file(dir / "acceptance.txt", summary);
        std::cout << summary;
        for (const auto& [name, text] : result.files) std::cout << "wrote " << (dir / name).string() << '\n';
        return all ? kExitPass : kExitFail;
    } catch (const varith::Error& e) {
        std::cerr << "varexp: " << varith::errc_name(e.code()) << ": " << e.what() << '\n';
        return e.code() == varith::Errc::ConfigInvalid ? kExitConfig : kExitFail;
    } catch (const std::exception& e) {
        std::cerr << "varexp: " << e.what() << '\n';
        return kExitFail;
    }
}
