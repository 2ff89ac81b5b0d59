#include "nnlif/errors.hpp"
#include "nnlif/run.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

int main(int argc, char** argv) {
    CLI::App app{"Dilated-timescale NNLIF solver and diagnostics"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::vector<std::string> overrides;
    for (const auto& name : nnlif::subcommands()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "key = value configuration file")->required();
        sub->add_option("--set", overrides, "override, key=value")->take_all();
        sub->add_option("--out", out_dir, "output directory")->required();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    const std::string subcommand = app.get_subcommands().front()->get_name();

    nnlif::RunConfig cfg;
    try {
        std::ifstream f(config_path);
        if (!f) throw nnlif::ConfigError("cannot read config file '" + config_path + "'");
        std::stringstream ss;
        ss << f.rdbuf();
        cfg = nnlif::parse_config(ss.str(), overrides);
        cfg.out_dir = out_dir;
    } catch (const nnlif::ValidationError& e) {
        std::cerr << "nnlif: " << e.what() << '\n';
        return 1;
    }
    return nnlif::run_scenario(cfg, subcommand, out_dir, std::cerr);
}
