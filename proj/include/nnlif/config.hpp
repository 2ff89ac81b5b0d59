/**
 * @file config.hpp
 * @brief Dotted key-value run configuration, presets and validation.
 *
 * A document is a list of `key = value` lines; `#` starts a comment. The
 * special key `preset` loads a named parameter set first, and every other
 * key then overrides it. `--set` overrides are applied after the document.
 */
#pragma once

#include "nnlif/diagnostics.hpp"
#include "nnlif/solver_tau.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nnlif {

enum class InitialKind { Gaussian, SteadyExcitatory, SteadyInhibitory, FromCSV };

struct InitialSpec {
    InitialKind kind = InitialKind::Gaussian;
    double center = 0.0;
    double variance = 0.01;
    double perturbation = 0.0; // relative cos(πv)e^{-v²} bump on a steady profile
    std::string path;
};

struct GridSettings {
    int n = 1024;
    double tail_tolerance = 1e-8;
    std::optional<double> v_min;
};

enum class PoincareWeight { Steady, Constant, Decay };

struct SubcommandOptions {
    EntropyChoice entropy_G = EntropyChoice::QuadraticCentered;
    bool entropy_limit = true; // limit equation, otherwise the full dilated equation
    double fb_sigma = 0.5;
    int fb_intervals = 200;
    PoincareWeight poincare_weight = PoincareWeight::Steady;
    int poincare_n = 512;
    std::optional<double> poincare_length; // 1 for constant, 40 for decay when unset
    bool fb_volterra = true;
    std::string sweep_command = "simulate";
    std::vector<std::pair<std::string, std::vector<std::string>>> sweep_axes;
};

using Assignments = std::vector<std::pair<std::string, std::string>>;

struct RunConfig {
    ModelParams params;
    DilationParams dil;
    GridSettings grid;
    StepperConfig stepper;
    InitialSpec initial;
    SubcommandOptions options;
    std::string preset;
    std::string out_dir;
    Assignments assignments; // everything that produced this config, in order
};

/// Splits a document into assignments; throws ConfigError with the line number.
Assignments parse_document(const std::string& text);

/// Parses `key=value` from a --set argument.
std::pair<std::string, std::string> parse_override(const std::string& arg);

RunConfig build_config(const Assignments& assignments);

RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {});

std::vector<std::string> preset_names();
Assignments preset(const std::string& name);

} // namespace nnlif
