/**
 * @file run.hpp
 * @brief Subcommand orchestration and file emission with a hashed manifest.
 */
#pragma once

#include "nnlif/config.hpp"

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace nnlif {

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& data);

/// Writes files under one directory and records their hashes.
class Emitter {
public:
    explicit Emitter(std::filesystem::path dir);
    void write(const std::string& rel, const std::string& content);
    /// manifest.json; on failure also a FAILED marker carrying the message.
    void finish(const std::string& subcommand, const RunConfig& cfg, bool ok, const std::string& message = "");
    const std::filesystem::path& dir() const { return dir_; }
    const std::vector<std::string>& files() const { return files_; }

private:
    std::filesystem::path dir_;
    std::vector<std::string> files_;
    std::vector<std::string> hashes_;
    std::vector<size_t> sizes_;
};

Grid grid_for(const RunConfig& cfg);

/// Initial density on the grid, normalized to unit mass.
DensityProfile initial_profile(const RunConfig& cfg, const Grid& grid);

std::vector<std::string> subcommands();

/// Runs one subcommand into `out_dir`. Returns 0, 1 (validation) or 2
/// (numerical integrity); diagnostics go to `log`.
int run_scenario(const RunConfig& cfg, const std::string& subcommand, const std::string& out_dir, std::ostream& log);

/// Concurrency cap for sweeps from NNLIF_THREADS, else the hardware count.
int sweep_threads();

} // namespace nnlif
