#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "biwcm/io.hpp"
#include "biwcm/solvers.hpp"
#include "biwcm/validation.hpp"

namespace biwcm::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kInputError = 2,
    kNotConverged = 3,
    kUsage = 64,
};

/// Everything a command needs; filled from flags.
struct RunConfig {
    std::vector<std::filesystem::path> inputs;
    std::optional<io::Format> format;
    ModelKind model = ModelKind::biwcm_c;
    Procedure procedure = Procedure::mu;
    double alpha = 0.05;
    SolverConfig solver;
    std::filesystem::path out_dir = ".";
    std::uint64_t seed = 0;
    std::size_t n_samples = 1;
    bool full_matrix = false;
    // fitness-complexity settings for rank / compare / filter
    int fc_max_iterations = 1000;
    double fc_tolerance = 1e-10;

    void validate() const;
};

/// Files produced by a command, written only once the command has fully succeeded.
class OutputSet {
public:
    void add(std::string name, std::string content);
    /// Writes every file via a temporary name and rename.
    void commit(const std::filesystem::path& dir) const;
    const std::vector<std::pair<std::string, std::string>>& files() const noexcept { return files_; }

private:
    std::vector<std::pair<std::string, std::string>> files_;
};

OutputSet cmd_fit(const RunConfig& cfg, std::ostream& log);
OutputSet cmd_validate(const RunConfig& cfg, std::ostream& log);
OutputSet cmd_rank(const RunConfig& cfg, std::ostream& log);
OutputSet cmd_compare(const RunConfig& cfg, std::ostream& log);
OutputSet cmd_filter(const RunConfig& cfg, std::ostream& log);
OutputSet cmd_sample(const RunConfig& cfg, std::ostream& log);

/// Parses argv, runs the subcommand, commits its outputs and returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace biwcm::cli
