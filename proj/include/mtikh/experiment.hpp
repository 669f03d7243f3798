#pragma once

#include "mtikh/penalties.hpp"
#include "mtikh/problems.hpp"
#include "mtikh/selection.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mtikh {

/// One reproduction run: a list of noise levels on one example.
struct ExperimentConfig {
    Example example = Example::ex41;
    std::vector<double> eps_list;
    std::uint64_t seed = 1;
    int n = 0;  // <= 0: example default
    double gamma = 1.0;
    double c_m = 1.0;
    std::optional<RegParams> eta0;
    std::optional<double> outer_tol;
    std::optional<int> outer_max_iter;
    GridSpec grid;
    std::filesystem::path out_dir;

    void validate() const;

    /// Standard noise levels and oracle grid for each example.
    static ExperimentConfig defaults(Example e);
};

/// Natural two-penalty model of each example.
PenaltyModel model_for(Example e, const Problem& problem);

struct ReproduceRow {
    double eps = 0.0;
    double delta = 0.0;
    std::optional<RegParams> eta_bdp;
    double e_bdp = 0.0;
    int iterations = 0;
    bool converged = false;
    std::optional<RegParams> eta_opt;
    double e_opt = 0.0;
    double eta_single[2] = {0.0, 0.0};
    double e_single[2] = {0.0, 0.0};
    std::string status = "ok";

    Vector u_bdp;
    std::vector<TraceEntry> trace;
};

struct ReproduceResult {
    ExperimentConfig config;
    std::string psi_names[2];
    std::vector<ReproduceRow> rows;

    bool all_converged() const;
};

/// For each eps: build the problem, run the balanced discrepancy principle,
/// the two-parameter oracle and both single-penalty oracles. Failures are
/// recorded in the row's status and the run continues.
ReproduceResult reproduce(const ExperimentConfig& config);

/// Writes meta.txt, table.csv, traces/*.csv and plots/*.svg under
/// config.out_dir.
void write_reproduce(const ReproduceResult& result);

/// The table alone, as written to table.csv.
std::string format_table(const ReproduceResult& result);

}  // namespace mtikh
