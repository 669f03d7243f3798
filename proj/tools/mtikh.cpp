// mtikh: generate test problems, solve two-penalty Tikhonov models, select
// the parameter pair and reproduce the reference experiments.

#include "mtikh/experiment.hpp"
#include "mtikh/io.hpp"
#include "mtikh/problems.hpp"
#include "mtikh/selection.hpp"
#include "mtikh/solvers.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace mtikh;

namespace {

struct Flags {
    std::string example = "ex41";
    int n = 0;
    std::vector<double> eps;
    std::uint64_t seed = 1;
    double gamma = 1.0;
    double c_m = 1.0;
    std::string eta;
    std::string eta0;
    std::optional<double> tol;
    std::optional<int> max_iter;
    std::string grid;
    std::string out;
    std::string problem;
    std::string model;
    bool quiet = false;
};

std::vector<double> split_numbers(const std::string& s, const char* what)
{
    std::vector<double> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(tok, &used));
            if (tok.find_first_not_of(" \t", used) != std::string::npos) {
                throw std::invalid_argument(tok);
            }
        } catch (const std::exception&) {
            throw InvalidArgument(std::string("bad ") + what + " '" + s + "'");
        }
    }
    return v;
}

RegParams parse_pair(const std::string& s, const char* what)
{
    const auto v = split_numbers(s, what);
    if (v.size() == 1) {
        return RegParams(v[0], v[0]);
    }
    if (v.size() != 2) {
        throw InvalidArgument(std::string(what) + " expects one or two values");
    }
    return RegParams(v[0], v[1]);
}

GridSpec parse_grid(const std::string& s)
{
    const auto v = split_numbers(s, "grid");
    if (v.size() != 3 || v[2] < 1) {
        throw InvalidArgument("grid expects lo,hi,count");
    }
    return GridSpec::square(v[0], v[1], static_cast<int>(v[2]));
}

double first_eps(const Flags& f, double fallback)
{
    return f.eps.empty() ? fallback : f.eps.front();
}

struct Loaded {
    Problem problem;
    io::Meta meta;
    PenaltyModel model;
};

// A problem from --problem DIR, or a fresh one from --example/--n/--eps/--seed.
Loaded load_problem(const Flags& f)
{
    std::optional<Problem> problem;
    io::Meta meta;
    std::string model_name = f.model;
    std::optional<Example> example;
    if (!f.problem.empty()) {
        auto bundle = io::read_problem_bundle(f.problem);
        problem.emplace(std::move(bundle.problem));
        meta = std::move(bundle.meta);
        const auto m = io::to_map(meta);
        if (model_name.empty() && m.count("model")) {
            model_name = m.at("model");
        }
        if (m.count("example")) {
            example = parse_example(m.at("example"));
        }
    } else {
        example = parse_example(f.example);
        problem.emplace(make_test_problem(*example, f.n, first_eps(f, 0.0), f.seed));
    }
    PenaltyModel model;
    if (!model_name.empty()) {
        model = parse_model(model_name, problem->grid().h, problem->shape());
    } else if (example) {
        model = model_for(*example, *problem);
    } else {
        throw InvalidArgument("no model given and the bundle does not name one");
    }
    return {std::move(*problem), std::move(meta), model};
}

SolverOptions inner_options(const Flags& f)
{
    SolverOptions o;
    o.tol = f.tol;
    o.max_iter = f.max_iter;
    return o;
}

std::string pair_text(const RegParams& eta)
{
    return io::format_number(eta.eta1()) + "," + io::format_number(eta.eta2());
}

int cmd_make_problem(const Flags& f)
{
    if (f.out.empty()) {
        throw InvalidArgument("make-problem needs --out");
    }
    const Example e = parse_example(f.example);
    const double eps = first_eps(f, 0.0);
    const Problem p = make_test_problem(e, f.n, eps, f.seed);
    io::write_problem_bundle(f.out, p,
                             {{"example", to_string(e)},
                              {"model", to_string(model_for(e, p).id)},
                              {"eps", io::format_number(eps)},
                              {"seed", std::to_string(f.seed)}});
    if (!f.quiet) {
        std::cout << "wrote " << f.out << " (m=" << p.m() << ", n=" << p.n()
                  << ", delta=" << io::format_number(p.delta()) << ")\n";
    }
    return 0;
}

int cmd_solve(const Flags& f)
{
    if (f.eta.empty()) {
        throw InvalidArgument("solve needs --eta");
    }
    const Loaded l = load_problem(f);
    const RegParams eta = parse_pair(f.eta, "eta");
    const TikhonovSolution sol = solve_tikhonov(l.problem, l.model, eta, inner_options(f));
    io::Meta meta{
        {"model", to_string(l.model.id)},
        {"eta", pair_text(eta)},
        {"phi", io::format_number(sol.phi)},
        {"psi1", io::format_number(sol.psi[0])},
        {"psi2", io::format_number(sol.psi[1])},
        {"objective", io::format_number(sol.objective(eta))},
        {"iterations", std::to_string(sol.iterations)},
        {"converged", sol.converged ? "true" : "false"},
        {"inner_residual", io::format_number(sol.inner_residual)},
    };
    if (l.problem.u_true()) {
        meta.emplace_back("relative_error", io::format_number(relative_error(sol.u, *l.problem.u_true())));
    }
    if (!f.out.empty()) {
        io::write_vector_csv(fs::path(f.out) / "u.csv", sol.u);
        io::write_meta(fs::path(f.out) / "meta.txt", meta);
    }
    if (!f.quiet) {
        for (const auto& [k, v] : meta) {
            std::cout << k << ": " << v << '\n';
        }
    }
    return sol.converged ? 0 : 1;
}

int cmd_select(const Flags& f, const std::string& principle)
{
    const Loaded l = load_problem(f);
    io::Meta meta{{"principle", principle}, {"model", to_string(l.model.id)}};
    bool converged = true;
    Vector u;
    std::vector<TraceEntry> trace;

    if (principle == "oracle") {
        const GridSpec grid = f.grid.empty() ? GridSpec::square(1e-10, 1e1, 23) : parse_grid(f.grid);
        const OracleResult r = oracle_grid(l.problem, l.model, grid, inner_options(f));
        meta.emplace_back("eta", pair_text(r.eta));
        meta.emplace_back("relative_error", io::format_number(r.error));
        u = r.solution.u;
    } else {
        SelectionOptions opts;
        opts.gamma = f.gamma;
        opts.c_m = f.c_m;
        opts.outer_tol = f.tol;
        opts.outer_max_iter = f.max_iter;
        if (!f.eta0.empty()) {
            opts.eta0 = parse_pair(f.eta0, "eta0");
        }
        const SelectionResult r = principle == "bdp"
                                      ? select_broyden(l.problem, l.model, l.problem.delta(), opts)
                                      : select_fixed_point(l.problem, l.model, f.gamma, opts);
        converged = r.converged;
        meta.emplace_back("eta", pair_text(r.eta_star));
        meta.emplace_back("weight_t", io::format_number(r.weight_t));
        meta.emplace_back("iterations", std::to_string(r.iterations));
        meta.emplace_back("converged", r.converged ? "true" : "false");
        meta.emplace_back("phi", io::format_number(r.solution.phi));
        meta.emplace_back("psi1", io::format_number(r.solution.psi[0]));
        meta.emplace_back("psi2", io::format_number(r.solution.psi[1]));
        if (l.problem.u_true()) {
            meta.emplace_back("relative_error", io::format_number(relative_error(r.solution.u, *l.problem.u_true())));
        }
        u = r.solution.u;
        trace = r.trace;
    }
    if (!f.out.empty()) {
        io::write_vector_csv(fs::path(f.out) / "u.csv", u);
        io::write_meta(fs::path(f.out) / "meta.txt", meta);
        if (!trace.empty()) {
            io::write_trace_csv(fs::path(f.out) / "trace.csv", trace);
        }
    }
    if (!f.quiet) {
        for (const auto& [k, v] : meta) {
            std::cout << k << ": " << v << '\n';
        }
    }
    return converged ? 0 : 1;
}

int cmd_reproduce(const Flags& f, const std::string& target)
{
    const Example e = target == "table1" ? Example::ex41 : target == "table2" ? Example::ex42 : Example::ex43;
    ExperimentConfig cfg = ExperimentConfig::defaults(e);
    cfg.seed = f.seed;
    cfg.n = f.n;
    cfg.gamma = f.gamma;
    cfg.c_m = f.c_m;
    cfg.outer_tol = f.tol;
    cfg.outer_max_iter = f.max_iter;
    if (!f.eps.empty()) {
        cfg.eps_list = f.eps;
    }
    if (!f.grid.empty()) {
        cfg.grid = parse_grid(f.grid);
    }
    if (!f.eta0.empty()) {
        cfg.eta0 = parse_pair(f.eta0, "eta0");
    }
    cfg.out_dir = f.out.empty() ? fs::path("reproduce_" + target) : fs::path(f.out);

    const ReproduceResult r = reproduce(cfg);
    write_reproduce(r);
    if (!f.quiet) {
        std::cout << format_table(r);
    }
    return r.all_converged() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Two-parameter Tikhonov regularization: solvers and parameter choice"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "key=value file; command-line flags override it");

    Flags f;
    app.add_option("--example", f.example, "ex41, ex42 or ex43")
        ->check(CLI::IsMember({"ex41", "ex42", "ex43"}))
        ->capture_default_str();
    app.add_option("--n", f.n, "Grid size (image side for ex43); 0 picks the default");
    app.add_option("--eps,--eps_list", f.eps, "Relative noise level(s), comma separated")->delimiter(',');
    app.add_option("--seed", f.seed, "Noise seed")->capture_default_str();
    app.add_option("--gamma", f.gamma, "Balancing exponent")->capture_default_str();
    app.add_option("--cm,--c_m", f.c_m, "Discrepancy constant")->capture_default_str();
    app.add_option("--eta", f.eta, "Parameter pair e1,e2 for solve");
    app.add_option("--eta0", f.eta0, "Initial pair e1,e2 for selection");
    app.add_option("--tol", f.tol, "Tolerance (inner for solve, outer for select/reproduce)");
    app.add_option("--max-iter,--max_iter", f.max_iter, "Iteration cap (inner for solve, outer otherwise)");
    app.add_option("--grid", f.grid, "Oracle grid lo,hi,count (log spaced, both axes)");
    app.add_option("--out,--out_dir", f.out, "Output directory");
    app.add_option("--problem", f.problem, "Problem bundle directory written by make-problem");
    app.add_option("--model", f.model, "h1-tv, elastic-net or quad-quad");
    app.add_flag("-q,--quiet", f.quiet, "Print nothing on success");

    auto* make = app.add_subcommand("make-problem", "Write a test problem bundle");
    auto* solve = app.add_subcommand("solve", "Solve for a fixed parameter pair");
    std::string principle;
    auto* select = app.add_subcommand("select", "Choose the parameter pair");
    select->add_option("principle", principle, "bdp, balance or oracle")
        ->required()
        ->check(CLI::IsMember({"bdp", "balance", "oracle"}));
    std::string target;
    auto* repro = app.add_subcommand("reproduce", "Rerun a reference experiment");
    repro->add_option("target", target, "table1, table2 or deblur")
        ->required()
        ->check(CLI::IsMember({"table1", "table2", "deblur"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (*make) return cmd_make_problem(f);
        if (*solve) return cmd_solve(f);
        if (*select) return cmd_select(f, principle);
        if (*repro) return cmd_reproduce(f, target);
    } catch (const SelectionFailure& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
