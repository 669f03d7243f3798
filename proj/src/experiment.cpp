#include "mtikh/experiment.hpp"

#include "mtikh/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace mtikh {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string eps_tag(double eps)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.0e", eps);
    return buf;
}

std::string short_name(const Penalty& p)
{
    switch (p.kind) {
    case PenaltyKind::sq_l2:
        return "l2";
    case PenaltyKind::sq_h1:
        return "h1";
    case PenaltyKind::tv:
        return "tv";
    case PenaltyKind::l1:
        return "l1";
    }
    return "?";
}

void append_status(ReproduceRow& row, const std::string& what)
{
    if (row.status == "ok") {
        row.status = what;
    } else {
        row.status += "; " + what;
    }
}

// Keeps the CSV one field per column.
std::string csv_safe(std::string s)
{
    for (char& c : s) {
        if (c == ',' || c == '\n' || c == '"') {
            c = ' ';
        }
    }
    return s;
}

}  // namespace

void ExperimentConfig::validate() const
{
    if (eps_list.empty()) {
        throw InvalidArgument("eps list is empty");
    }
    for (double e : eps_list) {
        if (!(e > 0.0) || !std::isfinite(e)) {
            throw InvalidArgument("noise levels must be positive");
        }
    }
    if (!(gamma > 0.0) || !(c_m > 0.0)) {
        throw InvalidArgument("gamma and c_m must be positive");
    }
    for (const GridAxis* a : {&grid.eta1, &grid.eta2}) {
        if (!(a->lo > 0.0) || !(a->hi >= a->lo) || a->count < 1) {
            throw InvalidArgument("bad oracle grid");
        }
    }
}

ExperimentConfig ExperimentConfig::defaults(Example e)
{
    ExperimentConfig c;
    c.example = e;
    switch (e) {
    case Example::ex41:
    case Example::ex42:
        c.eps_list = {5e-2, 5e-3, 5e-4, 5e-5, 5e-6};
        c.grid = GridSpec::square(1e-10, 1e1, 23);
        break;
    case Example::ex43:
        c.eps_list = {1e-2};
        c.grid = GridSpec::square(1e-8, 1e0, 9);
        break;
    }
    return c;
}

PenaltyModel model_for(Example e, const Problem& problem)
{
    if (e == Example::ex41) {
        return PenaltyModel::h1_tv(problem.grid().h, problem.shape());
    }
    return PenaltyModel::elastic_net();
}

bool ReproduceResult::all_converged() const
{
    for (const auto& r : rows) {
        if (!r.converged || r.status != "ok") {
            return false;
        }
    }
    return true;
}

ReproduceResult reproduce(const ExperimentConfig& config)
{
    config.validate();
    ReproduceResult result;
    result.config = config;

    for (double eps : config.eps_list) {
        ReproduceRow row;
        row.eps = eps;
        const Problem problem = make_test_problem(config.example, config.n, eps, config.seed);
        const PenaltyModel model = model_for(config.example, problem);
        result.psi_names[0] = short_name(model.psi1);
        result.psi_names[1] = short_name(model.psi2);
        row.delta = problem.delta();
        const Vector& u_true = *problem.u_true();

        SelectionOptions sopts;
        sopts.gamma = config.gamma;
        sopts.c_m = config.c_m;
        sopts.eta0 = config.eta0;
        sopts.outer_tol = config.outer_tol;
        sopts.outer_max_iter = config.outer_max_iter;

        row.e_bdp = kNaN;
        try {
            SelectionResult sel = select_broyden(problem, model, problem.delta(), sopts);
            row.eta_bdp = sel.eta_star;
            row.e_bdp = relative_error(sel.solution.u, u_true);
            row.iterations = sel.iterations;
            row.converged = sel.converged;
            row.u_bdp = std::move(sel.solution.u);
            row.trace = std::move(sel.trace);
            if (!row.converged) {
                append_status(row, "bdp not converged");
            }
        } catch (const SelectionFailure& e) {
            row.trace = e.trace();
            append_status(row, std::string("bdp: ") + e.what());
        } catch (const Error& e) {
            append_status(row, std::string("bdp: ") + e.what());
        }

        row.e_opt = kNaN;
        try {
            const OracleResult opt = oracle_grid(problem, model, config.grid);
            row.eta_opt = opt.eta;
            row.e_opt = opt.error;
        } catch (const Error& e) {
            append_status(row, std::string("opt: ") + e.what());
        }

        const GridAxis* axes[2] = {&config.grid.eta1, &config.grid.eta2};
        for (int i = 0; i < 2; ++i) {
            row.eta_single[i] = kNaN;
            row.e_single[i] = kNaN;
            try {
                const SingleOracleResult s = oracle_grid_single(problem, model[i], *axes[i]);
                row.eta_single[i] = s.eta;
                row.e_single[i] = s.error;
            } catch (const Error& e) {
                append_status(row, result.psi_names[i] + ": " + e.what());
            }
        }
        result.rows.push_back(std::move(row));
    }
    return result;
}

std::string format_table(const ReproduceResult& result)
{
    using io::format_number;
    std::ostringstream out;
    const auto& a = result.psi_names[0];
    const auto& b = result.psi_names[1];
    out << "eps,delta,eta1_bdp,eta2_bdp,e_bdp,iterations,converged,eta1_opt,eta2_opt,e_opt,"
        << "eta_" << a << ",e_" << a << ",eta_" << b << ",e_" << b << ",status\n";
    for (const auto& r : result.rows) {
        out << format_number(r.eps) << ',' << format_number(r.delta) << ','
            << format_number(r.eta_bdp ? r.eta_bdp->eta1() : kNaN) << ','
            << format_number(r.eta_bdp ? r.eta_bdp->eta2() : kNaN) << ',' << format_number(r.e_bdp) << ','
            << r.iterations << ',' << (r.converged ? 1 : 0) << ','
            << format_number(r.eta_opt ? r.eta_opt->eta1() : kNaN) << ','
            << format_number(r.eta_opt ? r.eta_opt->eta2() : kNaN) << ',' << format_number(r.e_opt) << ','
            << format_number(r.eta_single[0]) << ',' << format_number(r.e_single[0]) << ','
            << format_number(r.eta_single[1]) << ',' << format_number(r.e_single[1]) << ','
            << csv_safe(r.status) << '\n';
    }
    return out.str();
}

void write_reproduce(const ReproduceResult& result)
{
    namespace fs = std::filesystem;
    const auto& cfg = result.config;
    const fs::path dir = cfg.out_dir;
    fs::create_directories(dir / "traces");
    fs::create_directories(dir / "plots");

    std::string eps_list;
    for (double e : cfg.eps_list) {
        eps_list += (eps_list.empty() ? "" : ",") + io::format_number(e);
    }
    const Problem probe = make_test_problem(cfg.example, cfg.n, cfg.eps_list.front(), cfg.seed);
    const RegParams eta0 = cfg.eta0 ? *cfg.eta0 : default_eta0(probe);
    io::Meta meta{
        {"example", to_string(cfg.example)},
        {"model", to_string(model_for(cfg.example, probe).id)},
        {"n", std::to_string(probe.n())},
        {"m", std::to_string(probe.m())},
        {"eps_list", eps_list},
        {"seed", std::to_string(cfg.seed)},
        {"gamma", io::format_number(cfg.gamma)},
        {"c_m", io::format_number(cfg.c_m)},
        {"eta0", io::format_number(eta0.eta1()) + "," + io::format_number(eta0.eta2())},
        {"outer_tol", io::format_number(cfg.outer_tol.value_or(kOuterTol))},
        {"outer_max_iter", std::to_string(cfg.outer_max_iter.value_or(kBroydenMaxIter))},
        {"grid_eta1", io::format_number(cfg.grid.eta1.lo) + "," + io::format_number(cfg.grid.eta1.hi) + "," +
                          std::to_string(cfg.grid.eta1.count)},
        {"grid_eta2", io::format_number(cfg.grid.eta2.lo) + "," + io::format_number(cfg.grid.eta2.hi) + "," +
                          std::to_string(cfg.grid.eta2.count)},
        {"all_converged", result.all_converged() ? "true" : "false"},
    };
    io::write_meta(dir / "meta.txt", meta);

    {
        std::ofstream out(dir / "table.csv", std::ios::binary);
        if (!out) {
            throw Error("cannot write " + (dir / "table.csv").string());
        }
        out << format_table(result);
    }

    for (const auto& r : result.rows) {
        const std::string tag = "eps_" + eps_tag(r.eps);
        io::write_trace_csv(dir / "traces" / (tag + ".csv"), r.trace);
        if (r.u_bdp.size() == 0) {
            continue;
        }
        const Problem p = make_test_problem(cfg.example, cfg.n, r.eps, cfg.seed);
        const Vector& u_true = *p.u_true();
        if (p.shape().is_image()) {
            io::write_image_svg(dir / "plots" / (tag + "_true.svg"), "exact", u_true, p.shape().rows,
                                p.shape().cols);
            io::write_image_svg(dir / "plots" / (tag + "_bdp.svg"), "balanced discrepancy", r.u_bdp,
                                p.shape().rows, p.shape().cols);
        } else {
            const Eigen::Index n = p.n();
            const Vector t = Vector::LinSpaced(n, p.grid().a + 0.5 * p.grid().h, p.grid().b - 0.5 * p.grid().h);
            io::write_line_plot_svg(dir / "plots" / (tag + ".svg"), to_string(cfg.example) + ", eps " + eps_tag(r.eps),
                                    t, {{"exact", u_true, "black"}, {"balanced discrepancy", r.u_bdp, "crimson"}});
        }
    }
}

}  // namespace mtikh
