#include "helpers.hpp"

#include "mtikh/experiment.hpp"
#include "mtikh/io.hpp"
#include "mtikh/problems.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace mtikh;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("mtikh_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("numbers round-trip through text")
{
    std::mt19937_64 rng(1);
    const Vector v = testing::random_vector(rng, 200, 1e3);
    const fs::path dir = scratch("vec");
    io::write_vector_csv(dir / "v.csv", v);
    CHECK(io::read_vector_csv(dir / "v.csv") == v);

    const Matrix M = testing::random_matrix(rng, 7, 5) * 1e-200;
    io::write_matrix_csv(dir / "m.csv", M);
    CHECK(io::read_matrix_csv(dir / "m.csv") == M);
    fs::remove_all(dir);
}

TEST_CASE("malformed input is rejected")
{
    const fs::path dir = scratch("bad");
    fs::create_directories(dir);
    std::ofstream(dir / "ragged.csv") << "1,2\n3\n";
    CHECK_THROWS_AS(io::read_matrix_csv(dir / "ragged.csv"), Error);
    std::ofstream(dir / "word.csv") << "1\nabc\n";
    CHECK_THROWS_AS(io::read_vector_csv(dir / "word.csv"), Error);
    std::ofstream(dir / "meta.txt") << "no colon here\n";
    CHECK_THROWS_AS(io::read_meta(dir / "meta.txt"), Error);
    CHECK_THROWS_AS(io::read_vector_csv(dir / "missing.csv"), Error);
    fs::remove_all(dir);
}

TEST_CASE("problem bundles round-trip")
{
    const Problem p = make_test_problem(Example::ex41, 40, 5e-2, 3);
    const fs::path dir = scratch("bundle");
    io::write_problem_bundle(dir, p, {{"eps", "5e-2"}, {"seed", "3"}});
    const auto b = io::read_problem_bundle(dir);
    CHECK(b.problem.K() == p.K());
    CHECK(b.problem.g_obs() == p.g_obs());
    CHECK(*b.problem.u_true() == *p.u_true());
    CHECK(b.problem.delta() == p.delta());
    CHECK(b.problem.grid().h == p.grid().h);
    CHECK(b.problem.shape() == p.shape());
    const auto meta = io::to_map(b.meta);
    CHECK(meta.at("seed") == "3");
    CHECK(meta.at("n") == "40");
    fs::remove_all(dir);
}

TEST_CASE("trace file layout")
{
    const fs::path dir = scratch("trace");
    io::write_trace_csv(dir / "t.csv", {{0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0}});
    const std::string text = slurp(dir / "t.csv");
    CHECK(text.rfind("iter,eta1,eta2,phi,psi1,psi2,residual_norm\n0,", 0) == 0);
    fs::remove_all(dir);
}

TEST_CASE("reproduction output is byte-identical across runs")
{
    ExperimentConfig cfg = ExperimentConfig::defaults(Example::ex42);
    cfg.eps_list = {5e-2};
    cfg.n = 40;
    cfg.grid = GridSpec::square(1e-8, 1e-1, 5);
    cfg.out_dir = scratch("repro_a");
    write_reproduce(reproduce(cfg));
    const fs::path a = cfg.out_dir;
    cfg.out_dir = scratch("repro_b");
    write_reproduce(reproduce(cfg));
    const fs::path b = cfg.out_dir;
    for (const char* f : {"table.csv", "meta.txt", "traces/eps_5e-02.csv", "plots/eps_5e-02.svg"}) {
        REQUIRE(fs::exists(a / f));
        CHECK(slurp(a / f) == slurp(b / f));
    }
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("experiment configuration checks")
{
    ExperimentConfig cfg;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg.eps_list = {1e-2, -1.0};
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg.eps_list = {1e-2};
    CHECK_NOTHROW(cfg.validate());
}
