#pragma once

#include "mtikh/types.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace mtikh::io {

namespace fs = std::filesystem;

/// Key/value pairs kept in insertion order; written as "key: value" lines.
using Meta = std::vector<std::pair<std::string, std::string>>;

/// Scientific notation with 17 significant digits; parses back exactly.
std::string format_number(double x);

void write_vector_csv(const fs::path& path, const Vector& v);
Vector read_vector_csv(const fs::path& path);

/// One matrix row per line.
void write_matrix_csv(const fs::path& path, const Matrix& M);
Matrix read_matrix_csv(const fs::path& path);

void write_meta(const fs::path& path, const Meta& meta);
Meta read_meta(const fs::path& path);
std::map<std::string, std::string> to_map(const Meta& meta);

/// Directory bundle: K.csv, g_obs.csv, optional u_true.csv / g_true.csv and
/// meta.txt with n, m, rows, cols, a, b, h, delta plus caller extras (eps,
/// seed, example, model).
void write_problem_bundle(const fs::path& dir, const Problem& problem, const Meta& extra = {});

struct ProblemBundle {
    Problem problem;
    Meta meta;
};

ProblemBundle read_problem_bundle(const fs::path& dir);

/// Columns: iter, eta1, eta2, phi, psi1, psi2, residual_norm.
void write_trace_csv(const fs::path& path, const std::vector<TraceEntry>& trace);

struct Series {
    std::string label;
    Vector values;
    std::string color;
};

/// Minimal SVG line plot: axes box, one polyline per series, legend.
void write_line_plot_svg(const fs::path& path, const std::string& title, const Vector& x,
                         const std::vector<Series>& series);

/// Single-channel image as a grid of gray rectangles.
void write_image_svg(const fs::path& path, const std::string& title, const Vector& pixels, int rows, int cols);

}  // namespace mtikh::io
