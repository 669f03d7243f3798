#include "mtikh/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mtikh::io {

namespace {

std::ofstream open_out(const fs::path& path)
{
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot open " + path.string() + " for writing");
    }
    return out;
}

std::ifstream open_in(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    return in;
}

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(const std::string& token, const fs::path& path)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(token, &used);
        if (trim(token.substr(used)).empty()) {
            return v;
        }
    } catch (const std::exception&) {
    }
    throw Error("malformed number '" + token + "' in " + path.string());
}

std::vector<std::vector<double>> read_rows(const fs::path& path)
{
    auto in = open_in(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        std::vector<double> row;
        std::stringstream ss(line);
        std::string token;
        while (std::getline(ss, token, ',')) {
            row.push_back(parse_double(trim(token), path));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string lookup(const std::map<std::string, std::string>& m, const std::string& key, const fs::path& dir)
{
    const auto it = m.find(key);
    if (it == m.end()) {
        throw Error("meta.txt in " + dir.string() + " lacks key '" + key + "'");
    }
    return it->second;
}

}  // namespace

std::string format_number(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", x);
    return buf;
}

void write_vector_csv(const fs::path& path, const Vector& v)
{
    auto out = open_out(path);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out << format_number(v(i)) << '\n';
    }
}

Vector read_vector_csv(const fs::path& path)
{
    const auto rows = read_rows(path);
    Vector v(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != 1) {
            throw Error("expected one value per line in " + path.string());
        }
        v(static_cast<Eigen::Index>(i)) = rows[i][0];
    }
    return v;
}

void write_matrix_csv(const fs::path& path, const Matrix& M)
{
    auto out = open_out(path);
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            if (j > 0) {
                out << ',';
            }
            out << format_number(M(i, j));
        }
        out << '\n';
    }
}

Matrix read_matrix_csv(const fs::path& path)
{
    const auto rows = read_rows(path);
    if (rows.empty()) {
        return Matrix(0, 0);
    }
    const std::size_t cols = rows.front().size();
    Matrix M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != cols) {
            throw Error("ragged matrix in " + path.string());
        }
        for (std::size_t j = 0; j < cols; ++j) {
            M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return M;
}

void write_meta(const fs::path& path, const Meta& meta)
{
    auto out = open_out(path);
    for (const auto& [key, value] : meta) {
        out << key << ": " << value << '\n';
    }
}

Meta read_meta(const fs::path& path)
{
    auto in = open_in(path);
    Meta meta;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto colon = line.find(':');
        if (colon == std::string::npos) {
            throw Error("malformed meta line '" + line + "' in " + path.string());
        }
        meta.emplace_back(trim(line.substr(0, colon)), trim(line.substr(colon + 1)));
    }
    return meta;
}

std::map<std::string, std::string> to_map(const Meta& meta)
{
    std::map<std::string, std::string> m;
    for (const auto& [k, v] : meta) {
        m[k] = v;
    }
    return m;
}

void write_problem_bundle(const fs::path& dir, const Problem& problem, const Meta& extra)
{
    fs::create_directories(dir);
    write_matrix_csv(dir / "K.csv", problem.K());
    write_vector_csv(dir / "g_obs.csv", problem.g_obs());
    if (problem.u_true()) {
        write_vector_csv(dir / "u_true.csv", *problem.u_true());
    }
    if (problem.g_true()) {
        write_vector_csv(dir / "g_true.csv", *problem.g_true());
    }
    Meta meta{
        {"n", std::to_string(problem.n())},
        {"m", std::to_string(problem.m())},
        {"rows", std::to_string(problem.shape().rows)},
        {"cols", std::to_string(problem.shape().cols)},
        {"a", format_number(problem.grid().a)},
        {"b", format_number(problem.grid().b)},
        {"h", format_number(problem.grid().h)},
        {"delta", format_number(problem.delta())},
    };
    meta.insert(meta.end(), extra.begin(), extra.end());
    write_meta(dir / "meta.txt", meta);
}

ProblemBundle read_problem_bundle(const fs::path& dir)
{
    const Meta meta = read_meta(dir / "meta.txt");
    const auto m = to_map(meta);
    Matrix K = read_matrix_csv(dir / "K.csv");
    Vector g_obs = read_vector_csv(dir / "g_obs.csv");
    std::optional<Vector> u_true;
    std::optional<Vector> g_true;
    if (fs::exists(dir / "u_true.csv")) {
        u_true = read_vector_csv(dir / "u_true.csv");
    }
    if (fs::exists(dir / "g_true.csv")) {
        g_true = read_vector_csv(dir / "g_true.csv");
    }
    const Grid grid{parse_double(lookup(m, "a", dir), dir), parse_double(lookup(m, "b", dir), dir),
                    parse_double(lookup(m, "h", dir), dir)};
    Shape shape{static_cast<int>(K.cols()), 1};
    if (m.count("rows") && m.count("cols")) {
        shape = Shape{std::stoi(m.at("rows")), std::stoi(m.at("cols"))};
    }
    const double delta = parse_double(lookup(m, "delta", dir), dir);
    return {Problem(std::move(K), std::move(g_obs), delta, grid, shape, std::move(u_true), std::move(g_true)),
            meta};
}

void write_trace_csv(const fs::path& path, const std::vector<TraceEntry>& trace)
{
    auto out = open_out(path);
    out << "iter,eta1,eta2,phi,psi1,psi2,residual_norm\n";
    for (const auto& e : trace) {
        out << e.iter << ',' << format_number(e.eta1) << ',' << format_number(e.eta2) << ','
            << format_number(e.phi) << ',' << format_number(e.psi1) << ',' << format_number(e.psi2) << ','
            << format_number(e.residual_norm) << '\n';
    }
}

void write_line_plot_svg(const fs::path& path, const std::string& title, const Vector& x,
                         const std::vector<Series>& series)
{
    constexpr double W = 640, H = 400, L = 60, R = 20, T = 40, B = 40;
    double ymin = 0.0, ymax = 0.0;
    bool first = true;
    for (const auto& s : series) {
        if (s.values.size() == 0) continue;
        ymin = first ? s.values.minCoeff() : std::min(ymin, s.values.minCoeff());
        ymax = first ? s.values.maxCoeff() : std::max(ymax, s.values.maxCoeff());
        first = false;
    }
    if (ymax <= ymin) {
        ymax = ymin + 1.0;
    }
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
    const double xmin = x.size() ? x.minCoeff() : 0.0;
    const double xmax = x.size() && x.maxCoeff() > xmin ? x.maxCoeff() : xmin + 1.0;
    auto px = [&](double v) { return L + (v - xmin) / (xmax - xmin) * (W - L - R); };
    auto py = [&](double v) { return H - B - (v - ymin) / (ymax - ymin) * (H - T - B); };

    auto out = open_out(path);
    char buf[64];
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    out << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    out << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
    std::snprintf(buf, sizeof buf, "%.3g", ymax);
    out << "<text x=\"" << L - 4 << "\" y=\"" << T + 4 << "\" text-anchor=\"end\" font-size=\"10\">" << buf
        << "</text>\n";
    std::snprintf(buf, sizeof buf, "%.3g", ymin);
    out << "<text x=\"" << L - 4 << "\" y=\"" << H - B << "\" text-anchor=\"end\" font-size=\"10\">" << buf
        << "</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
        for (Eigen::Index i = 0; i < std::min(x.size(), s.values.size()); ++i) {
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(x(i)), py(s.values(i)));
            out << buf;
        }
        out << "\"/>\n";
        out << "<text x=\"" << L + 10 << "\" y=\"" << T + 16 + 14 * k << "\" font-size=\"11\" fill=\"" << s.color
            << "\">" << s.label << "</text>\n";
    }
    out << "</svg>\n";
}

void write_image_svg(const fs::path& path, const std::string& title, const Vector& pixels, int rows, int cols)
{
    constexpr int cell = 6;
    const double lo = pixels.size() ? pixels.minCoeff() : 0.0;
    const double hi = pixels.size() ? pixels.maxCoeff() : 1.0;
    const double span = hi > lo ? hi - lo : 1.0;
    auto out = open_out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << cols * cell << "\" height=\""
        << rows * cell + 20 << "\">\n";
    out << "<text x=\"2\" y=\"14\" font-size=\"12\">" << title << "</text>\n";
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const double v = (pixels(static_cast<Eigen::Index>(r) * cols + c) - lo) / span;
            const int level = std::clamp(static_cast<int>(v * 255.0 + 0.5), 0, 255);
            out << "<rect x=\"" << c * cell << "\" y=\"" << 20 + r * cell << "\" width=\"" << cell
                << "\" height=\"" << cell << "\" fill=\"rgb(" << level << ',' << level << ',' << level
                << ")\"/>\n";
        }
    }
    out << "</svg>\n";
}

}  // namespace mtikh::io
