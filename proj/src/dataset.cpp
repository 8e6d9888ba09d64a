#include "orthosmooth/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "orthosmooth/csv_io.hpp"
#include "orthosmooth/error.hpp"

namespace orthosmooth {

Dataset::Dataset(std::vector<Point> points, std::vector<std::string> groups) {
    if (points.size() < 2) {
        throw SizeError("dataset needs at least 2 points, got " + std::to_string(points.size()));
    }
    if (!groups.empty() && groups.size() != points.size()) {
        throw InputError("group labels (" + std::to_string(groups.size()) + ") do not match point count (" +
                         std::to_string(points.size()) + ")");
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!std::isfinite(points[i].x) || !std::isfinite(points[i].y)) {
            throw InputError("non-finite value at point " + std::to_string(i + 1));
        }
    }

    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&points](std::size_t a, std::size_t b) { return points[a].x < points[b].x; });

    points_.reserve(points.size());
    for (std::size_t idx : order) points_.push_back(points[idx]);
    if (!groups.empty()) {
        groups_.reserve(groups.size());
        for (std::size_t idx : order) groups_.push_back(std::move(groups[idx]));
    }
}

std::vector<double> Dataset::xs() const {
    std::vector<double> out(points_.size());
    std::transform(points_.begin(), points_.end(), out.begin(), [](const Point& p) { return p.x; });
    return out;
}

std::vector<double> Dataset::ys() const {
    std::vector<double> out(points_.size());
    std::transform(points_.begin(), points_.end(), out.begin(), [](const Point& p) { return p.y; });
    return out;
}

std::vector<std::pair<std::string, Dataset>> Dataset::split_by_group() const {
    std::vector<std::pair<std::string, Dataset>> out;
    if (groups_.empty()) {
        out.emplace_back(std::string{}, *this);
        return out;
    }
    std::map<std::string, std::vector<Point>> buckets;
    for (std::size_t i = 0; i < points_.size(); ++i) buckets[groups_[i]].push_back(points_[i]);
    for (auto& [label, pts] : buckets) {
        if (pts.size() < 2) {
            throw SizeError("group '" + label + "' has fewer than 2 points");
        }
        out.emplace_back(label, Dataset(std::move(pts)));
    }
    return out;
}

Dataset parse_csv(const std::string& text, const std::string& source) {
    std::istringstream in(text);
    std::string line;

    // Skip leading blank lines and a UTF-8 byte-order mark.
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (line.find_first_not_of(" \t\r") != std::string::npos) {
            have_header = true;
            break;
        }
    }
    if (!have_header) throw InputError(source + ": empty file");

    auto header = csv::split_line(line);
    int col_x = -1, col_y = -1, col_group = -1;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "x") col_x = static_cast<int>(c);
        else if (header[c] == "y") col_y = static_cast<int>(c);
        else if (header[c] == "group") col_group = static_cast<int>(c);
    }
    if (col_x < 0 || col_y < 0) throw InputError(source + ": header must name columns x and y");

    std::vector<Point> points;
    std::vector<std::string> groups;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ++row;
        auto cells = csv::split_line(line);
        auto field = [&](int col, const char* name) -> const std::string& {
            if (static_cast<std::size_t>(col) >= cells.size()) {
                throw InputError(source + ": row " + std::to_string(row) + ", column " + name + ": missing field");
            }
            return cells[static_cast<std::size_t>(col)];
        };
        Point p;
        if (!csv::parse_double(field(col_x, "x"), p.x)) {
            throw InputError(source + ": row " + std::to_string(row) + ", column x: cannot parse '" +
                             cells[static_cast<std::size_t>(col_x)] + "' as a finite number");
        }
        if (!csv::parse_double(field(col_y, "y"), p.y)) {
            throw InputError(source + ": row " + std::to_string(row) + ", column y: cannot parse '" +
                             cells[static_cast<std::size_t>(col_y)] + "' as a finite number");
        }
        points.push_back(p);
        if (col_group >= 0) {
            const std::string& g = field(col_group, "group");
            if (g.empty()) {
                throw InputError(source + ": row " + std::to_string(row) + ", column group: empty label");
            }
            groups.push_back(g);
        }
    }
    if (points.size() < 2) {
        throw SizeError(source + ": need at least 2 data rows, found " + std::to_string(points.size()));
    }
    return Dataset(std::move(points), std::move(groups));
}

Dataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open input file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), path.string());
}

std::string to_csv(const Dataset& data) {
    std::string out = data.has_groups() ? "x,y,group\n" : "x,y\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        out += csv::format_exact(data[i].x);
        out += ',';
        out += csv::format_exact(data[i].y);
        if (data.has_groups()) {
            out += ',';
            out += data.groups()[i];
        }
        out += '\n';
    }
    return out;
}

void write_csv(const Dataset& data, const std::filesystem::path& path) { csv::write_atomic(path, to_csv(data)); }

double MeanFunction::operator()(double x) const {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    switch (kind) {
        case CurveKind::Sine:
            return amplitude * std::sin(two_pi * frequency * x + phase);
        case CurveKind::PiecewiseFlat:
            if (x < breakpoint) return 0.0;
            return amplitude * std::sin(two_pi * frequency * (x - breakpoint) + phase);
        case CurveKind::Polynomial: {
            double acc = 0.0;
            for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * x + *it;
            return acc;
        }
    }
    return 0.0;
}

MeanFunction MeanFunction::sine(double amplitude, double frequency, double phase) {
    MeanFunction f;
    f.kind = CurveKind::Sine;
    f.amplitude = amplitude;
    f.frequency = frequency;
    f.phase = phase;
    return f;
}

MeanFunction MeanFunction::piecewise_flat(double breakpoint, double amplitude, double frequency) {
    MeanFunction f;
    f.kind = CurveKind::PiecewiseFlat;
    f.breakpoint = breakpoint;
    f.amplitude = amplitude;
    f.frequency = frequency;
    return f;
}

MeanFunction MeanFunction::polynomial(std::vector<double> coefficients) {
    MeanFunction f;
    f.kind = CurveKind::Polynomial;
    f.coefficients = std::move(coefficients);
    return f;
}

void SyntheticSpec::validate() const {
    if (!(noise_sd > 0.0) || !std::isfinite(noise_sd)) throw ConfigError("noise_sd must be a positive finite number");
    if (n < 2) throw ConfigError("synthetic n must be at least 2");
    if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max)) {
        throw ConfigError("x range must satisfy x_min < x_max");
    }
}

namespace {

double design_x(const SyntheticSpec& spec, std::size_t i) {
    if (i + 1 == spec.n) return spec.x_max;
    const double step = (spec.x_max - spec.x_min) / static_cast<double>(spec.n - 1);
    return spec.x_min + step * static_cast<double>(i);
}

}  // namespace

std::vector<double> truth(const SyntheticSpec& spec) {
    spec.validate();
    std::vector<double> f(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) f[i] = spec.mean(design_x(spec, i));
    return f;
}

Dataset generate(const SyntheticSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, spec.noise_sd);
    std::vector<Point> pts(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        double x = design_x(spec, i);
        pts[i] = {x, spec.mean(x) + noise(rng)};
    }
    return Dataset(std::move(pts));
}

std::optional<CurveKind> parse_curve_kind(const std::string& name) {
    if (name == "sine") return CurveKind::Sine;
    if (name == "piecewise-flat") return CurveKind::PiecewiseFlat;
    if (name == "polynomial") return CurveKind::Polynomial;
    return std::nullopt;
}

std::string curve_kind_name(CurveKind kind) {
    switch (kind) {
        case CurveKind::Sine: return "sine";
        case CurveKind::PiecewiseFlat: return "piecewise-flat";
        case CurveKind::Polynomial: return "polynomial";
    }
    return "unknown";
}

}  // namespace orthosmooth
