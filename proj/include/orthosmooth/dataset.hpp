#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace orthosmooth {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Observations (x, y) sorted ascending by x, ties kept in input order.
/// Immutable after construction; at least two points.
class Dataset {
public:
    /// Sorts stably by x. Throws SizeError if fewer than two points and
    /// InputError if any value is non-finite or the label count mismatches.
    explicit Dataset(std::vector<Point> points, std::vector<std::string> groups = {});

    std::size_t size() const noexcept { return points_.size(); }
    const std::vector<Point>& points() const noexcept { return points_; }
    const Point& operator[](std::size_t i) const { return points_[i]; }

    std::vector<double> xs() const;
    std::vector<double> ys() const;

    bool has_groups() const noexcept { return !groups_.empty(); }
    const std::vector<std::string>& groups() const noexcept { return groups_; }

    /// Independent per-group datasets, ordered by label. Without a group
    /// column the result holds a single entry with an empty label.
    std::vector<std::pair<std::string, Dataset>> split_by_group() const;

private:
    std::vector<Point> points_;
    std::vector<std::string> groups_;
};

/// Reads a UTF-8 CSV with header naming columns x, y and optionally group.
Dataset load_csv(const std::filesystem::path& path);
Dataset parse_csv(const std::string& text, const std::string& source = "<memory>");

/// Writes x,y[,group] with round-trip precision.
void write_csv(const Dataset& data, const std::filesystem::path& path);
std::string to_csv(const Dataset& data);

enum class CurveKind { Sine, PiecewiseFlat, Polynomial };

struct MeanFunction {
    CurveKind kind = CurveKind::Sine;
    // Sine / PiecewiseFlat: amplitude * sin(2*pi*frequency*(x - origin) + phase),
    // where PiecewiseFlat is identically zero for x < breakpoint and uses
    // origin = breakpoint.
    double amplitude = 1.0;
    double frequency = 1.0;
    double phase = 0.0;
    double breakpoint = 0.5;
    // Polynomial: sum_k coefficients[k] * x^k.
    std::vector<double> coefficients;

    double operator()(double x) const;

    static MeanFunction sine(double amplitude, double frequency, double phase = 0.0);
    static MeanFunction piecewise_flat(double breakpoint, double amplitude, double frequency);
    static MeanFunction polynomial(std::vector<double> coefficients);
};

struct SyntheticSpec {
    MeanFunction mean;
    double noise_sd = 0.1;
    std::size_t n = 100;
    double x_min = 0.0;
    double x_max = 1.0;
    std::uint64_t seed = 1;

    void validate() const;
};

/// y_i = f(x_i) + eps_i, eps_i iid N(0, noise_sd^2), x equally spaced on
/// [x_min, x_max]. Pure function of the spec.
Dataset generate(const SyntheticSpec& spec);

/// Noise-free truth at the same design points as generate().
std::vector<double> truth(const SyntheticSpec& spec);

std::optional<CurveKind> parse_curve_kind(const std::string& name);
std::string curve_kind_name(CurveKind kind);

}  // namespace orthosmooth
