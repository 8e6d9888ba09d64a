#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace orthosmooth::csv {

/// Shortest-round-trip-safe formatting ("%.17g"), locale independent.
std::string format_exact(double v);
/// Compact formatting ("%.12g") for plot data.
std::string format(double v);

std::vector<std::string> split_line(std::string_view line);

/// Parses a finite double; the whole field must be consumed.
bool parse_double(std::string_view field, double& out);

/// Writes to a sibling temporary file and renames it into place so the
/// target is never observed half written. Throws InputError on I/O failure.
void write_atomic(const std::filesystem::path& path, const std::string& content);

class Table {
public:
    explicit Table(std::vector<std::string> header);

    void add_comment(const std::string& line);
    void add_row(const std::vector<std::string>& cells);
    void add_row(const std::vector<double>& values);

    std::string str() const;

private:
    std::vector<std::string> comments_;
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace orthosmooth::csv
