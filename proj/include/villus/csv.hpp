#pragma once

#include <filesystem>
#include <initializer_list>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace villus {

/// Decimal rendering with 17 significant digits; identical input gives identical text.
std::string format_number(double value);

/// Minimal CSV writer: fixed number formatting and '\n' line endings.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    void header(std::initializer_list<std::string_view> columns);
    void header(std::span<const std::string> columns);
    void row(std::initializer_list<double> values);
    void row(std::span<const double> values);

private:
    std::ostream& out_;
};

/// Writes `content` to `path` via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Two-column plot series (x y per line, '#' header comment).
std::string plot_series(std::string_view title, std::span<const double> x, std::span<const double> y);

}  // namespace villus
