#include "villus/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "villus/error.hpp"

namespace villus {

std::string format_number(double value) {
    if (value == 0.0) return "0";  // folds -0 into 0
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

void CsvWriter::header(std::initializer_list<std::string_view> columns) {
    bool first = true;
    for (auto c : columns) {
        if (!first) out_ << ',';
        out_ << c;
        first = false;
    }
    out_ << '\n';
}

void CsvWriter::header(std::span<const std::string> columns) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) out_ << ',';
        out_ << columns[i];
    }
    out_ << '\n';
}

void CsvWriter::row(std::initializer_list<double> values) {
    row(std::span<const double>(values.begin(), values.size()));
}

void CsvWriter::row(std::span<const double> values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out_ << ',';
        out_ << format_number(values[i]);
    }
    out_ << '\n';
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        require(static_cast<bool>(out), ErrorKind::Io, "cannot open " + tmp.string() + " for writing");
        out << content;
        require(static_cast<bool>(out), ErrorKind::Io, "failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string plot_series(std::string_view title, std::span<const double> x, std::span<const double> y) {
    std::ostringstream out;
    out << "# " << title << '\n';
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
        out << format_number(x[i]) << ' ' << format_number(y[i]) << '\n';
    }
    return out.str();
}

}  // namespace villus
