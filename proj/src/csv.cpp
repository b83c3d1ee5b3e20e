#include "evla/csv.hpp"

#include <charconv>
#include <cmath>

namespace evla {

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    // to_chars ignores the global locale.
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 9);
    return std::string(buf, res.ptr);
}

void CsvWriter::sep() {
    if (!first_) os_ << ',';
    first_ = false;
}

void CsvWriter::header(const std::vector<std::string>& columns) {
    for (const std::string& c : columns) cell(c);
    end_row();
}

CsvWriter& CsvWriter::cell(double x) {
    sep();
    os_ << format_number(x);
    return *this;
}

CsvWriter& CsvWriter::cell(const std::string& s) {
    sep();
    os_ << s;
    return *this;
}

CsvWriter& CsvWriter::empty() {
    sep();
    return *this;
}

void CsvWriter::end_row() {
    os_ << '\n';
    first_ = true;
}

}  // namespace evla
