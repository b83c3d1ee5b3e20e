#pragma once

// Deterministic CSV output: 9 significant digits, '.' separator, LF endings.

#include <ostream>
#include <string>
#include <vector>

namespace evla {

/// %.9g in the C locale; "inf", "-inf", "nan" for non-finite values.
std::string format_number(double x);

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}

    void header(const std::vector<std::string>& columns);
    CsvWriter& cell(double x);
    CsvWriter& cell(const std::string& s);
    CsvWriter& empty();
    void end_row();

private:
    std::ostream& os_;
    bool first_ = true;
    void sep();
};

}  // namespace evla
