#pragma once

#include <istream>
#include <string>
#include <vector>

namespace recur {

// Minimal RFC-4180-ish CSV: comma separated, optional double-quoting,
// CRLF tolerated. Line numbers are kept for error reporting.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<int> line_numbers; // 1-based source line of each row
};

CsvTable read_csv(std::istream& in);

// Quotes a field when it contains a comma, quote, or newline.
std::string csv_escape(const std::string& field);

} // namespace recur
