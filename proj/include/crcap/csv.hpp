#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace crcap {

/// Number formatting shared by every CSV the toolkit writes: '.' decimal
/// separator, no grouping, 12 significant digits.
std::string format_number(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a column, or -1.
    int column(const std::string& name) const;
};

void write_csv(std::ostream& os, const CsvTable& table);
/// Parses the subset of RFC 4180 the toolkit emits (quoted fields allowed).
CsvTable read_csv(std::istream& is);

}  // namespace crcap
