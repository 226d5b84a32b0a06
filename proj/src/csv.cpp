#include "crcap/csv.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include "crcap/numerics.hpp"

namespace crcap {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";  // folds -0
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

int CsvTable::column(const std::string& name) const {
    for (std::size_t k = 0; k < header.size(); ++k) {
        if (header[k] == name) return static_cast<int>(k);
    }
    return -1;
}

namespace {

void write_field(std::ostream& os, const std::string& f) {
    if (f.find_first_of(",\"\n\r") == std::string::npos) {
        os << f;
        return;
    }
    os << '"';
    for (char c : f) {
        if (c == '"') os << '"';
        os << c;
    }
    os << '"';
}

void write_row(std::ostream& os, const std::vector<std::string>& row) {
    for (std::size_t k = 0; k < row.size(); ++k) {
        if (k) os << ',';
        write_field(os, row[k]);
    }
    os << '\n';
}

bool read_row(std::istream& is, std::vector<std::string>& row) {
    row.clear();
    std::string field;
    bool quoted = false;
    bool any = false;
    char c;
    while (is.get(c)) {
        any = true;
        if (quoted) {
            if (c == '"') {
                if (is.peek() == '"') {
                    is.get(c);
                    field += '"';
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            row.push_back(std::move(field));
            return true;
        } else if (c != '\r') {
            field += c;
        }
    }
    if (quoted) throw ConfigError("unterminated quoted CSV field");
    if (any) row.push_back(std::move(field));
    return any;
}

}  // namespace

void write_csv(std::ostream& os, const CsvTable& table) {
    write_row(os, table.header);
    for (const auto& row : table.rows) write_row(os, row);
}

CsvTable read_csv(std::istream& is) {
    CsvTable t;
    if (!read_row(is, t.header)) throw ConfigError("empty CSV input");
    std::vector<std::string> row;
    while (read_row(is, row)) {
        if (row.size() != t.header.size()) {
            throw ConfigError("CSV row has " + std::to_string(row.size()) + " fields, header has " +
                              std::to_string(t.header.size()));
        }
        t.rows.push_back(row);
    }
    return t;
}

}  // namespace crcap
