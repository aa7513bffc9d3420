#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "nlsp/dense.hpp"
#include "nlsp/errors.hpp"

namespace nlsp {

// Tabular CSV with a fixed header row and optional '#' comment lines.
// Doubles are printed with %.17g so parsing a file back reproduces the
// in-memory values bit for bit.
struct CsvTable {
    std::vector<std::string> comments; // without the leading '#'
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> cells) {
        if (cells.size() != header.size())
            throw ValidationError("csv: row width does not match header");
        rows.push_back(std::move(cells));
    }

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw ValidationError("csv: no column named " + name);
    }

    double number(std::size_t row, const std::string& name) const {
        return std::stod(rows.at(row).at(column(name)));
    }

    std::vector<double> numbers(const std::string& name) const {
        std::vector<double> out;
        const std::size_t c = column(name);
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(std::stod(r.at(c)));
        return out;
    }
};

inline std::string csv_cell(double v) { return format_double(v); }
inline std::string csv_cell(std::size_t v) { return std::to_string(v); }
inline std::string csv_cell(int v) { return std::to_string(v); }
inline std::string csv_cell(bool v) { return v ? "1" : "0"; }
inline std::string csv_cell(const std::string& v) { return v; }

inline void save_csv(const CsvTable& t, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for write: " + path);
    for (const auto& c : t.comments) out << "# " << c << '\n';
    for (std::size_t i = 0; i < t.header.size(); ++i) {
        if (i) out << ',';
        out << t.header[i];
    }
    out << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << row[i];
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    cells.push_back(cur);
    return cells;
}

inline CsvTable load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for read: " + path);
    CsvTable t;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            t.comments.push_back(line.size() > 1 && line[1] == ' ' ? line.substr(2)
                                                                   : line.substr(1));
            continue;
        }
        if (!have_header) {
            t.header = split_csv_line(line);
            have_header = true;
        } else {
            t.rows.push_back(split_csv_line(line));
        }
    }
    if (!have_header) throw IoError("csv without header: " + path);
    return t;
}

} // namespace nlsp
