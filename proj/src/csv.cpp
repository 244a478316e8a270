#include "splitfit/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace splitfit {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    std::ofstream out(path, std::ios::binary); // binary keeps LF on every platform
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (i) out << ',';
        out << table.header[i];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size())
            throw DataError("csv row length does not match the header");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << format_double(row[i]);
        }
        out << '\n';
    }
    if (!out) throw DataError("write to '" + path.string() + "' failed");
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");

    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw DataError("'" + path.string() + "' is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) table.header.push_back(cell);
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            errno = 0;
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0' || errno == ERANGE)
                throw DataError("'" + path.string() + "' line " + std::to_string(line_no) +
                                ": cannot parse '" + cell + "'");
            row.push_back(v);
        }
        if (row.size() != table.header.size())
            throw DataError("'" + path.string() + "' line " + std::to_string(line_no) +
                            ": expected " + std::to_string(table.header.size()) + " columns");
        table.rows.push_back(std::move(row));
    }
    return table;
}

void write_series(const std::filesystem::path& path, const DataSeries& series) {
    CsvTable t;
    t.header = {"time", "value"};
    for (std::size_t i = 0; i < series.values.size(); ++i)
        t.rows.push_back({series.schedule.times()[i], series.values[i]});
    write_csv(path, t);
}

DataSeries read_series(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    if (t.header.size() != 2)
        throw DataError("'" + path.string() + "': expected two columns (time, value)");
    std::vector<double> times, values;
    times.reserve(t.rows.size());
    values.reserve(t.rows.size());
    for (const auto& row : t.rows) {
        times.push_back(row[0]);
        values.push_back(row[1]);
    }
    try {
        return {SamplingSchedule(std::move(times)), std::move(values)};
    } catch (const Error& e) {
        throw DataError("'" + path.string() + "': " + e.what());
    }
}

} // namespace splitfit
