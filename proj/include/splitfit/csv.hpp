#ifndef SPLITFIT_CSV_HPP
#define SPLITFIT_CSV_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "splitfit/model.hpp"

namespace splitfit {

/// Comma-separated, '.' decimal, one header row, LF line endings. Doubles are
/// written with enough digits to round-trip exactly.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

std::string format_double(double v);

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

/// Time series files: times in column 1, values in column 2.
void write_series(const std::filesystem::path& path, const DataSeries& series);
DataSeries read_series(const std::filesystem::path& path);

} // namespace splitfit

#endif
