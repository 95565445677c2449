#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gamma_glm/dataset.hpp"
#include "gamma_glm/errors.hpp"

namespace gamma_glm {

/// Malformed CSV input; `line()` is 1-based, `column()` 1-based or 0 when the
/// whole line is at fault.
class CsvError : public InputError {
public:
  CsvError(const std::string& what, std::size_t line, std::size_t column)
      : InputError(what), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

struct NumericTable {
  Matrix<double> values;
  std::vector<std::string> header; // empty when the file had none
};

/// Comma-separated numbers, one row per line. A first line containing any
/// non-numeric field is taken as a header. Blank lines are skipped.
NumericTable parse_numeric_csv(const std::string& text, const std::string& source = "<input>");
NumericTable read_numeric_csv(const std::filesystem::path& path);

/// First column = response, remaining columns = predictors.
Dataset read_combined_csv(const std::filesystem::path& path);
/// Design matrix file plus a single-column response file.
Dataset read_split_csv(const std::filesystem::path& design,
                       const std::filesystem::path& response);

/// Writes the combined layout with a "b,x1,...,xp" header.
void write_combined_csv(const std::filesystem::path& path, const Dataset& data);
std::string to_combined_csv(const Dataset& data);

/// 17 significant digits ("%.17g"), enough to round-trip any double.
std::string format_double(double value);

} // namespace gamma_glm
