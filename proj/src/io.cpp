#include "gamma_glm/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace gamma_glm {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ','))
    out.push_back(trim(field));
  if (!line.empty() && line.back() == ',')
    out.emplace_back();
  return out;
}

bool parse_number(const std::string& field, double& value) {
  if (field.empty())
    return false;
  errno = 0;
  char* end = nullptr;
  value = std::strtod(field.c_str(), &end);
  return end == field.c_str() + field.size() && errno != ERANGE;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

} // namespace

NumericTable parse_numeric_csv(const std::string& text, const std::string& source) {
  NumericTable table;
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool first_content = true;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty())
      continue;
    const auto fields = split_fields(line);

    if (first_content) {
      first_content = false;
      double dummy;
      bool numeric = true;
      for (const auto& f : fields)
        numeric = numeric && parse_number(f, dummy);
      if (!numeric) {
        table.header = fields;
        width = fields.size();
        continue;
      }
    }

    if (width == 0)
      width = fields.size();
    if (fields.size() != width) {
      throw CsvError(source + ": line " + std::to_string(line_no) + " has " +
                         std::to_string(fields.size()) + " fields, expected " +
                         std::to_string(width),
                     line_no, 0);
    }
    std::vector<double> row(width);
    for (std::size_t c = 0; c < width; ++c) {
      if (!parse_number(fields[c], row[c]))
        throw CsvError(source + ": line " + std::to_string(line_no) + ", column " +
                           std::to_string(c + 1) + ": '" + fields[c] +
                           "' is not a number",
                       line_no, c + 1);
    }
    rows.push_back(std::move(row));
  }

  if (rows.empty())
    throw CsvError(source + ": no data rows", line_no, 0);

  table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < width; ++c)
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return table;
}

NumericTable read_numeric_csv(const std::filesystem::path& path) {
  return parse_numeric_csv(slurp(path), path.string());
}

Dataset read_combined_csv(const std::filesystem::path& path) {
  const NumericTable t = read_numeric_csv(path);
  if (t.values.cols() < 2)
    throw InputError(path.string() + ": need a response column and at least one predictor");
  return Dataset(t.values.rightCols(t.values.cols() - 1), t.values.col(0));
}

Dataset read_split_csv(const std::filesystem::path& design,
                       const std::filesystem::path& response) {
  const NumericTable a = read_numeric_csv(design);
  const NumericTable b = read_numeric_csv(response);
  if (b.values.cols() != 1)
    throw InputError(response.string() + ": response file must have exactly one column");
  return Dataset(a.values, b.values.col(0));
}

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string to_combined_csv(const Dataset& data) {
  std::string out = "b";
  for (Eigen::Index j = 0; j < data.cols(); ++j)
    out += ",x" + std::to_string(j + 1);
  out += '\n';
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    out += format_double(data.responses(i));
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
      out += ',';
      out += format_double(data.design(i, j));
    }
    out += '\n';
  }
  return out;
}

void write_combined_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw InputError("cannot write '" + path.string() + "'");
  out << to_combined_csv(data);
}

} // namespace gamma_glm
