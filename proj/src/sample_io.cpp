#include "varopt/sample_io.hpp"

#include "varopt/error.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace varopt {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Table read_table(std::istream& in) {
  Table t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw Error(ErrorCode::MalformedCSV, "line " + std::to_string(line_no) + ": no header row");
  t.header = split(line);
  std::set<std::string> seen;
  for (const auto& h : t.header) {
    if (h.empty() || !seen.insert(h).second) {
      throw Error(ErrorCode::MalformedCSV,
                  "line " + std::to_string(line_no) + ": empty or duplicate column name '" + h + "'");
    }
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != t.header.size()) {
      throw Error(ErrorCode::MalformedCSV, "line " + std::to_string(line_no) + ": expected " +
                                               std::to_string(t.header.size()) + " cells, got " +
                                               std::to_string(cells.size()));
    }
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto& cell = cells[c];
      const auto* end = cell.data() + cell.size();
      const auto [ptr, ec] = std::from_chars(cell.data(), end, row[c]);
      if (cell.empty() || ec != std::errc() || ptr != end) {
        throw Error(ErrorCode::NonNumericCell, "line " + std::to_string(line_no) + ", column " +
                                                   std::to_string(c + 1) + " ('" + t.header[c] + "'): '" +
                                                   cell + "'");
      }
    }
    t.rows.push_back(std::move(row));
  }
  if (t.rows.empty()) throw Error(ErrorCode::MalformedCSV, "no data rows");
  return t;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open '" + path + "' for reading");
  return in;
}

}  // namespace

void write_samples_csv(std::ostream& out, const SampleSet& samples, const ParameterSpace& space) {
  samples.validate();
  require(samples.dim() == space.dim(), ErrorCode::DimensionMismatch, "samples do not match the parameter space");
  const auto names = space.names();
  for (std::size_t i = 0; i < names.size(); ++i) out << (i ? "," : "") << names[i];
  for (const auto& f : samples.fom_names) out << ',' << f;
  out << '\n';
  for (Eigen::Index r = 0; r < samples.size(); ++r) {
    const Eigen::VectorXd x = denormalize(space, samples.inputs.row(r).transpose());
    for (Eigen::Index j = 0; j < x.size(); ++j) out << (j ? "," : "") << format_number(x[j]);
    for (Eigen::Index k = 0; k < samples.responses.cols(); ++k) out << ',' << format_number(samples.responses(r, k));
    out << '\n';
  }
}

void save_samples(const SampleSet& samples, const ParameterSpace& space, const std::string& path) {
  std::ostringstream buffer;
  write_samples_csv(buffer, samples, space);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open '" + path + "' for writing");
  out << buffer.str();
  if (!out) throw Error(ErrorCode::IoFailure, "failed writing '" + path + "'");
}

SampleSet read_samples_csv(std::istream& in, const ParameterSpace& space,
                           const std::optional<std::vector<std::string>>& known_foms) {
  const Table t = read_table(in);
  const Eigen::Index d = space.dim();
  std::vector<Eigen::Index> param_col(static_cast<std::size_t>(d), -1);
  std::vector<std::pair<std::string, std::size_t>> fom_cols;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (const auto idx = space.index_of(t.header[c])) {
      param_col[static_cast<std::size_t>(*idx)] = static_cast<Eigen::Index>(c);
      continue;
    }
    if (known_foms && std::find(known_foms->begin(), known_foms->end(), t.header[c]) == known_foms->end()) {
      throw Error(ErrorCode::UnknownColumn, "column '" + t.header[c] + "' is neither a parameter nor a known FoM");
    }
    fom_cols.emplace_back(t.header[c], c);
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    if (param_col[static_cast<std::size_t>(i)] < 0) {
      throw Error(ErrorCode::MalformedCSV, "missing parameter column '" + space[i].name + "'");
    }
  }

  const auto n = static_cast<Eigen::Index>(t.rows.size());
  SampleSet set;
  set.inputs.resize(n, d);
  set.responses.resize(n, static_cast<Eigen::Index>(fom_cols.size()));
  for (const auto& [name, col] : fom_cols) set.fom_names.push_back(name);
  set.space_id = space.hash_hex();

  Eigen::VectorXd x(d);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = t.rows[static_cast<std::size_t>(r)];
    for (Eigen::Index i = 0; i < d; ++i) x[i] = row[static_cast<std::size_t>(param_col[static_cast<std::size_t>(i)])];
    try {
      set.inputs.row(r) = normalize(space, x).transpose();
    } catch (const Error& e) {
      throw Error(e.code(), "data row " + std::to_string(r + 1) + ": " + e.what());
    }
    for (std::size_t k = 0; k < fom_cols.size(); ++k) {
      set.responses(r, static_cast<Eigen::Index>(k)) = row[fom_cols[k].second];
    }
  }
  return set;
}

SampleSet load_samples(const std::string& path, const ParameterSpace& space,
                       const std::optional<std::vector<std::string>>& known_foms) {
  auto in = open_input(path);
  return read_samples_csv(in, space, known_foms);
}

std::pair<std::vector<std::string>, Eigen::MatrixXd> load_response_csv(const std::string& path) {
  auto in = open_input(path);
  const Table t = read_table(in);
  Eigen::MatrixXd values(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(t.header.size()));
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    for (std::size_t c = 0; c < t.header.size(); ++c) {
      values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = t.rows[r][c];
    }
  }
  return {t.header, values};
}

}  // namespace varopt
