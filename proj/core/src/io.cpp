#include "ellmom/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ellmom/blocks.hpp"

namespace ellmom {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& field, const std::string& where) {
  const char* begin = field.data();
  const char* end = begin + field.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r'))
    --end;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw std::runtime_error(where + ": bad numeric field '" + field + "'");
  if (!std::isfinite(value))
    throw std::runtime_error(where + ": non-finite value '" + field + "'");
  return value;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    lines.push_back(line);
  }
  return lines;
}

std::string trimmed(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  std::size_t e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

}  // namespace

Eigen::MatrixXd read_covariance_csv(const std::string& path) {
  auto lines = read_lines(path);
  if (lines.empty()) throw std::runtime_error(path + ": empty covariance file");
  const std::size_t p = split_line(lines[0]).size();
  if (lines.size() != p)
    throw std::runtime_error(path + ": covariance matrix must be square");
  Eigen::MatrixXd sigma(static_cast<int>(p), static_cast<int>(p));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto fields = split_line(lines[i]);
    if (fields.size() != p)
      throw std::runtime_error(path + ": ragged row " + std::to_string(i + 1));
    for (std::size_t j = 0; j < p; ++j)
      sigma(static_cast<int>(i), static_cast<int>(j)) =
          parse_double(fields[j], path);
  }
  return sigma;
}

void write_covariance_csv(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

Eigen::MatrixXd read_samples_csv(const std::string& path) {
  auto lines = read_lines(path);
  if (lines.size() < 2)
    throw std::runtime_error(path + ": need a header and at least one row");
  auto header = split_line(lines[0]);
  const std::size_t p = header.size();
  for (std::size_t j = 0; j < p; ++j) {
    if (trimmed(header[j]) != "y" + std::to_string(j + 1))
      throw std::runtime_error(path + ": expected header y1,...,y" +
                               std::to_string(p));
  }
  Eigen::MatrixXd rows(static_cast<int>(lines.size() - 1), static_cast<int>(p));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto fields = split_line(lines[i]);
    if (fields.size() != p)
      throw std::runtime_error(path + ": ragged row " + std::to_string(i + 1));
    for (std::size_t j = 0; j < p; ++j)
      rows(static_cast<int>(i - 1), static_cast<int>(j)) =
          parse_double(fields[j], path);
  }
  return rows;
}

void write_samples_csv(const std::string& path, const Eigen::MatrixXd& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  for (int j = 0; j < rows.cols(); ++j) {
    if (j) out << ',';
    out << 'y' << (j + 1);
  }
  out << '\n';
  for (int i = 0; i < rows.rows(); ++i) {
    for (int j = 0; j < rows.cols(); ++j) {
      if (j) out << ',';
      out << format_double(rows(i, j));
    }
    out << '\n';
  }
}

Panel read_panel_csv(const std::string& path) {
  auto lines = read_lines(path);
  if (lines.size() < 2)
    throw std::runtime_error(path + ": need a header and at least one row");
  auto header = split_line(lines[0]);
  if (header.size() < 2 || trimmed(header[0]) != "date")
    throw std::runtime_error(path + ": header must start with 'date'");
  Panel panel;
  for (std::size_t j = 1; j < header.size(); ++j)
    panel.columns.push_back(trimmed(header[j]));
  const std::size_t p = panel.columns.size();
  panel.values.resize(static_cast<int>(lines.size() - 1), static_cast<int>(p));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto fields = split_line(lines[i]);
    if (fields.size() != p + 1)
      throw std::runtime_error(path + ": ragged row " + std::to_string(i + 1));
    panel.dates.push_back(trimmed(fields[0]));
    for (std::size_t j = 0; j < p; ++j)
      panel.values(static_cast<int>(i - 1), static_cast<int>(j)) =
          parse_double(fields[j + 1], path);
  }
  return panel;
}

void write_panel_csv(const std::string& path, const Panel& panel) {
  if (panel.values.rows() != static_cast<int>(panel.dates.size()) ||
      panel.values.cols() != static_cast<int>(panel.columns.size()))
    throw std::invalid_argument("write_panel_csv: inconsistent panel");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "date";
  for (const auto& c : panel.columns) out << ',' << c;
  out << '\n';
  for (int i = 0; i < panel.values.rows(); ++i) {
    out << panel.dates[static_cast<std::size_t>(i)];
    for (int j = 0; j < panel.values.cols(); ++j)
      out << ',' << format_double(panel.values(i, j));
    out << '\n';
  }
}

std::vector<std::vector<int>> blocks_from_json_text(const std::string& text,
                                                    int p) {
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("blocks JSON parse error: ") + e.what());
  }
  if (!parsed.is_array())
    throw std::runtime_error("blocks JSON must be an array of arrays");
  std::vector<std::vector<int>> blocks;
  for (const auto& entry : parsed) {
    if (!entry.is_array())
      throw std::runtime_error("blocks JSON must be an array of arrays");
    std::vector<int> block;
    for (const auto& idx : entry) {
      if (!idx.is_number_integer())
        throw std::runtime_error("blocks JSON indices must be integers");
      block.push_back(idx.get<int>() - 1);  // wire format is 1-based
    }
    blocks.push_back(std::move(block));
  }
  auto diag = validate_blocks(blocks, p, false);
  if (!diag.ok) {
    std::ostringstream msg;
    msg << "invalid blocks for p=" << p << ":";
    for (int idx : diag.out_of_range) msg << " index " << (idx + 1) << " out of range;";
    for (auto b : diag.empty_blocks) msg << " block " << (b + 1) << " empty;";
    for (int idx : diag.duplicates_within)
      msg << " index " << (idx + 1) << " duplicated within a block;";
    throw std::runtime_error(msg.str());
  }
  return blocks;
}

std::string blocks_to_json_text(const std::vector<std::vector<int>>& blocks) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& block : blocks) {
    nlohmann::json j = nlohmann::json::array();
    for (int idx : block) j.push_back(idx + 1);
    out.push_back(std::move(j));
  }
  return out.dump();
}

std::vector<std::vector<int>> read_blocks_json(const std::string& path, int p) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return blocks_from_json_text(buffer.str(), p);
}

void write_blocks_json(const std::string& path,
                       const std::vector<std::vector<int>>& blocks) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << blocks_to_json_text(blocks) << '\n';
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

}  // namespace ellmom
