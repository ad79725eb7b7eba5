#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace ellmom {

// Square numeric CSV, no header.
Eigen::MatrixXd read_covariance_csv(const std::string& path);
void write_covariance_csv(const std::string& path, const Eigen::MatrixXd& m);

// Sample CSV: header y1,...,yp then one numeric row per observation.
Eigen::MatrixXd read_samples_csv(const std::string& path);
void write_samples_csv(const std::string& path, const Eigen::MatrixXd& rows);

// Panel CSV: header date,<col>,... with a string key column first. Also used
// for factor files.
struct Panel {
  std::vector<std::string> dates;
  std::vector<std::string> columns;
  Eigen::MatrixXd values;  // T x p
};
Panel read_panel_csv(const std::string& path);
void write_panel_csv(const std::string& path, const Panel& panel);

// Blocks wire format: JSON array of arrays of 1-based coordinate indices.
// In-memory blocks are 0-based.
std::vector<std::vector<int>> blocks_from_json_text(const std::string& text,
                                                    int p);
std::string blocks_to_json_text(const std::vector<std::vector<int>>& blocks);
std::vector<std::vector<int>> read_blocks_json(const std::string& path, int p);
void write_blocks_json(const std::string& path,
                       const std::vector<std::vector<int>>& blocks);

// Shortest representation that round-trips a double (17 significant digits).
std::string format_double(double value);

}  // namespace ellmom
