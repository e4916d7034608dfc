#pragma once

// Disk formats for the phase artifacts: labeled TSV matrices, the clustering
// table, and small JSON records. Numeric round-trip uses %.17g throughout so
// reruns are byte-identical.

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "logvol/dbht.hpp"

namespace logvol::cli {

using json = nlohmann::ordered_json;

struct LabeledMatrix {
    std::vector<std::string> labels;
    Eigen::MatrixXd values;
};

void write_matrix(const std::filesystem::path& path, const std::vector<std::string>& labels,
                  const Eigen::MatrixXd& values);
LabeledMatrix read_matrix(const std::filesystem::path& path);

void write_vector(const std::filesystem::path& path, const std::string& name,
                  const Eigen::VectorXd& values);

void write_clustering(const std::filesystem::path& path,
                      const std::vector<std::string>& tickers, const Clustering& clustering);
Clustering read_clustering(const std::filesystem::path& path,
                           const std::vector<std::string>& expected_tickers);

void write_json(const std::filesystem::path& path, const json& value);
json read_json(const std::filesystem::path& path);

// Two-column csv "ticker,sector".
void write_sectors(const std::filesystem::path& path, const std::vector<std::string>& tickers,
                   const std::vector<std::string>& sectors);
std::vector<std::string> read_sectors(const std::filesystem::path& path,
                                      const std::vector<std::string>& expected_tickers);

std::string format_double(double v);

}  // namespace logvol::cli
