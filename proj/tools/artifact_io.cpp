#include "artifact_io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace logvol::cli {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_matrix(const std::filesystem::path& path, const std::vector<std::string>& labels,
                  const Eigen::MatrixXd& values) {
    if (static_cast<Eigen::Index>(labels.size()) != values.rows()) {
        throw std::invalid_argument("write_matrix: label count mismatch");
    }
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        out << labels[static_cast<std::size_t>(i)];
        for (Eigen::Index t = 0; t < values.cols(); ++t) {
            out << '\t' << format_double(values(i, t));
        }
        out << '\n';
    }
}

LabeledMatrix read_matrix(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    LabeledMatrix m;
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string label;
        std::getline(ss, label, '\t');
        m.labels.push_back(label);
        std::vector<double> row;
        std::string cell;
        while (std::getline(ss, cell, '\t')) {
            row.push_back(std::stod(cell));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw std::runtime_error("empty matrix file " + path.string());
    }
    m.values.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size()) {
            throw std::runtime_error("ragged matrix file " + path.string());
        }
        for (std::size_t t = 0; t < rows[i].size(); ++t) {
            m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = rows[i][t];
        }
    }
    return m;
}

void write_vector(const std::filesystem::path& path, const std::string& name,
                  const Eigen::VectorXd& values) {
    write_matrix(path, {name}, values.transpose());
}

void write_clustering(const std::filesystem::path& path,
                      const std::vector<std::string>& tickers, const Clustering& clustering) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << "ticker,cluster_id\n";
    for (std::size_t i = 0; i < clustering.labels.size(); ++i) {
        out << tickers[i] << ',' << clustering.labels[i] << '\n';
    }
}

Clustering read_clustering(const std::filesystem::path& path,
                           const std::vector<std::string>& expected_tickers) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::string line;
    std::getline(in, line);
    if (line != "ticker,cluster_id") {
        throw std::runtime_error("bad clustering header in " + path.string());
    }
    std::map<std::string, int> by_ticker;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw std::runtime_error("bad clustering row in " + path.string());
        }
        by_ticker[line.substr(0, comma)] = std::stoi(line.substr(comma + 1));
    }
    Clustering c;
    c.k = 0;
    for (const auto& ticker : expected_tickers) {
        const auto it = by_ticker.find(ticker);
        if (it == by_ticker.end()) {
            throw std::runtime_error("clustering file misses ticker " + ticker);
        }
        c.labels.push_back(it->second);
        c.k = std::max(c.k, it->second);
    }
    c.validate();
    return c;
}

void write_json(const std::filesystem::path& path, const json& value) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << value.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    json value;
    in >> value;
    return value;
}

void write_sectors(const std::filesystem::path& path, const std::vector<std::string>& tickers,
                   const std::vector<std::string>& sectors) {
    if (tickers.size() != sectors.size()) {
        throw std::invalid_argument("write_sectors: size mismatch");
    }
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << "ticker,sector\n";
    for (std::size_t i = 0; i < tickers.size(); ++i) {
        out << tickers[i] << ',' << sectors[i] << '\n';
    }
}

std::vector<std::string> read_sectors(const std::filesystem::path& path,
                                      const std::vector<std::string>& expected_tickers) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::string line;
    std::getline(in, line);
    if (line != "ticker,sector") {
        throw std::runtime_error("bad sectors header in " + path.string());
    }
    std::map<std::string, std::string> by_ticker;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw std::runtime_error("bad sectors row in " + path.string());
        }
        by_ticker[line.substr(0, comma)] = line.substr(comma + 1);
    }
    std::vector<std::string> sectors;
    for (const auto& ticker : expected_tickers) {
        const auto it = by_ticker.find(ticker);
        if (it == by_ticker.end()) {
            throw std::runtime_error("sectors file misses ticker " + ticker);
        }
        sectors.push_back(it->second);
    }
    return sectors;
}

}  // namespace logvol::cli
