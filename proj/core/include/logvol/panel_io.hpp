#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "logvol/dates.hpp"

namespace logvol {

// One ticker's raw price history. Dates strictly increasing, prices > 0.
struct RawSeries {
    std::string ticker;
    std::vector<Date> dates;
    std::vector<double> prices;

    void validate() const;
};

// Gap-free price panel on a shared date axis. prices is N x T (stocks x dates).
struct PricePanel {
    std::vector<std::string> tickers;
    std::vector<Date> dates;
    Eigen::MatrixXd prices;

    Eigen::Index n_stocks() const { return prices.rows(); }
    Eigen::Index n_dates() const { return prices.cols(); }
    void validate() const;
};

struct CleanReport {
    double p = 0.0;
    std::vector<std::string> dropped_tickers;
};

// Reads "ticker,date,close" rows (header required, ISO-8601 dates).
// One RawSeries per distinct ticker in order of first appearance, dates sorted.
// Throws with the offending line number on malformed rows, and names the
// ticker/date on duplicates or non-positive prices.
std::vector<RawSeries> load_prices(std::istream& in, const std::string& source_name = "<stream>");
std::vector<RawSeries> load_prices(const std::filesystem::path& path);

// Fills the series onto the reference date axis by dragging the last
// available price over gaps. Throws, naming the ticker, when the series
// starts after the first axis date (no price to drag into leading gaps).
std::vector<double> drag_fill(const RawSeries& series, const std::vector<Date>& axis);

// Cleaning procedure: (1) drop series shorter than p times the longest,
// (2) start at the latest first-trading-date among survivors, (3) date axis
// is the union of survivor trading dates from the start on, (4) drag-fill
// gaps. Throws if fewer than 2 series survive step 1.
PricePanel clean_panel(const std::vector<RawSeries>& series, double p,
                       CleanReport* report = nullptr);

// Panel persisted in the ingestion format (ticker,date,close), prices with
// round-trip precision.
void save_panel(const PricePanel& panel, const std::filesystem::path& path);
void save_panel_sidecar(const PricePanel& panel, const CleanReport& report,
                        const std::filesystem::path& path);

// Loads a previously saved panel; every ticker must cover the full axis.
PricePanel load_panel(const std::filesystem::path& path);

void save_raw_series(const std::vector<RawSeries>& series, const std::filesystem::path& path);

}  // namespace logvol
