#include "logvol/panel_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace logvol {

namespace {

std::string fmt_price(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

}  // namespace

void RawSeries::validate() const {
    if (dates.size() != prices.size()) {
        throw std::invalid_argument("RawSeries " + ticker + ": dates/prices length mismatch");
    }
    if (dates.empty()) {
        throw std::invalid_argument("RawSeries " + ticker + ": empty series");
    }
    for (std::size_t i = 1; i < dates.size(); ++i) {
        if (!(dates[i - 1] < dates[i])) {
            throw std::invalid_argument("RawSeries " + ticker + ": dates not strictly increasing");
        }
    }
    for (double p : prices) {
        if (!(p > 0.0)) {
            throw std::invalid_argument("RawSeries " + ticker + ": non-positive price");
        }
    }
}

void PricePanel::validate() const {
    if (static_cast<Eigen::Index>(tickers.size()) != prices.rows() ||
        static_cast<Eigen::Index>(dates.size()) != prices.cols()) {
        throw std::invalid_argument("PricePanel: shape mismatch");
    }
    if (n_stocks() < 2 || n_dates() < 2) {
        throw std::invalid_argument("PricePanel: need at least 2 stocks and 2 dates");
    }
    for (std::size_t i = 1; i < dates.size(); ++i) {
        if (!(dates[i - 1] < dates[i])) {
            throw std::invalid_argument("PricePanel: dates not strictly increasing");
        }
    }
    if (!(prices.array() > 0.0).all()) {
        throw std::invalid_argument("PricePanel: non-positive price entry");
    }
}

std::vector<RawSeries> load_prices(std::istream& in, const std::string& source_name) {
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) {
        throw std::runtime_error(source_name + ": empty file");
    }
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "ticker,date,close") {
        throw std::runtime_error(source_name + ":1: expected header 'ticker,date,close', got '" +
                                 line + "'");
    }

    std::vector<RawSeries> series;
    std::unordered_map<std::string, std::size_t> index;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        const auto fields = split_csv(line);
        if (fields.size() != 3) {
            throw std::runtime_error(source_name + ":" + std::to_string(line_no) +
                                     ": expected 3 fields, got " + std::to_string(fields.size()));
        }
        const std::string ticker(fields[0]);
        if (ticker.empty()) {
            throw std::runtime_error(source_name + ":" + std::to_string(line_no) +
                                     ": empty ticker");
        }
        Date date;
        try {
            date = Date::parse(fields[1]);
        } catch (const std::exception& e) {
            throw std::runtime_error(source_name + ":" + std::to_string(line_no) + ": " +
                                     e.what());
        }
        double close = 0.0;
        try {
            std::size_t consumed = 0;
            close = std::stod(std::string(fields[2]), &consumed);
            if (consumed != fields[2].size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw std::runtime_error(source_name + ":" + std::to_string(line_no) +
                                     ": unparseable close '" + std::string(fields[2]) + "'");
        }
        if (!(close > 0.0)) {
            throw std::runtime_error(source_name + ":" + std::to_string(line_no) +
                                     ": non-positive close for " + ticker + " on " +
                                     date.to_string());
        }

        auto [it, inserted] = index.emplace(ticker, series.size());
        if (inserted) {
            series.push_back(RawSeries{ticker, {}, {}});
        }
        auto& s = series[it->second];
        s.dates.push_back(date);
        s.prices.push_back(close);
    }

    // Sort each series by date and reject duplicate dates.
    for (auto& s : series) {
        std::vector<std::size_t> order(s.dates.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return s.dates[a] < s.dates[b]; });
        std::vector<Date> dates(order.size());
        std::vector<double> prices(order.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            dates[i] = s.dates[order[i]];
            prices[i] = s.prices[order[i]];
        }
        for (std::size_t i = 1; i < dates.size(); ++i) {
            if (dates[i] == dates[i - 1]) {
                throw std::runtime_error(source_name + ": duplicate date " +
                                         dates[i].to_string() + " for ticker " + s.ticker);
            }
        }
        s.dates = std::move(dates);
        s.prices = std::move(prices);
        s.validate();
    }
    return series;
}

std::vector<RawSeries> load_prices(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    return load_prices(in, path.string());
}

std::vector<double> drag_fill(const RawSeries& series, const std::vector<Date>& axis) {
    if (axis.empty()) {
        throw std::invalid_argument("drag_fill: empty date axis");
    }
    if (series.dates.front() > axis.front()) {
        throw std::runtime_error("ticker " + series.ticker + " first trades on " +
                                 series.dates.front().to_string() +
                                 ", after the panel start " + axis.front().to_string() +
                                 "; no price available to fill leading gaps");
    }
    std::vector<double> out(axis.size());
    std::size_t k = 0;
    double last = std::numeric_limits<double>::quiet_NaN();
    // Advance to the last series date <= axis.front().
    while (k < series.dates.size() && series.dates[k] <= axis.front()) {
        last = series.prices[k];
        ++k;
    }
    for (std::size_t i = 0; i < axis.size(); ++i) {
        while (k < series.dates.size() && series.dates[k] <= axis[i]) {
            last = series.prices[k];
            ++k;
        }
        out[i] = last;
    }
    return out;
}

PricePanel clean_panel(const std::vector<RawSeries>& series, double p, CleanReport* report) {
    if (!(p > 0.0 && p <= 1.0)) {
        throw std::invalid_argument("clean_panel: p must be in (0, 1]");
    }
    for (const auto& s : series) s.validate();

    std::size_t max_len = 0;
    for (const auto& s : series) max_len = std::max(max_len, s.dates.size());

    std::vector<const RawSeries*> survivors;
    std::vector<std::string> dropped;
    for (const auto& s : series) {
        if (static_cast<double>(s.dates.size()) < p * static_cast<double>(max_len)) {
            dropped.push_back(s.ticker);
        } else {
            survivors.push_back(&s);
        }
    }
    if (survivors.size() < 2) {
        throw std::runtime_error("clean_panel: fewer than 2 series survive the length filter (" +
                                 std::to_string(survivors.size()) + " survivors)");
    }

    // Latest first-trading-date among survivors: the earliest day they all cover.
    Date start = survivors.front()->dates.front();
    for (const auto* s : survivors) start = std::max(start, s->dates.front());

    std::set<Date> axis_set;
    for (const auto* s : survivors) {
        for (const Date& d : s->dates) {
            if (!(d < start)) axis_set.insert(d);
        }
    }
    std::vector<Date> axis(axis_set.begin(), axis_set.end());
    if (axis.size() < 2) {
        throw std::runtime_error("clean_panel: fewer than 2 common panel dates");
    }

    PricePanel panel;
    panel.dates = axis;
    panel.prices.resize(static_cast<Eigen::Index>(survivors.size()),
                        static_cast<Eigen::Index>(axis.size()));
    for (std::size_t i = 0; i < survivors.size(); ++i) {
        panel.tickers.push_back(survivors[i]->ticker);
        const auto filled = drag_fill(*survivors[i], axis);
        for (std::size_t t = 0; t < filled.size(); ++t) {
            panel.prices(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = filled[t];
        }
    }
    panel.validate();

    if (report) {
        report->p = p;
        report->dropped_tickers = std::move(dropped);
    }
    return panel;
}

void save_panel(const PricePanel& panel, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << "ticker,date,close\n";
    for (Eigen::Index i = 0; i < panel.n_stocks(); ++i) {
        for (Eigen::Index t = 0; t < panel.n_dates(); ++t) {
            out << panel.tickers[static_cast<std::size_t>(i)] << ','
                << panel.dates[static_cast<std::size_t>(t)].to_string() << ','
                << fmt_price(panel.prices(i, t)) << '\n';
        }
    }
}

void save_panel_sidecar(const PricePanel& panel, const CleanReport& report,
                        const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << "{\n";
    out << "  \"n_stocks\": " << panel.n_stocks() << ",\n";
    out << "  \"n_dates\": " << panel.n_dates() << ",\n";
    char pbuf[32];
    std::snprintf(pbuf, sizeof(pbuf), "%.17g", report.p);
    out << "  \"p\": " << pbuf << ",\n";
    out << "  \"dropped_tickers\": [";
    for (std::size_t i = 0; i < report.dropped_tickers.size(); ++i) {
        if (i) out << ", ";
        out << '"' << report.dropped_tickers[i] << '"';
    }
    out << "]\n}\n";
}

PricePanel load_panel(const std::filesystem::path& path) {
    const auto series = load_prices(path);
    if (series.size() < 2) {
        throw std::runtime_error("load_panel: need at least 2 tickers in " + path.string());
    }
    const auto& axis = series.front().dates;
    PricePanel panel;
    panel.dates = axis;
    panel.prices.resize(static_cast<Eigen::Index>(series.size()),
                        static_cast<Eigen::Index>(axis.size()));
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (series[i].dates != axis) {
            throw std::runtime_error("load_panel: ticker " + series[i].ticker +
                                     " does not cover the panel date axis (gaps present)");
        }
        for (std::size_t t = 0; t < axis.size(); ++t) {
            panel.prices(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) =
                series[i].prices[t];
        }
        panel.tickers.push_back(series[i].ticker);
    }
    panel.validate();
    return panel;
}

void save_raw_series(const std::vector<RawSeries>& series, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << "ticker,date,close\n";
    for (const auto& s : series) {
        for (std::size_t t = 0; t < s.dates.size(); ++t) {
            out << s.ticker << ',' << s.dates[t].to_string() << ',' << fmt_price(s.prices[t])
                << '\n';
        }
    }
}

}  // namespace logvol
