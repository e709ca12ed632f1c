#include "coinrisk/timeseries.hpp"

#include "coinrisk/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace coinrisk::timeseries {

namespace {

std::string_view trim(std::string_view s) {
    const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && ws(s.front())) s.remove_prefix(1);
    while (!s.empty() && ws(s.back())) s.remove_suffix(1);
    return s;
}

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
    if (s.empty()) return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

bool parse_double(std::string_view s, double& out) {
    if (s.empty()) return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

void check_increasing(const std::vector<Date>& dates) {
    for (std::size_t i = 1; i < dates.size(); ++i) {
        if (!(dates[i - 1] < dates[i])) {
            throw std::invalid_argument("dates must be strictly increasing (at " + format_date(dates[i]) + ")");
        }
    }
}

} // namespace

Date parse_date(std::string_view text) {
    text = trim(text);
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw std::invalid_argument("not an ISO-8601 date: '" + std::string(text) + "'");
    }
    int y = 0;
    unsigned m = 0, d = 0;
    if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m) || !parse_int(text.substr(8, 2), d)) {
        throw std::invalid_argument("not an ISO-8601 date: '" + std::string(text) + "'");
    }
    const Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!date.ok()) {
        throw std::invalid_argument("invalid calendar date: '" + std::string(text) + "'");
    }
    return date;
}

std::string format_date(Date d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                  static_cast<unsigned>(d.day()));
    return buf;
}

PriceSeries::PriceSeries(std::string asset_id, std::vector<Date> dates, std::vector<double> prices)
    : asset_id_(std::move(asset_id)), dates_(std::move(dates)), prices_(std::move(prices)) {
    if (dates_.size() != prices_.size()) {
        throw std::invalid_argument("PriceSeries: dates and prices differ in length");
    }
    check_increasing(dates_);
    for (std::size_t i = 0; i < prices_.size(); ++i) {
        if (!(prices_[i] > 0.0) || !std::isfinite(prices_[i])) {
            throw std::invalid_argument("PriceSeries: non-positive price on " + format_date(dates_[i]));
        }
    }
}

std::vector<double> PriceSeries::log_prices() const {
    std::vector<double> out(prices_.size());
    std::transform(prices_.begin(), prices_.end(), out.begin(), [](double p) { return std::log(p); });
    return out;
}

ReturnSeries::ReturnSeries(std::string asset_id, std::vector<Date> dates, std::vector<double> values)
    : asset_id_(std::move(asset_id)), dates_(std::move(dates)), values_(std::move(values)) {
    if (dates_.size() != values_.size()) {
        throw std::invalid_argument("ReturnSeries: dates and values differ in length");
    }
    check_increasing(dates_);
}

ReturnSeries ReturnSeries::slice(std::size_t begin, std::size_t end) const {
    if (begin > end || end > values_.size()) {
        throw std::out_of_range("ReturnSeries::slice: bad range");
    }
    return ReturnSeries(asset_id_, std::vector<Date>(dates_.begin() + static_cast<std::ptrdiff_t>(begin),
                                                     dates_.begin() + static_cast<std::ptrdiff_t>(end)),
                        std::vector<double>(values_.begin() + static_cast<std::ptrdiff_t>(begin),
                                            values_.begin() + static_cast<std::ptrdiff_t>(end)));
}

PriceSeries load_price_csv(std::istream& source, std::string asset_id) {
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(source, line)) {
        throw ParseError("empty input, expected header 'date,price'", 1);
    }
    ++line_no;
    std::string_view header = trim(line);
    if (header.size() >= 3 && static_cast<unsigned char>(header[0]) == 0xEF &&
        static_cast<unsigned char>(header[1]) == 0xBB && static_cast<unsigned char>(header[2]) == 0xBF) {
        header.remove_prefix(3);
    }
    if (header != "date,price") {
        throw ParseError("expected header 'date,price', got '" + std::string(header) + "'", line_no);
    }

    struct Row {
        Date date;
        double price;
        std::size_t line;
    };
    std::vector<Row> rows;
    while (std::getline(source, line)) {
        ++line_no;
        const std::string_view text = trim(line);
        if (text.empty()) continue;
        const auto comma = text.find(',');
        if (comma == std::string_view::npos || text.find(',', comma + 1) != std::string_view::npos) {
            throw ParseError("expected two fields 'date,price'", line_no);
        }
        Date date;
        try {
            date = parse_date(text.substr(0, comma));
        } catch (const std::invalid_argument& e) {
            throw ParseError(e.what(), line_no);
        }
        const std::string_view price_text = trim(text.substr(comma + 1));
        if (price_text.empty()) continue;
        double price = 0.0;
        if (!parse_double(price_text, price) || !std::isfinite(price)) {
            throw ParseError("malformed price '" + std::string(price_text) + "'", line_no);
        }
        if (!(price > 0.0)) {
            throw ParseError("non-positive price " + std::string(price_text), line_no);
        }
        rows.push_back({date, price, line_no});
    }

    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.date < b.date; });
    std::vector<Date> dates;
    std::vector<double> prices;
    dates.reserve(rows.size());
    prices.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0 && rows[i].date == rows[i - 1].date) {
            const std::size_t where = std::max(rows[i].line, rows[i - 1].line);
            throw ParseError("duplicate date " + format_date(rows[i].date), where);
        }
        dates.push_back(rows[i].date);
        prices.push_back(rows[i].price);
    }
    return PriceSeries(std::move(asset_id), std::move(dates), std::move(prices));
}

PriceSeries load_price_file(const std::filesystem::path& path, std::string asset_id) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error(path.string() + ": cannot open file");
    }
    try {
        return load_price_csv(in, std::move(asset_id));
    } catch (const ParseError& e) {
        throw ParseError(path.string(), e);
    }
}

std::vector<PriceSeries> align(const std::vector<PriceSeries>& series) {
    if (series.size() < 2) {
        throw std::invalid_argument("align: need at least two series");
    }
    std::vector<Date> common = series.front().dates();
    for (std::size_t k = 1; k < series.size(); ++k) {
        std::vector<Date> next;
        const auto& d = series[k].dates();
        std::set_intersection(common.begin(), common.end(), d.begin(), d.end(), std::back_inserter(next));
        common = std::move(next);
    }
    if (common.empty()) {
        throw std::invalid_argument("align: date sets have an empty intersection");
    }
    std::vector<PriceSeries> out;
    out.reserve(series.size());
    for (const auto& s : series) {
        std::vector<double> prices;
        prices.reserve(common.size());
        std::size_t j = 0;
        for (const Date& d : common) {
            while (s.dates()[j] < d) ++j;
            prices.push_back(s.prices()[j]);
        }
        out.emplace_back(s.asset_id(), common, std::move(prices));
    }
    return out;
}

PriceSeries restrict_dates(const PriceSeries& p, Date first, Date last) {
    std::vector<Date> dates;
    std::vector<double> prices;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p.dates()[i] >= first && p.dates()[i] <= last) {
            dates.push_back(p.dates()[i]);
            prices.push_back(p.prices()[i]);
        }
    }
    return PriceSeries(p.asset_id(), std::move(dates), std::move(prices));
}

ReturnSeries log_returns(const PriceSeries& p) {
    if (p.size() < 2) {
        throw std::invalid_argument("log_returns: need at least two prices");
    }
    std::vector<Date> dates(p.dates().begin() + 1, p.dates().end());
    std::vector<double> values(p.size() - 1);
    for (std::size_t t = 1; t < p.size(); ++t) {
        values[t - 1] = std::log(p.prices()[t]) - std::log(p.prices()[t - 1]);
    }
    return ReturnSeries(p.asset_id(), std::move(dates), std::move(values));
}

DescriptiveStats describe(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 4) {
        throw std::invalid_argument("describe: need at least 4 observations");
    }
    const double dn = static_cast<double>(n);
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / dn;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : values) {
        const double d = x - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= dn;
    m3 /= dn;
    m4 /= dn;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (*lo == *hi || !(m2 > 0.0)) {
        throw std::invalid_argument("describe: zero variance, skewness and kurtosis undefined");
    }
    DescriptiveStats s;
    s.n = n;
    s.mean = mean;
    s.std_dev = std::sqrt(m2);
    s.skewness = m3 / std::pow(m2, 1.5);
    s.kurtosis = m4 / (m2 * m2);
    const double excess = s.kurtosis - 3.0;
    s.jarque_bera = dn / 6.0 * (s.skewness * s.skewness + excess * excess / 4.0);
    return s;
}

DescriptiveStats describe(const ReturnSeries& r) { return describe(std::span<const double>(r.values())); }

void write_returns_csv(std::ostream& out, const ReturnSeries& r) {
    out << "date,return\n";
    std::ostringstream line;
    line << std::setprecision(10);
    for (std::size_t i = 0; i < r.size(); ++i) {
        line.str({});
        line << format_date(r.dates()[i]) << ',' << r.values()[i] << '\n';
        out << line.str();
    }
}

} // namespace coinrisk::timeseries
