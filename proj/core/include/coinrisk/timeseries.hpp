#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace coinrisk::timeseries {

/// Calendar day, no timezone.
using Date = std::chrono::year_month_day;

/// Parse an ISO-8601 calendar date (YYYY-MM-DD). Throws std::invalid_argument.
Date parse_date(std::string_view text);
std::string format_date(Date d);

/// Dated price levels. Dates strictly increase; every price is positive.
class PriceSeries {
public:
    PriceSeries() = default;
    /// Validates the invariants; throws std::invalid_argument on violation.
    PriceSeries(std::string asset_id, std::vector<Date> dates, std::vector<double> prices);

    const std::string& asset_id() const noexcept { return asset_id_; }
    const std::vector<Date>& dates() const noexcept { return dates_; }
    const std::vector<double>& prices() const noexcept { return prices_; }
    std::size_t size() const noexcept { return prices_.size(); }
    bool empty() const noexcept { return prices_.empty(); }

    /// Natural logs of the price levels.
    std::vector<double> log_prices() const;

    friend bool operator==(const PriceSeries&, const PriceSeries&) = default;

private:
    std::string asset_id_;
    std::vector<Date> dates_;
    std::vector<double> prices_;
};

/// Dated log returns; each return is dated at the later of its two prices.
class ReturnSeries {
public:
    ReturnSeries() = default;
    ReturnSeries(std::string asset_id, std::vector<Date> dates, std::vector<double> values);

    const std::string& asset_id() const noexcept { return asset_id_; }
    const std::vector<Date>& dates() const noexcept { return dates_; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }

    /// Observations [begin, end).
    ReturnSeries slice(std::size_t begin, std::size_t end) const;

    friend bool operator==(const ReturnSeries&, const ReturnSeries&) = default;

private:
    std::string asset_id_;
    std::vector<Date> dates_;
    std::vector<double> values_;
};

struct DescriptiveStats {
    std::size_t n = 0;
    double mean = 0.0;
    double std_dev = 0.0;
    double skewness = 0.0;
    /// Non-excess: 3 for a normal law.
    double kurtosis = 0.0;
    double jarque_bera = 0.0;
};

/// Read a `date,price` CSV. Rows with an empty price are skipped; output is
/// sorted by date. Throws coinrisk::ParseError (with line number) on malformed
/// rows, non-positive prices and duplicate dates.
PriceSeries load_price_csv(std::istream& source, std::string asset_id);

/// Same, from a file. Errors carry the path.
PriceSeries load_price_file(const std::filesystem::path& path, std::string asset_id);

/// Restrict every series to the dates common to all of them.
/// Throws std::invalid_argument for fewer than two series or an empty intersection.
std::vector<PriceSeries> align(const std::vector<PriceSeries>& series);

/// Keep observations with first <= date <= last.
PriceSeries restrict_dates(const PriceSeries& p, Date first, Date last);

/// r_t = ln(p_t) - ln(p_{t-1}). Throws std::invalid_argument below two prices.
ReturnSeries log_returns(const PriceSeries& p);

/// Population-moment skewness/kurtosis and the Jarque–Bera statistic
/// (n/6)(S^2 + (K-3)^2/4). Throws std::invalid_argument for n < 4 or zero variance.
DescriptiveStats describe(std::span<const double> values);
DescriptiveStats describe(const ReturnSeries& r);

/// `date,return` with 10 significant digits.
void write_returns_csv(std::ostream& out, const ReturnSeries& r);

} // namespace coinrisk::timeseries
