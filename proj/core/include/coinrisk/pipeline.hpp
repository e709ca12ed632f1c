#pragma once

#include "coinrisk/bubbles.hpp"
#include "coinrisk/copulas.hpp"
#include "coinrisk/garch.hpp"
#include "coinrisk/portfolio.hpp"
#include "coinrisk/timeseries.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace coinrisk::pipeline {

struct BubbleSettings {
    double r0 = 0.1;
    int lags = 1;
    std::size_t mc_reps = 2000;
    std::vector<double> quantiles = {0.90, 0.95, 0.99};
    bool trend = false;
    /// Assets to test; empty means every asset.
    std::vector<std::string> assets;
    /// Test log price levels, or the returns themselves.
    bool on_returns = false;
    std::size_t min_duration = 1;
};

/// Everything a run depends on besides the input files.
struct RunConfig {
    /// Asset id and price file, in the order given.
    std::vector<std::pair<std::string, std::filesystem::path>> assets;
    std::optional<timeseries::Date> first_date;
    std::optional<timeseries::Date> last_date;
    std::vector<garch::GarchSpec> garch_variants;
    BubbleSettings bubbles;
    std::vector<copulas::CopulaFamily> copula_families;
    std::vector<portfolio::PortfolioPair> copula_pairs;
    std::vector<portfolio::PortfolioPair> portfolio_pairs;
    double level = 0.99;
    bool in_sample = false;
    double estimation_fraction = 0.75;
    std::size_t var_draws = 10000;
    std::optional<std::uint64_t> seed;
    std::filesystem::path output_dir = "out";
};

/// Builds a config from a JSON document. Relative paths resolve against `base_dir`.
/// Throws std::invalid_argument for unknown keys or malformed values.
RunConfig parse_config(const nlohmann::ordered_json& doc, const std::filesystem::path& base_dir);
/// Reads and parses a config file; errors name the path.
RunConfig load_config(const std::filesystem::path& path);

/// Throws std::invalid_argument unless the seed is set, r0 is in (0, 0.5] and mc_reps >= 200.
void validate(const RunConfig& cfg);

/// Outcome of a command: the failing units, empty on full success.
struct Outcome {
    std::vector<std::string> failures;
    bool ok() const { return failures.empty(); }
};

/// Holds loaded data and intermediate results so `all` computes each stage once.
class Pipeline {
public:
    /// Validates the config; data is loaded lazily.
    explicit Pipeline(RunConfig cfg);

    Outcome describe();
    Outcome garch();
    Outcome bubbles();
    Outcome copulas();
    Outcome portfolio();
    /// Every stage in order.
    Outcome all();

    const RunConfig& config() const { return cfg_; }

private:
    void load();
    void ensure_garch(Outcome& out);
    void ensure_copulas(Outcome& out);
    std::filesystem::path output(const std::string& name) const;
    void write_text(const std::string& name, const std::string& text) const;

    RunConfig cfg_;
    bool loaded_ = false;
    std::vector<timeseries::PriceSeries> prices_;
    std::map<std::string, timeseries::ReturnSeries> returns_;
    std::map<std::string, garch::ModelSelection> garch_;
    std::map<std::string, std::string> garch_failures_;
    std::map<std::string, copulas::CopulaSelection> copulas_;
    std::map<std::string, std::string> copula_failures_;
};

} // namespace coinrisk::pipeline
