#include "coinrisk/pipeline.hpp"

#include "coinrisk/report.hpp"
#include "coinrisk/rng.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace coinrisk::pipeline {

namespace {

using Json = nlohmann::ordered_json;

void check_keys(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw std::invalid_argument(where + ": expected an object");
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.contains(key)) throw std::invalid_argument(where + ": unknown key '" + key + "'");
    }
}

template <typename T>
T get(const Json& obj, const std::string& key, const std::string& where) {
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(where + "." + key + ": " + e.what());
    }
}

std::vector<portfolio::PortfolioPair> parse_pairs(const Json& arr, const std::string& where) {
    if (!arr.is_array()) throw std::invalid_argument(where + ": expected an array of [crypto, asset] pairs");
    std::vector<portfolio::PortfolioPair> out;
    for (const auto& item : arr) {
        if (!item.is_array() || item.size() != 2 || !item[0].is_string() || !item[1].is_string()) {
            throw std::invalid_argument(where + ": each pair must be [crypto, asset]");
        }
        out.push_back({item[0].get<std::string>(), item[1].get<std::string>()});
    }
    return out;
}

std::string file_stem(const portfolio::PortfolioPair& p) { return p.crypto + "_" + p.asset; }

} // namespace

RunConfig parse_config(const Json& doc, const std::filesystem::path& base_dir) {
    check_keys(doc, {"assets", "date_range", "garch", "bubbles", "copulas", "portfolio", "seed", "output_dir"}, "config");
    RunConfig cfg;
    const Json& assets = doc.at("assets");
    if (!assets.is_object() || assets.empty()) throw std::invalid_argument("config.assets: expected a non-empty object");
    for (const auto& [id, path] : assets.items()) {
        if (!path.is_string()) throw std::invalid_argument("config.assets." + id + ": expected a file path");
        std::filesystem::path p = path.get<std::string>();
        cfg.assets.emplace_back(id, p.is_absolute() ? p : base_dir / p);
    }
    if (doc.contains("date_range")) {
        const Json& dr = doc["date_range"];
        check_keys(dr, {"start", "end"}, "config.date_range");
        if (dr.contains("start")) cfg.first_date = timeseries::parse_date(get<std::string>(dr, "start", "config.date_range"));
        if (dr.contains("end")) cfg.last_date = timeseries::parse_date(get<std::string>(dr, "end", "config.date_range"));
    }
    if (doc.contains("garch")) {
        const Json& g = doc["garch"];
        check_keys(g, {"variants"}, "config.garch");
        for (const auto& tag : get<std::vector<std::string>>(g, "variants", "config.garch")) {
            cfg.garch_variants.push_back({garch::variant_from_string(tag), 1, 1});
        }
    }
    if (cfg.garch_variants.empty()) {
        for (auto v : garch::kAllVariants) cfg.garch_variants.push_back({v, 1, 1});
    }
    if (doc.contains("bubbles")) {
        const Json& b = doc["bubbles"];
        const std::string w = "config.bubbles";
        check_keys(b, {"r0", "lags", "mc_reps", "quantiles", "trend", "assets", "mode", "min_duration"}, w);
        auto& s = cfg.bubbles;
        if (b.contains("r0")) s.r0 = get<double>(b, "r0", w);
        if (b.contains("lags")) s.lags = get<int>(b, "lags", w);
        if (b.contains("mc_reps")) s.mc_reps = get<std::size_t>(b, "mc_reps", w);
        if (b.contains("quantiles")) s.quantiles = get<std::vector<double>>(b, "quantiles", w);
        if (b.contains("trend")) s.trend = get<bool>(b, "trend", w);
        if (b.contains("assets")) s.assets = get<std::vector<std::string>>(b, "assets", w);
        if (b.contains("min_duration")) s.min_duration = get<std::size_t>(b, "min_duration", w);
        if (b.contains("mode")) {
            const auto mode = get<std::string>(b, "mode", w);
            if (mode != "levels" && mode != "returns") throw std::invalid_argument(w + ".mode: expected levels or returns");
            s.on_returns = mode == "returns";
        }
    }
    if (doc.contains("copulas")) {
        const Json& c = doc["copulas"];
        check_keys(c, {"families", "pairs"}, "config.copulas");
        if (c.contains("families") && !(c["families"].is_string() && c["families"] == "all")) {
            for (const auto& f : get<std::vector<std::string>>(c, "families", "config.copulas")) {
                cfg.copula_families.push_back(copulas::family_from_label(f));
            }
        }
        if (c.contains("pairs")) cfg.copula_pairs = parse_pairs(c["pairs"], "config.copulas.pairs");
    }
    if (cfg.copula_families.empty()) cfg.copula_families = copulas::all_families();
    if (cfg.copula_pairs.empty()) cfg.copula_pairs = portfolio::default_design();
    if (doc.contains("portfolio")) {
        const Json& p = doc["portfolio"];
        const std::string w = "config.portfolio";
        check_keys(p, {"pairs", "level", "in_sample", "estimation_fraction", "var_draws"}, w);
        if (p.contains("pairs")) cfg.portfolio_pairs = parse_pairs(p["pairs"], w + ".pairs");
        if (p.contains("level")) cfg.level = get<double>(p, "level", w);
        if (p.contains("in_sample")) cfg.in_sample = get<bool>(p, "in_sample", w);
        if (p.contains("estimation_fraction")) cfg.estimation_fraction = get<double>(p, "estimation_fraction", w);
        if (p.contains("var_draws")) cfg.var_draws = get<std::size_t>(p, "var_draws", w);
    }
    if (cfg.portfolio_pairs.empty()) cfg.portfolio_pairs = portfolio::default_design();
    if (doc.contains("seed")) cfg.seed = get<std::uint64_t>(doc, "seed", "config");
    if (doc.contains("output_dir")) {
        std::filesystem::path out = get<std::string>(doc, "output_dir", "config");
        cfg.output_dir = out.is_absolute() ? out : base_dir / out;
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path.string() + ": cannot open config file");
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
    try {
        return parse_config(doc, path.parent_path());
    } catch (const std::exception& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
}

void validate(const RunConfig& cfg) {
    if (!cfg.seed) throw std::invalid_argument("config: a seed is required");
    if (!(cfg.bubbles.r0 > 0.0 && cfg.bubbles.r0 <= 0.5)) throw std::invalid_argument("config: r0 must lie in (0, 0.5]");
    if (cfg.bubbles.mc_reps < 200) throw std::invalid_argument("config: mc_reps must be at least 200");
    if (cfg.assets.empty()) throw std::invalid_argument("config: no assets");
    if (!(cfg.level > 0.5 && cfg.level < 1.0)) throw std::invalid_argument("config: level must lie in (0.5, 1)");
}

Pipeline::Pipeline(RunConfig cfg) : cfg_(std::move(cfg)) { validate(cfg_); }

void Pipeline::load() {
    if (loaded_) return;
    for (const auto& [id, path] : cfg_.assets) {
        timeseries::PriceSeries p = timeseries::load_price_file(path, id);
        if (cfg_.first_date || cfg_.last_date) {
            p = timeseries::restrict_dates(p, cfg_.first_date.value_or(timeseries::Date{std::chrono::year::min(), std::chrono::January, std::chrono::day{1}}),
                                           cfg_.last_date.value_or(timeseries::Date{std::chrono::year::max(), std::chrono::December, std::chrono::day{31}}));
        }
        prices_.push_back(std::move(p));
    }
    const std::vector<timeseries::PriceSeries> aligned =
        prices_.size() >= 2 ? timeseries::align(prices_) : prices_;
    for (const auto& p : aligned) returns_.emplace(p.asset_id(), timeseries::log_returns(p));
    std::filesystem::create_directories(cfg_.output_dir);
    loaded_ = true;
}

std::filesystem::path Pipeline::output(const std::string& name) const { return cfg_.output_dir / name; }

void Pipeline::write_text(const std::string& name, const std::string& text) const {
    std::ofstream out(output(name), std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(output(name).string() + ": cannot write");
    out << text;
}

Outcome Pipeline::describe() {
    load();
    std::vector<std::string> ids;
    std::vector<timeseries::DescriptiveStats> stats;
    Outcome out;
    for (const auto& [id, _] : cfg_.assets) {
        const auto& r = returns_.at(id);
        try {
            stats.push_back(timeseries::describe(r));
            ids.push_back(id);
        } catch (const std::exception& e) {
            out.failures.push_back("describe " + id + ": " + e.what());
        }
        std::ostringstream csv;
        timeseries::write_returns_csv(csv, r);
        write_text("returns_" + id + ".csv", csv.str());
    }
    std::ostringstream csv;
    report::write_describe_csv(csv, ids, stats);
    write_text("describe.csv", csv.str());
    return out;
}

void Pipeline::ensure_garch(Outcome& out) {
    load();
    for (const auto& [id, _] : cfg_.assets) {
        if (garch_.contains(id) || garch_failures_.contains(id)) continue;
        try {
            garch_.emplace(id, garch::select_model(returns_.at(id).values(), cfg_.garch_variants));
        } catch (const std::exception& e) {
            garch_failures_.emplace(id, e.what());
        }
    }
    for (const auto& [id, msg] : garch_failures_) out.failures.push_back("garch " + id + ": " + msg);
}

Outcome Pipeline::garch() {
    Outcome out;
    ensure_garch(out);
    for (const auto& [id, sel] : garch_) {
        std::ostringstream ic, coef;
        report::write_garch_ic_csv(ic, sel);
        report::write_garch_coef_csv(coef, sel.ranked.front());
        write_text("garch_" + id + "_ic.csv", ic.str());
        write_text("garch_" + id + "_coef.csv", coef.str());
        write_text("garch_" + id + ".json", report::to_json(sel).dump(2) + "\n");
        for (const auto& f : sel.failures) {
            out.failures.push_back("garch " + id + " " + std::string(garch::to_string(f.variant.tag)) + ": " + f.message);
        }
    }
    return out;
}

Outcome Pipeline::bubbles() {
    load();
    Outcome out;
    const auto& s = cfg_.bubbles;
    bubbles::BubbleConfig bc;
    bc.r0 = s.r0;
    bc.adf = {s.lags, s.trend};
    bc.mc_reps = s.mc_reps;
    bc.quantiles = s.quantiles;
    bc.seed = derive_seed(*cfg_.seed, "bubbles");
    bc.min_duration = s.min_duration;

    std::vector<std::string> targets = s.assets;
    if (targets.empty()) {
        for (const auto& [id, _] : cfg_.assets) targets.push_back(id);
    }
    // Critical values depend only on the sample length, so assets of equal length share them.
    std::map<std::size_t, bubbles::CriticalValues> cv_cache;
    std::vector<bubbles::BubbleReport> reports;
    for (const auto& id : targets) {
        try {
            const auto it = std::find_if(prices_.begin(), prices_.end(),
                                         [&](const timeseries::PriceSeries& p) { return p.asset_id() == id; });
            if (it == prices_.end()) throw std::invalid_argument("not a configured asset");
            const std::size_t T = s.on_returns ? returns_.at(id).size() : it->size();
            if (!cv_cache.contains(T)) {
                cv_cache.emplace(T, bubbles::mc_critical_values(T, bc.r0, bc.adf, bc.mc_reps,
                                                                bubbles::effective_quantiles(bc), bc.seed));
            }
            const auto* cv = &cv_cache.at(T);
            reports.push_back(s.on_returns ? bubbles::run_bubble_test(returns_.at(id), bc, cv)
                                           : bubbles::run_bubble_test(*it, bc, cv));
            std::ostringstream csv;
            report::write_bsadf_csv(csv, reports.back());
            write_text("bubbles_" + id + "_bsadf.csv", csv.str());
            write_text("bubbles_" + id + ".json", report::to_json(reports.back()).dump(2) + "\n");
        } catch (const std::exception& e) {
            out.failures.push_back("bubbles " + id + ": " + e.what());
        }
    }
    std::ostringstream csv;
    report::write_bubbles_summary_csv(csv, reports);
    write_text("bubbles_summary.csv", csv.str());
    return out;
}

void Pipeline::ensure_copulas(Outcome& out) {
    ensure_garch(out);
    std::vector<portfolio::PortfolioPair> pairs = cfg_.copula_pairs;
    for (const auto& p : cfg_.portfolio_pairs) {
        const bool known = std::any_of(pairs.begin(), pairs.end(),
                                       [&](const auto& q) { return portfolio::pair_key(q) == portfolio::pair_key(p); });
        if (!known) pairs.push_back(p);
    }
    for (const auto& pair : pairs) {
        const std::string key = portfolio::pair_key(pair);
        if (copulas_.contains(key) || copula_failures_.contains(key)) continue;
        try {
            if (!garch_.contains(pair.crypto) || !garch_.contains(pair.asset)) {
                throw std::runtime_error("no GARCH fit for one of the assets");
            }
            const auto& fa = garch_.at(pair.crypto).ranked.front();
            const auto& fb = garch_.at(pair.asset).ranked.front();
            copulas::UniformPair up;
            up.u = copulas::pit_transform(fa.std_residuals);
            up.v = copulas::pit_transform(fb.std_residuals);
            up.dates = returns_.at(pair.crypto).dates();
            copulas_.emplace(key, copulas::select_copula(up, cfg_.copula_families));
        } catch (const std::exception& e) {
            copula_failures_.emplace(key, e.what());
        }
    }
}

Outcome Pipeline::copulas() {
    Outcome out;
    ensure_copulas(out);
    for (const auto& pair : cfg_.copula_pairs) {
        const std::string key = portfolio::pair_key(pair);
        if (copula_failures_.contains(key)) {
            out.failures.push_back("copulas " + key + ": " + copula_failures_.at(key));
            continue;
        }
        const auto& sel = copulas_.at(key);
        const std::string stem = "copula_" + file_stem(pair);
        std::ostringstream sweep, path;
        report::write_copula_sweep_csv(sweep, sel);
        report::write_param_path_csv(path, sel.ranked.front(), returns_.at(pair.crypto).dates());
        write_text(stem + ".json", report::to_json(sel).dump(2) + "\n");
        write_text(stem + "_sweep.csv", sweep.str());
        write_text(stem + "_path.csv", path.str());
        for (const auto& f : sel.failures) {
            out.failures.push_back("copulas " + key + " " + copulas::label(f.family) + ": " + f.message);
        }
    }
    return out;
}

Outcome Pipeline::portfolio() {
    Outcome out;
    ensure_copulas(out);
    portfolio::PortfolioConfig pc;
    pc.level = cfg_.level;
    pc.in_sample = cfg_.in_sample;
    pc.estimation_fraction = cfg_.estimation_fraction;
    pc.var_draws = cfg_.var_draws;
    const std::uint64_t stage_seed = derive_seed(*cfg_.seed, "portfolio");

    std::vector<portfolio::PortfolioReport> reports;
    for (std::size_t k = 0; k < cfg_.portfolio_pairs.size(); ++k) {
        const auto& pair = cfg_.portfolio_pairs[k];
        const std::string key = portfolio::pair_key(pair);
        try {
            if (!copulas_.contains(key)) throw std::runtime_error("no copula fit for the pair");
            pc.seed = mix64(stage_seed + k);
            reports.push_back(portfolio::evaluate_pair(returns_.at(pair.crypto), returns_.at(pair.asset),
                                                       garch_.at(pair.crypto).ranked.front().variant,
                                                       garch_.at(pair.asset).ranked.front().variant,
                                                       copulas_.at(key).ranked.front().family, pc));
            write_text("portfolio_" + file_stem(pair) + ".json", report::to_json(reports.back()).dump(2) + "\n");
        } catch (const std::exception& e) {
            out.failures.push_back("portfolio " + key + ": " + e.what());
        }
    }
    std::ostringstream csv;
    report::write_portfolio_summary_csv(csv, reports);
    write_text("portfolio_summary.csv", csv.str());
    return out;
}

Outcome Pipeline::all() {
    Outcome out;
    for (auto stage : {&Pipeline::describe, &Pipeline::garch, &Pipeline::bubbles, &Pipeline::copulas,
                       &Pipeline::portfolio}) {
        Outcome part = (this->*stage)();
        for (auto& f : part.failures) {
            if (std::find(out.failures.begin(), out.failures.end(), f) == out.failures.end()) {
                out.failures.push_back(std::move(f));
            }
        }
    }
    return out;
}

} // namespace coinrisk::pipeline
