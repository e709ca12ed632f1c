#include "coinrisk/report.hpp"

#include <charconv>
#include <cmath>

namespace coinrisk::report {

namespace {

Json dates_json(const std::vector<timeseries::Date>& dates) {
    Json out = Json::array();
    for (const auto& d : dates) out.push_back(timeseries::format_date(d));
    return out;
}

Json fit_summary(const garch::GarchFit& fit) {
    return Json{{"variant", garch::to_string(fit.variant.tag)},
                {"loglik", fit.loglik},
                {"k", fit.k},
                {"aic", fit.aic},
                {"bic", fit.bic},
                {"hq", fit.hq},
                {"persistence", fit.persistence},
                {"converged", fit.converged}};
}

Json copula_summary(const copulas::CopulaFit& fit) {
    return Json{{"family", copulas::label(fit.family)},
                {"loglik", fit.loglik},
                {"k", fit.k},
                {"aic", fit.aic},
                {"lambda_L", fit.tail_dep.lower},
                {"lambda_U", fit.tail_dep.upper},
                {"at_boundary", fit.at_boundary},
                {"converged", fit.converged}};
}

} // namespace

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

Json to_json(const garch::GarchParams& p) {
    return Json{{"mean_const", p.mean_const}, {"ar1", p.ar1},           {"omega", p.omega},
                {"alpha", p.alpha},           {"beta", p.beta},         {"gamma", p.gamma},
                {"lambda_m", p.lambda_m},     {"phi_power", p.phi_power}};
}

Json to_json(const garch::GarchFit& fit) {
    Json j = fit_summary(fit);
    j["p"] = fit.variant.p;
    j["q"] = fit.variant.q;
    j["n_obs"] = fit.n_obs;
    j["params"] = to_json(fit.params);
    j["leverage"] = fit.params.gamma;
    j["explosive"] = fit.explosive;
    j["warnings"] = fit.warnings;
    j["cond_variance"] = fit.cond_variance;
    j["std_residuals"] = fit.std_residuals;
    return j;
}

Json to_json(const garch::ModelSelection& sel) {
    Json ranked = Json::array();
    for (const auto& fit : sel.ranked) ranked.push_back(fit_summary(fit));
    Json bic = Json::array(), hq = Json::array(), failures = Json::array();
    for (auto v : sel.bic_order) bic.push_back(garch::to_string(v));
    for (auto v : sel.hq_order) hq.push_back(garch::to_string(v));
    for (const auto& f : sel.failures) {
        failures.push_back(Json{{"variant", garch::to_string(f.variant.tag)}, {"message", f.message}});
    }
    Json j{{"ranked", ranked}, {"bic_order", bic}, {"hq_order", hq}, {"failures", failures}};
    if (!sel.ranked.empty()) j["selected"] = to_json(sel.ranked.front());
    return j;
}

Json to_json(const bubbles::BubbleReport& rep) {
    const auto& cv = rep.critical_values;
    Json episodes = Json::array();
    for (const auto& ep : rep.episodes) {
        Json e{{"start_index", ep.start_index}, {"end_index", ep.end_index}, {"peak_bsadf", ep.peak_bsadf}};
        if (!rep.bsadf_dates.empty()) {
            e["start_date"] = timeseries::format_date(rep.bsadf_dates[ep.start_index - rep.first_end]);
            e["end_date"] = timeseries::format_date(rep.bsadf_dates[ep.end_index - 1 - rep.first_end]);
        }
        episodes.push_back(e);
    }
    return Json{{"asset", rep.asset_id},
                {"sadf", rep.sadf_stat},
                {"gsadf", rep.gsadf_stat},
                {"r0", rep.r0},
                {"lags", rep.lags},
                {"trend", rep.trend},
                {"mc_reps", rep.mc_reps},
                {"seed", rep.seed},
                {"critical_values", Json{{"quantiles", cv.quantiles}, {"sadf", cv.sadf}, {"gsadf", cv.gsadf}}},
                {"episodes", episodes},
                {"first_end", rep.first_end},
                {"dates", dates_json(rep.bsadf_dates)},
                {"bsadf", rep.bsadf_sequence},
                {"cv95", rep.cv95_sequence},
                {"warnings", rep.warnings}};
}

Json to_json(const copulas::CopulaParams& p, const copulas::CopulaFamily& family) {
    using copulas::Family;
    Json j = Json::object();
    switch (family.tag) {
    case Family::Gaussian: j["rho"] = p.rho; break;
    case Family::StudentT:
        j["rho"] = p.rho;
        j["nu"] = p.nu;
        break;
    case Family::Plackett: j["pi"] = p.pi_plackett; break;
    case Family::Frank: j["lambda"] = p.lambda_frank; break;
    case Family::Gumbel:
    case Family::RotatedGumbel: j["delta"] = p.delta; break;
    case Family::Sjc:
        j["lambda_U"] = p.lam_u;
        j["lambda_L"] = p.lam_l;
        break;
    }
    if (family.time_varying) {
        j["psi"] = p.psi;
        if (family.tag == Family::Sjc) j["psi_lower"] = p.psi_lower;
    }
    return j;
}

Json to_json(const copulas::CopulaFit& fit) {
    Json j = copula_summary(fit);
    j["n_obs"] = fit.n_obs;
    j["time_varying"] = fit.family.time_varying;
    j["params"] = to_json(fit.params, fit.family);
    if (fit.family.time_varying) j["params"]["note"] = "static fields hold the initial lagged value";
    j["warnings"] = fit.warnings;
    j["param_path"] = fit.param_path;
    if (!fit.param_path_lower.empty()) j["param_path_lower"] = fit.param_path_lower;
    return j;
}

Json to_json(const copulas::CopulaSelection& sel) {
    Json ranked = Json::array(), failures = Json::array();
    for (const auto& fit : sel.ranked) ranked.push_back(copula_summary(fit));
    for (const auto& f : sel.failures) {
        failures.push_back(Json{{"family", copulas::label(f.family)}, {"message", f.message}});
    }
    Json j{{"ranked", ranked}, {"failures", failures}};
    if (!sel.ranked.empty()) j["selected"] = to_json(sel.ranked.front());
    return j;
}

Json to_json(const portfolio::PortfolioReport& rep) {
    const auto& cc = rep.cc_test;
    return Json{{"comparison", rep.comparison},
                {"crypto", rep.crypto_id},
                {"asset", rep.asset_id},
                {"crypto_model", garch::to_string(rep.crypto_model)},
                {"asset_model", garch::to_string(rep.asset_model)},
                {"copula", copulas::label(rep.copula)},
                {"level", rep.level},
                {"in_sample", rep.in_sample},
                {"n_estimation", rep.n_estimation},
                {"n_evaluation", rep.n_evaluation},
                {"risk_reduction", rep.risk_reduction},
                {"riskier", rep.riskier},
                {"mean_variance", rep.mean_variance},
                {"benchmark_mean_variance", rep.benchmark_mean_variance},
                {"cc_test",
                 Json{{"lr_uc", cc.lr_uc},
                      {"lr_ind", cc.lr_ind},
                      {"lr_stat", cc.lr_stat},
                      {"p_value", cc.p_value},
                      {"n", cc.n},
                      {"exceedances", cc.exceedances},
                      {"degenerate", cc.degenerate}}},
                {"degenerate_weights", rep.degenerate_weights},
                {"warnings", rep.warnings},
                {"dates", dates_json(rep.dates)},
                {"weight_path", rep.weight_path},
                {"variance_path", rep.variance_path},
                {"benchmark_variance_path", rep.benchmark_variance_path},
                {"var_path", rep.var_path},
                {"exceedance_flags", rep.exceedance_flags}};
}

void write_describe_csv(std::ostream& out, const std::vector<std::string>& assets,
                        const std::vector<timeseries::DescriptiveStats>& stats) {
    out << "statistic";
    for (const auto& a : assets) out << ',' << a;
    out << '\n';
    struct Row {
        const char* name;
        double timeseries::DescriptiveStats::*field;
    };
    static constexpr Row rows[] = {{"Mean", &timeseries::DescriptiveStats::mean},
                                   {"Std. Dev.", &timeseries::DescriptiveStats::std_dev},
                                   {"Skewness", &timeseries::DescriptiveStats::skewness},
                                   {"Kurtosis", &timeseries::DescriptiveStats::kurtosis},
                                   {"Jarque Bera", &timeseries::DescriptiveStats::jarque_bera}};
    for (const auto& row : rows) {
        out << row.name;
        for (const auto& s : stats) out << ',' << format_number(s.*row.field);
        out << '\n';
    }
}

void write_garch_ic_csv(std::ostream& out, const garch::ModelSelection& sel) {
    out << "variant,loglik,k,aic,bic,hq,persistence,converged\n";
    for (const auto& f : sel.ranked) {
        out << garch::to_string(f.variant.tag) << ',' << format_number(f.loglik) << ',' << f.k << ','
            << format_number(f.aic) << ',' << format_number(f.bic) << ',' << format_number(f.hq) << ','
            << format_number(f.persistence) << ',' << (f.converged ? "true" : "false") << '\n';
    }
    for (const auto& f : sel.failures) out << garch::to_string(f.variant.tag) << ",,,,,,,\n";
}

void write_garch_coef_csv(std::ostream& out, const garch::GarchFit& fit) {
    const auto& p = fit.params;
    auto sum = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    };
    out << "coefficient,value\n";
    out << "C," << format_number(p.mean_const) << '\n';
    out << "r_{t-1}," << format_number(p.ar1) << '\n';
    out << "omega," << format_number(p.omega) << '\n';
    out << "alpha," << format_number(sum(p.alpha)) << '\n';
    out << "beta," << format_number(sum(p.beta)) << '\n';
    out << "gamma," << format_number(p.gamma) << '\n';
    out << "persistence," << format_number(fit.persistence) << '\n';
    out << "leverage," << format_number(p.gamma) << '\n';
}

void write_bubbles_summary_csv(std::ostream& out, const std::vector<bubbles::BubbleReport>& reports) {
    out << "asset,statistic,value";
    std::vector<double> qs;
    if (!reports.empty()) qs = reports.front().critical_values.quantiles;
    for (double q : qs) out << ",cv" << format_number(q * 100.0);
    out << ",episodes\n";
    for (const auto& r : reports) {
        const auto& cv = r.critical_values;
        out << r.asset_id << ",SADF," << format_number(r.sadf_stat);
        for (double c : cv.sadf) out << ',' << format_number(c);
        out << ',' << r.episodes.size() << '\n';
        out << r.asset_id << ",GSADF," << format_number(r.gsadf_stat);
        for (double c : cv.gsadf) out << ',' << format_number(c);
        out << ',' << r.episodes.size() << '\n';
    }
}

void write_bsadf_csv(std::ostream& out, const bubbles::BubbleReport& rep) {
    out << "index,date,bsadf,cv95\n";
    for (std::size_t k = 0; k < rep.bsadf_sequence.size(); ++k) {
        out << rep.first_end + k << ',';
        if (k < rep.bsadf_dates.size()) out << timeseries::format_date(rep.bsadf_dates[k]);
        out << ',' << format_number(rep.bsadf_sequence[k]) << ',' << format_number(rep.cv95_sequence[k]) << '\n';
    }
}

void write_copula_sweep_csv(std::ostream& out, const copulas::CopulaSelection& sel) {
    out << "family,loglik,k,aic,lambda_L,lambda_U\n";
    for (const auto& f : sel.ranked) {
        out << copulas::label(f.family) << ',' << format_number(f.loglik) << ',' << f.k << ','
            << format_number(f.aic) << ',' << format_number(f.tail_dep.lower) << ','
            << format_number(f.tail_dep.upper) << '\n';
    }
    for (const auto& f : sel.failures) out << copulas::label(f.family) << ",,,,,\n";
}

void write_param_path_csv(std::ostream& out, const copulas::CopulaFit& fit, const std::vector<timeseries::Date>& dates) {
    using copulas::Family;
    const bool sjc = fit.family.tag == Family::Sjc;
    out << (sjc ? "date,param_t,param_lower_t\n" : "date,param_t\n");
    double constant = 0.0, constant_lower = fit.params.lam_l;
    switch (fit.family.tag) {
    case Family::Gaussian:
    case Family::StudentT: constant = fit.params.rho; break;
    case Family::Plackett: constant = fit.params.pi_plackett; break;
    case Family::Frank: constant = fit.params.lambda_frank; break;
    case Family::Gumbel:
    case Family::RotatedGumbel: constant = fit.params.delta; break;
    case Family::Sjc: constant = fit.params.lam_u; break;
    }
    for (std::size_t t = 0; t < dates.size(); ++t) {
        const double value = fit.family.time_varying ? fit.param_path.at(t) : constant;
        out << timeseries::format_date(dates[t]) << ',' << format_number(value);
        if (sjc) out << ',' << format_number(fit.family.time_varying ? fit.param_path_lower.at(t) : constant_lower);
        out << '\n';
    }
}

void write_portfolio_summary_csv(std::ostream& out, const std::vector<portfolio::PortfolioReport>& reports) {
    out << "comparison,risk_reduction,cc_pvalue\n";
    for (const auto& r : reports) {
        out << r.comparison << ',' << format_number(r.risk_reduction) << ',' << format_number(r.cc_test.p_value) << '\n';
    }
}

} // namespace coinrisk::report
