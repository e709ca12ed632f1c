#pragma once

#include "coinrisk/bubbles.hpp"
#include "coinrisk/copulas.hpp"
#include "coinrisk/garch.hpp"
#include "coinrisk/portfolio.hpp"
#include "coinrisk/timeseries.hpp"

#include <nlohmann/json.hpp>

#include <ostream>
#include <string>
#include <vector>

namespace coinrisk::report {

using Json = nlohmann::ordered_json;

/// Shortest round-trip decimal form; "nan" / "inf" / "-inf" for non-finite values.
std::string format_number(double x);

Json to_json(const garch::GarchParams& p);
Json to_json(const garch::GarchFit& fit);
/// Ranked fits without their per-observation paths, plus the winner in full.
Json to_json(const garch::ModelSelection& sel);
Json to_json(const bubbles::BubbleReport& rep);
Json to_json(const copulas::CopulaParams& p, const copulas::CopulaFamily& family);
Json to_json(const copulas::CopulaFit& fit);
Json to_json(const copulas::CopulaSelection& sel);
Json to_json(const portfolio::PortfolioReport& rep);

/// Row per statistic (Mean, Std. Dev., Skewness, Kurtosis, Jarque Bera), column per asset.
void write_describe_csv(std::ostream& out, const std::vector<std::string>& assets,
                        const std::vector<timeseries::DescriptiveStats>& stats);
/// variant,loglik,k,aic,bic,hq,persistence,converged, in AIC order; failures listed with empty values.
void write_garch_ic_csv(std::ostream& out, const garch::ModelSelection& sel);
/// coefficient,value for C, r_{t-1}, omega, alpha, beta, gamma, persistence, leverage.
void write_garch_coef_csv(std::ostream& out, const garch::GarchFit& fit);
/// One row per asset with SADF, GSADF, their critical values and the episode count.
void write_bubbles_summary_csv(std::ostream& out, const std::vector<bubbles::BubbleReport>& reports);
/// index,date,bsadf,cv95.
void write_bsadf_csv(std::ostream& out, const bubbles::BubbleReport& rep);
/// family,loglik,k,aic,lambda_L,lambda_U in AIC order.
void write_copula_sweep_csv(std::ostream& out, const copulas::CopulaSelection& sel);
/// date,param_t (and param_lower_t for SJC). Static fits repeat the constant parameter.
void write_param_path_csv(std::ostream& out, const copulas::CopulaFit& fit, const std::vector<timeseries::Date>& dates);
/// comparison,risk_reduction,cc_pvalue.
void write_portfolio_summary_csv(std::ostream& out, const std::vector<portfolio::PortfolioReport>& reports);

} // namespace coinrisk::report
