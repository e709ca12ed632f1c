#include "coinrisk/copulas.hpp"

#include "coinrisk/error.hpp"
#include "coinrisk/optimize.hpp"
#include "coinrisk/rng.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

namespace coinrisk::copulas {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;
constexpr std::array<double, 10> kNuGrid = {2.5, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 15.0, 20.0, 30.0};
constexpr std::size_t kEvolutionLags = 10;
constexpr double kTailFloor = 1e-6;
constexpr double kRhoCap = 1.0 - 1e-9;

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
double norm_quantile(double p) { return boost::math::quantile(boost::math::normal_distribution<double>(), p); }
double t_cdf(double x, double nu) { return boost::math::cdf(boost::math::students_t_distribution<double>(nu), x); }
double t_quantile(double p, double nu) {
    return boost::math::quantile(boost::math::students_t_distribution<double>(nu), p);
}

double logistic01(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
double softplus_inv(double y) { return y > 30.0 ? y : std::log(std::expm1(y)); }
double tail_from_logit(double x) { return kTailFloor + (1.0 - 2.0 * kTailFloor) * logistic01(x); }
double logit_from_tail(double t) {
    const double s = (t - kTailFloor) / (1.0 - 2.0 * kTailFloor);
    return std::log(s / (1.0 - s));
}

double log_add(double a, double b) {
    if (a == -kInf) return b;
    if (b == -kInf) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

/// Genz's algorithm for P(X > dh, Y > dk) under a standard bivariate normal.
double bvnu(double dh, double dk, double r) {
    if (r == 0.0) return norm_cdf(-dh) * norm_cdf(-dk);
    static constexpr double w6[3] = {0.1713244923791705, 0.3607615730481384, 0.4679139345726904};
    static constexpr double x6[3] = {0.9324695142031522, 0.6612093864662647, 0.2386191860831970};
    static constexpr double w12[6] = {.04717533638651177, 0.1069393259953183, 0.1600783285433464,
                                      0.2031674267230659,  0.2334925365383547, 0.2491470458134029};
    static constexpr double x12[6] = {0.9815606342467191, 0.9041172563704750, 0.7699026741943050,
                                      0.5873179542866171, 0.3678314989981802, 0.1252334085114692};
    static constexpr double w20[10] = {.01761400713915212, .04060142980038694, .06267204833410906,
                                       .08327674157670475, 0.1019301198172404,  0.1181945319615184,
                                       0.1316886384491766, 0.1420961093183821,  0.1491729864726037,
                                       0.1527533871307259};
    static constexpr double x20[10] = {0.9931285991850949, 0.9639719272779138, 0.9122344282513259,
                                       0.8391169718222188, 0.7463319064601508, 0.6360536807265150,
                                       0.5108670019508271, 0.3737060887154196, 0.2277858511416451,
                                       0.07652652113349733};
    const double* w;
    const double* x;
    int ng;
    if (std::abs(r) < 0.3) {
        w = w6, x = x6, ng = 3;
    } else if (std::abs(r) < 0.75) {
        w = w12, x = x12, ng = 6;
    } else {
        w = w20, x = x20, ng = 10;
    }
    const double tp = 2.0 * kPi;
    double h = dh, k = dk, hk = h * k, bvn = 0.0;
    if (std::abs(r) < 0.925) {
        const double hs = (h * h + k * k) / 2.0;
        const double asr = std::asin(r) / 2.0;
        for (int i = 0; i < ng; ++i) {
            for (double sgn : {-1.0, 1.0}) {
                const double sn = std::sin(asr * (1.0 + sgn * x[i]));
                bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
            }
        }
        bvn = bvn * asr / tp + norm_cdf(-h) * norm_cdf(-k);
    } else {
        if (r < 0.0) {
            k = -k;
            hk = -hk;
        }
        if (std::abs(r) < 1.0) {
            const double as = 1.0 - r * r;
            double a = std::sqrt(as);
            const double bs = (h - k) * (h - k);
            double asr = -(bs / as + hk) / 2.0;
            const double c = (4.0 - hk) / 8.0;
            const double d = (12.0 - hk) / 80.0;
            if (asr > -100.0) {
                bvn = a * std::exp(asr) * (1.0 - c * (bs - as) * (1.0 - d * bs) / 5.0 + c * d * as * as / 5.0);
            }
            if (hk > -100.0) {
                const double b = std::sqrt(bs);
                const double sp = std::sqrt(tp) * norm_cdf(-b / a);
                bvn -= std::exp(-hk / 2.0) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 5.0);
            }
            a /= 2.0;
            double sum = 0.0;
            for (int i = 0; i < ng; ++i) {
                for (double sgn : {-1.0, 1.0}) {
                    const double xs = std::pow(a * (1.0 + sgn * x[i]), 2);
                    asr = -(bs / xs + hk) / 2.0;
                    if (asr > -100.0) {
                        const double sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
                        const double rs = std::sqrt(1.0 - xs);
                        const double ep = std::exp(-(hk / 2.0) * xs / ((1.0 + rs) * (1.0 + rs))) / rs;
                        sum += w[i] * std::exp(asr) * (sp - ep);
                    }
                }
            }
            bvn = (a * sum - bvn) / tp;
        }
        if (r > 0.0) {
            bvn += norm_cdf(-std::max(h, k));
        } else if (h >= k) {
            bvn = -bvn;
        } else {
            const double L = h < 0.0 ? norm_cdf(k) - norm_cdf(h) : norm_cdf(-h) - norm_cdf(-k);
            bvn = L - bvn;
        }
    }
    return std::clamp(bvn, 0.0, 1.0);
}

double t_log_const(double nu) {
    return std::lgamma((nu + 2.0) / 2.0) + std::lgamma(nu / 2.0) - 2.0 * std::lgamma((nu + 1.0) / 2.0);
}

// ---- log-density kernels on pre-transformed inputs -------------------------

double gauss_ld(double rho, double x, double y) {
    const double one_m = 1.0 - rho * rho;
    return -0.5 * std::log(one_m) - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * one_m);
}

double t_ld(double rho, double nu, double x, double y, double lconst) {
    const double one_m = 1.0 - rho * rho;
    const double q = (x * x + y * y - 2.0 * rho * x * y) / (nu * one_m);
    return lconst - 0.5 * std::log(one_m) - (nu + 2.0) / 2.0 * std::log1p(q) +
           (nu + 1.0) / 2.0 * (std::log1p(x * x / nu) + std::log1p(y * y / nu));
}

double plackett_discriminant(double theta, double u, double v) {
    const double tm = theta - 1.0;
    return 1.0 + 2.0 * tm * (u + v - 2.0 * u * v) + tm * tm * (u - v) * (u - v);
}

double plackett_ld(double theta, double u, double v) {
    const double tm = theta - 1.0;
    const double D = plackett_discriminant(theta, u, v);
    return std::log(theta) + std::log1p(tm * (u + v - 2.0 * u * v)) - 1.5 * std::log(D);
}

double frank_ld(double lam, double u, double v) {
    if (std::abs(lam) < 1e-8) return 0.0;
    const double a = std::expm1(-lam * u);
    const double b = std::expm1(-lam * v);
    const double g = std::expm1(-lam);
    const double den = g + a * b;
    return std::log(-lam * g) - lam * (u + v) - 2.0 * std::log(std::abs(den));
}

/// lu = -ln u, lv = -ln v.
double gumbel_ld(double delta, double lu, double lv) {
    if (delta == 1.0) return 0.0;
    const double la = log_add(delta * std::log(lu), delta * std::log(lv));
    const double a_pow = std::exp(la / delta);
    return -a_pow + lu + lv + (delta - 1.0) * (std::log(lu) + std::log(lv)) + (2.0 / delta - 2.0) * la +
           std::log1p((delta - 1.0) / a_pow);
}

struct JcShape {
    double kappa;
    double gamma;
};

/// Joe–Clayton shape for upper tail tu and lower tail tl.
JcShape jc_shape(double tu, double tl) { return {1.0 / std::log2(2.0 - tu), -1.0 / std::log2(tl)}; }

/// ln(1 - e^x) for x < 0, accurate at both ends.
double log1mexp(double x) { return x < -std::numbers::ln2 ? std::log1p(-std::exp(x)) : std::log(-std::expm1(x)); }

struct JcTerms {
    double log_a, log_b, log_s, w;
};

// The Joe–Clayton helpers take lu = ln(1-u), lv = ln(1-v) so the survival term can
// pass ln(u) exactly instead of rounding through 1 - (1 - u).
JcTerms jc_terms(const JcShape& s, double lu, double lv) {
    JcTerms t{};
    t.log_a = log1mexp(s.kappa * lu);
    t.log_b = log1mexp(s.kappa * lv);
    const double al = -s.gamma * t.log_a;
    const double be = -s.gamma * t.log_b;
    const double m = std::max(al, be);
    if (m < 1.0) {
        t.log_s = std::log1p(std::expm1(al) + std::expm1(be));
    } else {
        t.log_s = m + std::log(std::exp(al - m) + std::exp(be - m) - std::exp(-m));
    }
    t.w = std::exp(-t.log_s / s.gamma);
    return t;
}

double jc_cdf(const JcShape& s, double lu, double lv) {
    const JcTerms t = jc_terms(s, lu, lv);
    return -std::expm1(std::log1p(-t.w) / s.kappa);
}

double jc_ld(const JcShape& s, double lu, double lv) {
    const JcTerms t = jc_terms(s, lu, lv);
    const double one_m_w = -std::expm1(-t.log_s / s.gamma);
    const double log_au = std::log(s.kappa) + (s.kappa - 1.0) * lu;
    const double log_bv = std::log(s.kappa) + (s.kappa - 1.0) * lv;
    const double bracket = (1.0 + s.gamma) * one_m_w + (1.0 - 1.0 / s.kappa) * t.w;
    return -std::log(s.kappa) + log_au + log_bv - (s.gamma + 1.0) * (t.log_a + t.log_b) +
           (-1.0 / s.gamma - 2.0) * t.log_s + (1.0 / s.kappa - 2.0) * std::log(one_m_w) + std::log(bracket);
}

/// dC_JC/du.
double jc_conditional(const JcShape& s, double lu, double lv) {
    const JcTerms t = jc_terms(s, lu, lv);
    const double one_m_w = -std::expm1(-t.log_s / s.gamma);
    const double log_au = std::log(s.kappa) + (s.kappa - 1.0) * lu;
    const double lh = -std::log(s.kappa) + (1.0 / s.kappa - 1.0) * std::log(one_m_w) +
                      (-1.0 / s.gamma - 1.0) * t.log_s - (s.gamma + 1.0) * t.log_a + log_au;
    return std::clamp(std::exp(lh), 0.0, 1.0);
}

double sjc_cdf(double tu, double tl, double u, double v) {
    return 0.5 * (jc_cdf(jc_shape(tu, tl), std::log1p(-u), std::log1p(-v)) +
                  jc_cdf(jc_shape(tl, tu), std::log(u), std::log(v)) + u + v - 1.0);
}

double sjc_ld(double tu, double tl, double u, double v) {
    return std::log(0.5) + log_add(jc_ld(jc_shape(tu, tl), std::log1p(-u), std::log1p(-v)),
                                   jc_ld(jc_shape(tl, tu), std::log(u), std::log(v)));
}

double sjc_conditional(double tu, double tl, double u, double v) {
    const double h = 0.5 * (jc_conditional(jc_shape(tu, tl), std::log1p(-u), std::log1p(-v)) +
                            1.0 - jc_conditional(jc_shape(tl, tu), std::log(u), std::log(v)));
    return std::clamp(h, 0.0, 1.0);
}

// ---- prepared data ---------------------------------------------------------

/// Inputs transformed once per fit: normal or t scores, -log u, or u itself.
struct Prepared {
    std::vector<double> a;
    std::vector<double> b;
    double nu = 0.0;
    double lconst = 0.0;
};

Prepared prepare(Family f, const UniformPair& pair, double nu) {
    const std::size_t n = pair.u.size();
    Prepared p;
    p.a.resize(n);
    p.b.resize(n);
    p.nu = nu;
    for (std::size_t t = 0; t < n; ++t) {
        const double u = pair.u[t], v = pair.v[t];
        switch (f) {
        case Family::Gaussian:
            p.a[t] = norm_quantile(u);
            p.b[t] = norm_quantile(v);
            break;
        case Family::StudentT:
            p.a[t] = t_quantile(u, nu);
            p.b[t] = t_quantile(v, nu);
            break;
        case Family::Gumbel:
            p.a[t] = -std::log(u);
            p.b[t] = -std::log(v);
            break;
        case Family::RotatedGumbel:
            p.a[t] = -std::log1p(-u);
            p.b[t] = -std::log1p(-v);
            break;
        default:
            p.a[t] = u;
            p.b[t] = v;
        }
    }
    if (f == Family::StudentT) p.lconst = t_log_const(nu);
    return p;
}

double prepared_ld(Family f, const CopulaParams& p, double a, double b, double lconst) {
    switch (f) {
    case Family::Gaussian: return gauss_ld(p.rho, a, b);
    case Family::StudentT: return t_ld(p.rho, p.nu, a, b, lconst);
    case Family::Plackett: return plackett_ld(p.pi_plackett, a, b);
    case Family::Frank: return frank_ld(p.lambda_frank, a, b);
    case Family::Gumbel:
    case Family::RotatedGumbel: return gumbel_ld(p.delta, a, b);
    case Family::Sjc: return sjc_ld(p.lam_u, p.lam_l, a, b);
    }
    return -kInf;
}

double static_loglik(Family f, const CopulaParams& p, const Prepared& data) {
    double ll = 0.0;
    for (std::size_t t = 0; t < data.a.size(); ++t) ll += prepared_ld(f, p, data.a[t], data.b[t], data.lconst);
    return ll;
}

/// Objective value for an optimizer: negative log-likelihood, +inf when unusable.
double to_objective(double ll) { return std::isfinite(ll) ? -ll : kInf; }

// ---- time-varying machinery -------------------------------------------------

/// Forcing variable of the evolution equation at each t, averaged over up to
/// ten lags (zero when t = 0).
std::vector<double> forcing_terms(Family f, const UniformPair& pair, double nu) {
    const std::size_t n = pair.u.size();
    std::vector<double> x(n);
    for (std::size_t t = 0; t < n; ++t) {
        const double u = pair.u[t], v = pair.v[t];
        switch (f) {
        case Family::Gaussian: x[t] = norm_quantile(u) * norm_quantile(v); break;
        case Family::StudentT: x[t] = t_quantile(u, nu) * t_quantile(v, nu); break;
        default: x[t] = std::abs(u - v);
        }
    }
    std::vector<double> m(n, 0.0);
    double window = 0.0;
    for (std::size_t t = 1; t < n; ++t) {
        window += x[t - 1];
        if (t > kEvolutionLags) window -= x[t - 1 - kEvolutionLags];
        m[t] = window / static_cast<double>(std::min(t, kEvolutionLags));
    }
    return m;
}

double evolve_step(Family f, const std::array<double, 3>& psi, double lagged, double forcing) {
    const double z = psi[0] + psi[1] * lagged + psi[2] * forcing;
    switch (f) {
    case Family::Gaussian:
    case Family::StudentT: return std::clamp(logistic_transform(z), -kRhoCap, kRhoCap);
    case Family::Gumbel:
    case Family::RotatedGumbel: return 1.0 + softplus(z);
    default: return tail_from_logit(z);
    }
}

/// Parameter path; for SJC `lower` receives the lower-tail path.
std::vector<double> evolve_path(Family f, const std::array<double, 3>& psi, double initial,
                                const std::vector<double>& forcing) {
    std::vector<double> path(forcing.size());
    for (std::size_t t = 0; t < forcing.size(); ++t) {
        const double lagged = t < kEvolutionLags ? initial : path[t - 1];
        path[t] = evolve_step(f, psi, lagged, forcing[t]);
    }
    return path;
}

double static_state(Family f, const CopulaParams& p) {
    switch (f) {
    case Family::Gaussian:
    case Family::StudentT: return p.rho;
    case Family::Gumbel:
    case Family::RotatedGumbel: return p.delta;
    default: return p.lam_u;
    }
}

void set_state(Family f, CopulaParams& p, double value) {
    switch (f) {
    case Family::Gaussian:
    case Family::StudentT: p.rho = value; break;
    case Family::Gumbel:
    case Family::RotatedGumbel: p.delta = value; break;
    default: p.lam_u = value;
    }
}

/// Transformed-scale intercept that reproduces `state` with no dynamics.
double neutral_intercept(Family f, double state) {
    switch (f) {
    case Family::Gaussian:
    case Family::StudentT: return 2.0 * std::atanh(state);
    case Family::Gumbel:
    case Family::RotatedGumbel: return softplus_inv(std::max(state - 1.0, 1e-8));
    default: return logit_from_tail(state);
    }
}

double tv_loglik(Family f, const CopulaParams& base, const std::array<double, 3>& psi,
                 const std::array<double, 3>& psi_lower, const Prepared& data, const std::vector<double>& forcing) {
    CopulaParams p = base;
    double ll = 0.0;
    if (f == Family::Sjc) {
        const auto up = evolve_path(f, psi, base.lam_u, forcing);
        const auto lo = evolve_path(f, psi_lower, base.lam_l, forcing);
        for (std::size_t t = 0; t < forcing.size(); ++t) ll += sjc_ld(up[t], lo[t], data.a[t], data.b[t]);
        return ll;
    }
    const auto path = evolve_path(f, psi, static_state(f, base), forcing);
    for (std::size_t t = 0; t < forcing.size(); ++t) {
        set_state(f, p, path[t]);
        ll += prepared_ld(f, p, data.a[t], data.b[t], data.lconst);
    }
    return ll;
}

void finish_fit(CopulaFit& fit) {
    fit.k = parameter_count(fit.family);
    fit.aic = -2.0 * fit.loglik + 2.0 * static_cast<double>(fit.k);
}

void check_sample(const UniformPair& pair, std::size_t min_n, const char* what) {
    validate_pair(pair);
    if (pair.u.size() < min_n) {
        throw std::invalid_argument(std::string(what) + ": need at least " + std::to_string(min_n) + " observations");
    }
}

bool near(double x, double edge, double tol) { return std::abs(x - edge) < tol; }

/// v solving dC/du (u, v) = p, by safeguarded Newton on the conditional CDF.
double invert_conditional(Family f, const CopulaParams& prm, double u, double p) {
    double lo = 0.0, hi = 1.0, v = p;
    for (int it = 0; it < 100; ++it) {
        const double h = conditional_cdf(f, prm, u, v) - p;
        if (h == 0.0) return v;
        (h > 0.0 ? hi : lo) = v;
        if (hi - lo < 1e-15) break;
        double next = 0.5 * (lo + hi);
        const double d = std::exp(copula_log_density(f, prm, u, v));
        if (std::isfinite(d) && d > 0.0) {
            const double newton = v - h / d;
            if (newton > lo && newton < hi) next = newton;
        }
        if (std::abs(next - v) < 1e-15) {
            v = next;
            break;
        }
        v = next;
    }
    return v;
}

double open_uniform(Rng& rng) { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; }

double clamp_open(double x) {
    return std::clamp(x, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

} // namespace

std::string_view to_string(Family f) {
    switch (f) {
    case Family::Gaussian: return "Gaussian";
    case Family::StudentT: return "StudentT";
    case Family::Plackett: return "Plackett";
    case Family::Frank: return "Frank";
    case Family::Gumbel: return "Gumbel";
    case Family::RotatedGumbel: return "RotatedGumbel";
    case Family::Sjc: return "SJC";
    }
    return "?";
}

Family family_from_string(std::string_view tag) {
    for (Family f : kAllFamilies) {
        if (to_string(f) == tag) return f;
    }
    throw std::invalid_argument("unknown copula family '" + std::string(tag) + "'");
}

bool supports_time_varying(Family f) { return f != Family::Plackett && f != Family::Frank; }

std::string label(const CopulaFamily& f) {
    return (f.time_varying ? "TV-" : "") + std::string(to_string(f.tag));
}

CopulaFamily family_from_label(std::string_view text) {
    CopulaFamily f;
    if (text.starts_with("TV-")) {
        f.time_varying = true;
        text.remove_prefix(3);
    }
    f.tag = family_from_string(text);
    if (f.time_varying && !supports_time_varying(f.tag)) {
        throw std::invalid_argument("copula family " + std::string(text) + " has no time-varying form");
    }
    return f;
}

std::vector<CopulaFamily> all_families() {
    std::vector<CopulaFamily> out;
    for (Family f : kAllFamilies) out.push_back({f, false});
    for (Family f : kAllFamilies) {
        if (supports_time_varying(f)) out.push_back({f, true});
    }
    return out;
}

void validate_params(Family f, const CopulaParams& p) {
    auto fail = [&](const std::string& what) {
        throw std::invalid_argument(std::string(to_string(f)) + " copula: " + what);
    };
    switch (f) {
    case Family::Gaussian:
        if (!(std::abs(p.rho) < 1.0)) fail("rho must lie in (-1,1)");
        break;
    case Family::StudentT:
        if (!(std::abs(p.rho) < 1.0)) fail("rho must lie in (-1,1)");
        if (!(p.nu > 2.0) || !std::isfinite(p.nu)) fail("nu must exceed 2");
        break;
    case Family::Plackett:
        if (!(p.pi_plackett > 0.0) || !std::isfinite(p.pi_plackett)) fail("pi must be positive");
        break;
    case Family::Frank:
        if (!std::isfinite(p.lambda_frank)) fail("lambda must be finite");
        break;
    case Family::Gumbel:
    case Family::RotatedGumbel:
        if (!(p.delta >= 1.0) || !std::isfinite(p.delta)) fail("delta must be at least 1");
        break;
    case Family::Sjc:
        if (!(p.lam_u > 0.0 && p.lam_u < 1.0) || !(p.lam_l > 0.0 && p.lam_l < 1.0)) {
            fail("tail coefficients must lie in (0,1)");
        }
        break;
    }
}

void validate_pair(const UniformPair& pair) {
    if (pair.u.size() != pair.v.size()) throw std::invalid_argument("UniformPair: u and v differ in length");
    if (!pair.dates.empty() && pair.dates.size() != pair.u.size()) {
        throw std::invalid_argument("UniformPair: dates differ in length");
    }
    for (std::size_t t = 0; t < pair.u.size(); ++t) {
        if (!(pair.u[t] > 0.0 && pair.u[t] < 1.0 && pair.v[t] > 0.0 && pair.v[t] < 1.0)) {
            throw std::invalid_argument("UniformPair: value outside (0,1) at index " + std::to_string(t));
        }
    }
}

double logistic_transform(double x) {
    // tanh(x/2) equals (1 - e^{-x}) / (1 + e^{-x}) and stays accurate for large |x|.
    return std::tanh(0.5 * x);
}

std::vector<double> pit_transform(std::span<const double> z) {
    const std::size_t n = z.size();
    if (n < 50) throw std::invalid_argument("pit_transform: need at least 50 observations");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return z[a] < z[b]; });
    std::vector<double> out(n);
    std::size_t largest_tie = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && z[idx[j + 1]] == z[idx[i]]) ++j;
        largest_tie = std::max(largest_tie, j - i + 1);
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t m = i; m <= j; ++m) out[idx[m]] = rank / static_cast<double>(n + 1);
        i = j + 1;
    }
    if (2 * largest_tie > n) throw std::invalid_argument("pit_transform: more than half the sample is tied");
    return out;
}

double copula_cdf(Family f, const CopulaParams& p, double u, double v) {
    validate_params(f, p);
    if (!(u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument("copula_cdf: arguments must lie in [0,1]");
    }
    if (u == 0.0 || v == 0.0) return 0.0;
    if (u == 1.0) return v;
    if (v == 1.0) return u;
    double c = 0.0;
    switch (f) {
    case Family::Gaussian:
        c = bvnu(-norm_quantile(u), -norm_quantile(v), p.rho);
        break;
    case Family::StudentT: {
        const double y = t_quantile(v, p.nu);
        const double scale = (1.0 - p.rho * p.rho) / (p.nu + 1.0);
        auto integrand = [&](double s) {
            if (s <= 0.0) return 0.0;
            if (s >= 1.0) return 1.0;
            const double x = t_quantile(s, p.nu);
            return t_cdf((y - p.rho * x) / std::sqrt((p.nu + x * x) * scale), p.nu + 1.0);
        };
        // The integrand behaves like a power of s at 0; tanh-sinh absorbs the endpoint singularity.
        thread_local boost::math::quadrature::tanh_sinh<double> ts;
        c = ts.integrate(integrand, 0.0, u, 1e-15);
        break;
    }
    case Family::Plackett: {
        const double theta = p.pi_plackett;
        if (std::abs(theta - 1.0) < 1e-8) return u * v;
        const double B = 1.0 + (theta - 1.0) * (u + v);
        const double sd = std::sqrt(plackett_discriminant(theta, u, v));
        c = B > 0.0 ? 2.0 * theta * u * v / (B + sd) : (B - sd) / (2.0 * (theta - 1.0));
        break;
    }
    case Family::Frank: {
        const double lam = p.lambda_frank;
        if (std::abs(lam) < 1e-8) return u * v;
        c = -std::log1p(std::expm1(-lam * u) * std::expm1(-lam * v) / std::expm1(-lam)) / lam;
        break;
    }
    case Family::Gumbel: {
        const double la = log_add(p.delta * std::log(-std::log(u)), p.delta * std::log(-std::log(v)));
        c = std::exp(-std::exp(la / p.delta));
        break;
    }
    case Family::RotatedGumbel:
        c = u + v - 1.0 + copula_cdf(Family::Gumbel, p, 1.0 - u, 1.0 - v);
        break;
    case Family::Sjc:
        c = sjc_cdf(p.lam_u, p.lam_l, u, v);
        break;
    }
    return std::clamp(c, 0.0, 1.0);
}

double copula_log_density(Family f, const CopulaParams& p, double u, double v) {
    validate_params(f, p);
    if (!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0)) {
        throw std::invalid_argument("copula_density: arguments must lie in (0,1)");
    }
    switch (f) {
    case Family::Gaussian: return gauss_ld(p.rho, norm_quantile(u), norm_quantile(v));
    case Family::StudentT:
        return t_ld(p.rho, p.nu, t_quantile(u, p.nu), t_quantile(v, p.nu), t_log_const(p.nu));
    case Family::Gumbel: return gumbel_ld(p.delta, -std::log(u), -std::log(v));
    case Family::RotatedGumbel: return gumbel_ld(p.delta, -std::log1p(-u), -std::log1p(-v));
    default: return prepared_ld(f, p, u, v, 0.0);
    }
}

double copula_density(Family f, const CopulaParams& p, double u, double v) {
    const double d = std::exp(copula_log_density(f, p, u, v));
    if (!std::isfinite(d)) throw NumericalError("copula_density: non-finite density");
    return d;
}

double conditional_cdf(Family f, const CopulaParams& p, double u, double v) {
    validate_params(f, p);
    if (v <= 0.0) return 0.0;
    if (v >= 1.0) return 1.0;
    switch (f) {
    case Family::Gaussian: {
        const double x = norm_quantile(u), y = norm_quantile(v);
        return norm_cdf((y - p.rho * x) / std::sqrt(1.0 - p.rho * p.rho));
    }
    case Family::StudentT: {
        const double x = t_quantile(u, p.nu), y = t_quantile(v, p.nu);
        return t_cdf((y - p.rho * x) / std::sqrt((p.nu + x * x) * (1.0 - p.rho * p.rho) / (p.nu + 1.0)),
                     p.nu + 1.0);
    }
    case Family::Plackett: {
        const double theta = p.pi_plackett;
        const double B = 1.0 + (theta - 1.0) * (u + v);
        return std::clamp(0.5 * (1.0 - (B - 2.0 * theta * v) / std::sqrt(plackett_discriminant(theta, u, v))),
                          0.0, 1.0);
    }
    case Family::Frank: {
        const double lam = p.lambda_frank;
        if (std::abs(lam) < 1e-8) return v;
        const double a = std::expm1(-lam * u), b = std::expm1(-lam * v), g = std::expm1(-lam);
        return std::clamp((a + 1.0) * b / (g + a * b), 0.0, 1.0);
    }
    case Family::Gumbel: {
        const double x = -std::log(u), y = -std::log(v);
        const double la = log_add(p.delta * std::log(x), p.delta * std::log(y));
        const double a_root = std::exp(la / p.delta);
        const double lh = -a_root + (1.0 / p.delta - 1.0) * la + (p.delta - 1.0) * std::log(x) + x;
        return std::clamp(std::exp(lh), 0.0, 1.0);
    }
    case Family::RotatedGumbel:
        return std::clamp(1.0 - conditional_cdf(Family::Gumbel, p, 1.0 - u, 1.0 - v), 0.0, 1.0);
    case Family::Sjc: return sjc_conditional(p.lam_u, p.lam_l, u, v);
    }
    return 0.0;
}

TailDependence tail_dependence(Family f, const CopulaParams& p) {
    validate_params(f, p);
    switch (f) {
    case Family::StudentT: {
        const double x = -std::sqrt(p.nu + 1.0) * std::sqrt(1.0 - p.rho) / std::sqrt(1.0 + p.rho);
        const double lam = 2.0 * t_cdf(x, p.nu + 1.0);
        return {lam, lam};
    }
    case Family::Gumbel: return {0.0, 2.0 - std::pow(2.0, 1.0 / p.delta)};
    case Family::RotatedGumbel: return {2.0 - std::pow(2.0, 1.0 / p.delta), 0.0};
    case Family::Sjc: return {p.lam_l, p.lam_u};
    default: return {0.0, 0.0};
    }
}

double kendall_tau(Family f, const CopulaParams& p) {
    validate_params(f, p);
    using boost::math::quadrature::gauss_kronrod;
    switch (f) {
    case Family::Gaussian:
    case Family::StudentT: return 2.0 / kPi * std::asin(p.rho);
    case Family::Gumbel:
    case Family::RotatedGumbel: return 1.0 - 1.0 / p.delta;
    case Family::Frank: {
        const double lam = p.lambda_frank;
        if (std::abs(lam) < 1e-8) return 0.0;
        auto debye = [](double t) { return std::abs(t) < 1e-12 ? 1.0 : t / std::expm1(t); };
        const double d1 = gauss_kronrod<double, 31>::integrate(debye, 0.0, lam, 10, 1e-14) / lam;
        return 1.0 - 4.0 / lam * (1.0 - d1);
    }
    default: {
        // tau = 1 - 4 E[dC/du dC/dv], which has a bounded integrand.
        auto inner = [&](double u) {
            auto g = [&](double v) {
                if (v <= 0.0 || v >= 1.0) return 0.0;
                return conditional_cdf(f, p, u, v) * conditional_cdf(f, p, v, u);
            };
            return gauss_kronrod<double, 21>::integrate(g, 0.0, 1.0, 8, 1e-10);
        };
        auto outer = [&](double u) { return (u <= 0.0 || u >= 1.0) ? 0.0 : inner(u); };
        return 1.0 - 4.0 * gauss_kronrod<double, 21>::integrate(outer, 0.0, 1.0, 8, 1e-10);
    }
    }
}

double correlation_proxy(Family f, const CopulaParams& p) {
    if (f == Family::Gaussian || f == Family::StudentT) {
        validate_params(f, p);
        return p.rho;
    }
    return std::sin(kPi * kendall_tau(f, p) / 2.0);
}

std::size_t parameter_count(const CopulaFamily& f) {
    if (!f.time_varying) return f.tag == Family::StudentT || f.tag == Family::Sjc ? 2 : 1;
    switch (f.tag) {
    case Family::StudentT: return 4;
    case Family::Sjc: return 6;
    default: return 3;
    }
}

CopulaFit fit_static_copula(const UniformPair& pair, Family f) {
    check_sample(pair, 100, "fit_static_copula");
    CopulaFit fit;
    fit.family = {f, false};
    fit.n_obs = pair.u.size();
    CopulaParams& p = fit.params;
    using optimize::brent_minimize;

    switch (f) {
    case Family::Gaussian: {
        const Prepared data = prepare(f, pair, 0.0);
        const double lim = 0.9999;
        auto [rho, val] = brent_minimize(
            [&](double r) {
                CopulaParams q;
                q.rho = r;
                return to_objective(static_loglik(f, q, data));
            },
            -lim, lim);
        p.rho = rho;
        fit.loglik = -val;
        fit.at_boundary = near(std::abs(rho), lim, 1e-4);
        break;
    }
    case Family::StudentT: {
        double best = kInf;
        const double lim = 0.9999;
        for (double nu : kNuGrid) {
            const Prepared data = prepare(f, pair, nu);
            auto [rho, val] = brent_minimize(
                [&](double r) {
                    CopulaParams q;
                    q.rho = r;
                    q.nu = nu;
                    return to_objective(static_loglik(f, q, data));
                },
                -lim, lim);
            if (val < best) {
                best = val;
                p.rho = rho;
                p.nu = nu;
            }
        }
        fit.loglik = -best;
        fit.at_boundary = near(std::abs(p.rho), lim, 1e-4);
        break;
    }
    case Family::Plackett: {
        const Prepared data = prepare(f, pair, 0.0);
        const double lim = 9.0;
        auto [x, val] = brent_minimize(
            [&](double lx) {
                CopulaParams q;
                q.pi_plackett = std::exp(lx);
                return to_objective(static_loglik(f, q, data));
            },
            -lim, lim);
        p.pi_plackett = std::exp(x);
        fit.loglik = -val;
        fit.at_boundary = near(std::abs(x), lim, 1e-3);
        break;
    }
    case Family::Frank: {
        const Prepared data = prepare(f, pair, 0.0);
        const double lim = 40.0;
        auto [lam, val] = brent_minimize(
            [&](double l) {
                CopulaParams q;
                q.lambda_frank = l;
                return to_objective(static_loglik(f, q, data));
            },
            -lim, lim);
        p.lambda_frank = lam;
        fit.loglik = -val;
        fit.at_boundary = near(std::abs(lam), lim, 1e-3);
        break;
    }
    case Family::Gumbel:
    case Family::RotatedGumbel: {
        const Prepared data = prepare(f, pair, 0.0);
        const double lo = -10.0, hi = 4.0;
        auto [x, val] = brent_minimize(
            [&](double dx) {
                CopulaParams q;
                q.delta = 1.0 + std::exp(dx);
                return to_objective(static_loglik(f, q, data));
            },
            lo, hi);
        p.delta = 1.0 + std::exp(x);
        fit.loglik = -val;
        fit.at_boundary = near(x, lo, 1e-3) || near(x, hi, 1e-3);
        break;
    }
    case Family::Sjc: {
        const Prepared data = prepare(f, pair, 0.0);
        optimize::MultiStartOptions opts;
        opts.starts = 6;
        opts.spread = {3.0, 3.0};
        opts.local.initial_step = 0.5;
        opts.local.max_evals = 2000;
        auto obj = [&](std::span<const double> x) {
            CopulaParams q;
            q.lam_u = tail_from_logit(x[0]);
            q.lam_l = tail_from_logit(x[1]);
            return to_objective(static_loglik(f, q, data));
        };
        const auto res = optimize::multi_start(obj, {-2.0, -2.0}, opts);
        p.lam_u = tail_from_logit(res.x[0]);
        p.lam_l = tail_from_logit(res.x[1]);
        fit.loglik = -res.value;
        fit.converged = res.converged;
        fit.at_boundary = std::abs(res.x[0]) > 12.0 || std::abs(res.x[1]) > 12.0;
        break;
    }
    }
    if (!std::isfinite(fit.loglik)) throw NumericalError("fit_static_copula: likelihood is not finite");
    if (fit.at_boundary) fit.warnings.push_back("estimate at the boundary of the parameter range");
    fit.tail_dep = tail_dependence(f, p);
    finish_fit(fit);
    return fit;
}

CopulaFit fit_tv_copula(const UniformPair& pair, Family f) {
    if (!supports_time_varying(f)) {
        throw std::invalid_argument(std::string(to_string(f)) + " copula has no time-varying form");
    }
    check_sample(pair, 150, "fit_tv_copula");
    const CopulaFit base = fit_static_copula(pair, f);

    CopulaFit fit;
    fit.family = {f, true};
    fit.n_obs = pair.u.size();
    fit.params = base.params;

    optimize::MultiStartOptions opts;
    opts.local.initial_step = 0.5;
    opts.local.max_evals = 3000;

    if (f == Family::Sjc) {
        const Prepared data = prepare(f, pair, 0.0);
        const auto forcing = forcing_terms(f, pair, 0.0);
        opts.starts = 4;
        opts.spread = {1.0, 2.0, 2.0, 1.0, 2.0, 2.0};
        auto obj = [&](std::span<const double> x) {
            return to_objective(tv_loglik(f, base.params, {x[0], x[1], x[2]}, {x[3], x[4], x[5]}, data, forcing));
        };
        const auto res = optimize::multi_start(
            obj, {neutral_intercept(f, base.params.lam_u), 0.0, 0.0, neutral_intercept(f, base.params.lam_l), 0.0, 0.0},
            opts);
        fit.params.psi = {res.x[0], res.x[1], res.x[2]};
        fit.params.psi_lower = {res.x[3], res.x[4], res.x[5]};
        fit.loglik = -res.value;
        fit.converged = res.converged;
    } else {
        opts.starts = 8;
        opts.spread = {1.0, 2.0, 2.0};
        std::vector<double> nus = {base.params.nu};
        if (f == Family::StudentT) nus.assign(kNuGrid.begin(), kNuGrid.end());
        double best = kInf;
        for (double nu : nus) {
            CopulaParams start = base.params;
            start.nu = nu;
            const Prepared data = prepare(f, pair, nu);
            const auto forcing = forcing_terms(f, pair, nu);
            auto obj = [&](std::span<const double> x) {
                return to_objective(tv_loglik(f, start, {x[0], x[1], x[2]}, {}, data, forcing));
            };
            const auto res = optimize::multi_start(obj, {neutral_intercept(f, static_state(f, start)), 0.0, 0.0}, opts);
            if (res.value < best) {
                best = res.value;
                fit.params.nu = nu;
                fit.params.psi = {res.x[0], res.x[1], res.x[2]};
                fit.converged = res.converged;
            }
        }
        fit.loglik = -best;
    }
    if (!std::isfinite(fit.loglik)) throw NumericalError("fit_tv_copula: likelihood is not finite");
    if (!fit.converged) fit.warnings.push_back("optimizer budget exhausted");

    const auto path = parameter_path(fit, pair);
    TailDependence mean_tail;
    fit.param_path.reserve(path.size());
    for (const auto& pt : path) {
        fit.param_path.push_back(static_state(f, pt));
        if (f == Family::Sjc) fit.param_path_lower.push_back(pt.lam_l);
        const TailDependence td = tail_dependence(f, pt);
        mean_tail.lower += td.lower;
        mean_tail.upper += td.upper;
    }
    fit.tail_dep = {mean_tail.lower / static_cast<double>(path.size()),
                    mean_tail.upper / static_cast<double>(path.size())};
    finish_fit(fit);
    return fit;
}

CopulaFit fit_copula(const UniformPair& pair, const CopulaFamily& f) {
    return f.time_varying ? fit_tv_copula(pair, f.tag) : fit_static_copula(pair, f.tag);
}

CopulaSelection select_copula(const UniformPair& pair, const std::vector<CopulaFamily>& families) {
    if (families.empty()) throw std::invalid_argument("select_copula: empty family list");
    CopulaSelection sel;
    for (const auto& f : families) {
        try {
            sel.ranked.push_back(fit_copula(pair, f));
        } catch (const std::exception& e) {
            sel.failures.push_back({f, e.what()});
        }
    }
    if (sel.ranked.empty()) throw std::runtime_error("select_copula: every copula fit failed");
    std::stable_sort(sel.ranked.begin(), sel.ranked.end(),
                     [](const CopulaFit& a, const CopulaFit& b) { return a.aic < b.aic; });
    return sel;
}

std::vector<CopulaParams> parameter_path(const CopulaFit& fit, const UniformPair& pair) {
    validate_pair(pair);
    const Family f = fit.family.tag;
    std::vector<CopulaParams> out(pair.u.size(), fit.params);
    if (!fit.family.time_varying) return out;
    const auto forcing = forcing_terms(f, pair, fit.params.nu);
    const auto path = evolve_path(f, fit.params.psi, static_state(f, fit.params), forcing);
    for (std::size_t t = 0; t < out.size(); ++t) set_state(f, out[t], path[t]);
    if (f == Family::Sjc) {
        const auto lower = evolve_path(f, fit.params.psi_lower, fit.params.lam_l, forcing);
        for (std::size_t t = 0; t < out.size(); ++t) out[t].lam_l = lower[t];
    }
    return out;
}

UniformPair simulate_copula(Family f, const CopulaParams& p, std::size_t n, std::uint64_t seed) {
    validate_params(f, p);
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    UniformPair out;
    out.u.resize(n);
    out.v.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        double u = 0.0, v = 0.0;
        switch (f) {
        case Family::Gaussian: {
            const double z1 = normal(rng);
            const double z2 = p.rho * z1 + std::sqrt(1.0 - p.rho * p.rho) * normal(rng);
            u = norm_cdf(z1);
            v = norm_cdf(z2);
            break;
        }
        case Family::StudentT: {
            const double z1 = normal(rng);
            const double z2 = p.rho * z1 + std::sqrt(1.0 - p.rho * p.rho) * normal(rng);
            std::chi_squared_distribution<double> chi(p.nu);
            const double s = std::sqrt(chi(rng) / p.nu);
            u = t_cdf(z1 / s, p.nu);
            v = t_cdf(z2 / s, p.nu);
            break;
        }
        case Family::Frank: {
            u = open_uniform(rng);
            const double q = open_uniform(rng);
            const double lam = p.lambda_frank;
            if (std::abs(lam) < 1e-8) {
                v = q;
            } else {
                const double eu = std::exp(-lam * u);
                const double x = q * std::expm1(-lam) / (eu - q * (eu - 1.0));
                v = -std::log1p(x) / lam;
            }
            break;
        }
        case Family::Plackett:
            u = open_uniform(rng);
            v = invert_conditional(f, p, u, open_uniform(rng));
            break;
        case Family::Gumbel:
        case Family::RotatedGumbel: {
            // Marshall–Olkin with a positive stable frailty of index 1/delta.
            const double alpha = 1.0 / p.delta;
            const double angle = kPi * open_uniform(rng);
            const double w = -std::log(open_uniform(rng));
            const double s = std::sin(alpha * angle) / std::pow(std::sin(angle), 1.0 / alpha) *
                             std::pow(std::sin((1.0 - alpha) * angle) / w, (1.0 - alpha) / alpha);
            const double e1 = -std::log(open_uniform(rng));
            const double e2 = -std::log(open_uniform(rng));
            u = std::exp(-std::pow(e1 / s, alpha));
            v = std::exp(-std::pow(e2 / s, alpha));
            if (f == Family::RotatedGumbel) {
                u = 1.0 - u;
                v = 1.0 - v;
            }
            break;
        }
        case Family::Sjc: {
            const bool survival = open_uniform(rng) < 0.5;
            CopulaParams jc = p;
            if (survival) std::swap(jc.lam_u, jc.lam_l);
            const JcShape shape = jc_shape(jc.lam_u, jc.lam_l);
            const double a = open_uniform(rng);
            const double q = open_uniform(rng);
            double lo = 0.0, hi = 1.0, b = q;
            for (int it = 0; it < 100; ++it) {
                const double h = jc_conditional(shape, std::log1p(-a), std::log1p(-b)) - q;
                (h > 0.0 ? hi : lo) = b;
                if (hi - lo < 1e-15) break;
                double next = 0.5 * (lo + hi);
                const double d = std::exp(jc_ld(shape, std::log1p(-a), std::log1p(-b)));
                if (std::isfinite(d) && d > 0.0) {
                    const double newton = b - h / d;
                    if (newton > lo && newton < hi) next = newton;
                }
                if (std::abs(next - b) < 1e-15) {
                    b = next;
                    break;
                }
                b = next;
            }
            u = survival ? 1.0 - a : a;
            v = survival ? 1.0 - b : b;
            break;
        }
        }
        out.u[t] = clamp_open(u);
        out.v[t] = clamp_open(v);
    }
    return out;
}

} // namespace coinrisk::copulas
