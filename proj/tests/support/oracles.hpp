#pragma once

// Reference computations used only by the tests. They are deliberately written
// differently from the library code they check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace oracle {

/// Solve A x = b by Gaussian elimination with partial pivoting. A is row-major n x n.
inline std::vector<double> solve(std::vector<double> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::abs(a[r * n + c]) > std::abs(a[piv * n + c])) piv = r;
        }
        if (std::abs(a[piv * n + c]) < 1e-300) throw std::runtime_error("singular");
        if (piv != c) {
            for (std::size_t k = 0; k < n; ++k) std::swap(a[c * n + k], a[piv * n + k]);
            std::swap(b[c], b[piv]);
        }
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = a[r * n + c] / a[c * n + c];
            for (std::size_t k = c; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= a[i * n + k] * x[k];
        x[i] = s / a[i * n + i];
    }
    return x;
}

/// Inverse of a small matrix by solving against unit vectors.
inline std::vector<double> inverse(const std::vector<double>& a, std::size_t n) {
    std::vector<double> inv(n * n);
    for (std::size_t c = 0; c < n; ++c) {
        std::vector<double> e(n, 0.0);
        e[c] = 1.0;
        const auto col = solve(a, e);
        for (std::size_t r = 0; r < n; ++r) inv[r * n + c] = col[r];
    }
    return inv;
}

/// ADF t-ratio on y_{t-1} from explicit OLS: dy_t on [1, y_{t-1}, dy_{t-1..t-p}].
inline double adf_tratio(std::span<const double> y, int p) {
    const std::size_t k = 2 + static_cast<std::size_t>(p);
    std::vector<std::vector<double>> rows;
    std::vector<double> dep;
    for (std::size_t t = static_cast<std::size_t>(p) + 1; t < y.size(); ++t) {
        std::vector<double> x = {1.0, y[t - 1]};
        for (int i = 1; i <= p; ++i) x.push_back(y[t - i] - y[t - i - 1]);
        rows.push_back(x);
        dep.push_back(y[t] - y[t - 1]);
    }
    std::vector<double> xtx(k * k, 0.0), xty(k, 0.0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t i = 0; i < k; ++i) {
            xty[i] += rows[r][i] * dep[r];
            for (std::size_t j = 0; j < k; ++j) xtx[i * k + j] += rows[r][i] * rows[r][j];
        }
    }
    const auto beta = solve(xtx, xty);
    double ssr = 0.0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        double fit = 0.0;
        for (std::size_t i = 0; i < k; ++i) fit += rows[r][i] * beta[i];
        ssr += (dep[r] - fit) * (dep[r] - fit);
    }
    const double s2 = ssr / static_cast<double>(rows.size() - k);
    const auto inv = inverse(xtx, k);
    return beta[1] / std::sqrt(s2 * inv[1 * k + 1]);
}

/// Gauss–Legendre nodes and weights on [-1,1] via Newton on P_n.
struct GaussLegendre {
    std::vector<double> x, w;
    explicit GaussLegendre(int n) : x(n), w(n) {
        for (int i = 0; i < n; ++i) {
            double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = z;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (z * p1 - p0) / (z * z - 1.0);
                const double dz = p1 / dp;
                z -= dz;
                if (std::abs(dz) < 1e-15) break;
            }
            x[i] = z;
            w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
    }
};

/// Panels of [0,1] refined geometrically toward both ends.
inline std::vector<double> graded_breaks(int decades = 12) {
    std::vector<double> lo = {0.0};
    for (int d = decades; d >= 1; --d) lo.push_back(std::pow(10.0, -d));
    lo.push_back(0.25);
    std::vector<double> out = lo;
    out.push_back(0.5);
    for (auto it = lo.rbegin(); it != lo.rend(); ++it) out.push_back(1.0 - *it);
    return out;
}

/// Nodes and weights of a composite Gauss–Legendre rule on [0,1].
inline void unit_rule(std::vector<double>& nodes, std::vector<double>& weights, int order = 16, int decades = 12) {
    const GaussLegendre gl(order);
    const auto br = graded_breaks(decades);
    nodes.clear();
    weights.clear();
    for (std::size_t p = 0; p + 1 < br.size(); ++p) {
        const double a = br[p], b = br[p + 1];
        for (std::size_t i = 0; i < gl.x.size(); ++i) {
            nodes.push_back(0.5 * (a + b) + 0.5 * (b - a) * gl.x[i]);
            weights.push_back(0.5 * (b - a) * gl.w[i]);
        }
    }
}

/// Integral of f over [0,1]^2.
inline double integrate_unit_square(const std::function<double(double, double)>& f, int order = 16, int decades = 12) {
    std::vector<double> x, w;
    unit_rule(x, w, order, decades);
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) row += w[j] * f(x[i], x[j]);
        total += w[i] * row;
    }
    return total;
}

/// Adaptive Simpson on [a,b].
inline double simpson(const std::function<double(double)>& f, double a, double b, double tol, int depth = 50) {
    const auto step = [&](auto&& self, double lo, double hi, double flo, double fmid, double fhi, double whole,
                          double eps, int d) -> double {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
        const double flm = f(lm), frm = f(rm);
        const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
        const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
        if (d <= 0 || std::abs(left + right - whole) <= 15.0 * eps) return left + right + (left + right - whole) / 15.0;
        return self(self, lo, mid, flo, flm, fmid, left, eps / 2, d - 1) +
               self(self, mid, hi, fmid, frm, fhi, right, eps / 2, d - 1);
    };
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return step(step, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, depth);
}

/// Student-t density with nu degrees of freedom.
inline double t_pdf(double x, double nu) {
    const double logc = std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0) - 0.5 * std::log(nu * std::numbers::pi);
    return std::exp(logc - (nu + 1.0) / 2.0 * std::log1p(x * x / nu));
}

/// Student-t CDF for x <= 0 by integrating the density; tail mapped through s = 1/x.
inline double t_cdf_negative(double x, double nu) {
    // int_{-inf}^{x} f(t) dt with t = x / s, s in (0,1]: dt = -x/s^2 ds.
    const auto g = [&](double s) {
        if (s <= 0.0) return 0.0;
        const double t = x / s;
        return t_pdf(t, nu) * (-x) / (s * s);
    };
    if (x == 0.0) return 0.5;
    return simpson(g, 0.0, 1.0, 1e-13);
}

/// Sample Kendall tau by direct pair enumeration.
inline double kendall_tau(std::span<const double> u, std::span<const double> v) {
    long long concordant = 0, discordant = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        for (std::size_t j = i + 1; j < u.size(); ++j) {
            const double s = (u[i] - u[j]) * (v[i] - v[j]);
            if (s > 0) ++concordant;
            else if (s < 0) ++discordant;
        }
    }
    const double pairs = static_cast<double>(u.size()) * (static_cast<double>(u.size()) - 1.0) / 2.0;
    return static_cast<double>(concordant - discordant) / pairs;
}

inline double pearson(std::span<const double> a, std::span<const double> b) {
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

/// Largest gap between the empirical CDF of `x` and the uniform CDF.
inline double ks_uniform(std::vector<double> x) {
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        d = std::max(d, std::abs((static_cast<double>(i) + 1.0) / n - x[i]));
        d = std::max(d, std::abs(x[i] - static_cast<double>(i) / n));
    }
    return d;
}

inline std::vector<double> random_walk(std::size_t n, std::uint64_t seed, double sd = 1.0) {
    std::mt19937_64 g(seed);
    std::normal_distribution<double> z(0.0, sd);
    std::vector<double> y(n);
    double s = 0.0;
    for (auto& v : y) {
        s += z(g);
        v = s;
    }
    return y;
}

/// Random walk with a collapsing explosive segment: y_t = delta y_{t-1} + e_t on
/// [start, start + len), then reset to the pre-bubble level.
inline std::vector<double> collapsing_bubble(std::size_t n, std::size_t start, std::size_t len, double delta,
                                             std::uint64_t seed, double level = 100.0, double sd = 6.79) {
    std::mt19937_64 g(seed);
    std::normal_distribution<double> z(0.0, sd);
    std::vector<double> y(n);
    y[0] = level;
    for (std::size_t t = 1; t < n; ++t) {
        if (t >= start && t < start + len) {
            y[t] = delta * y[t - 1] + z(g);
        } else if (t == start + len) {
            y[t] = y[start - 1] + z(g);
        } else {
            y[t] = y[t - 1] + z(g);
        }
    }
    return y;
}

inline double median(std::vector<double> x) {
    std::sort(x.begin(), x.end());
    const std::size_t n = x.size();
    return n % 2 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

} // namespace oracle
