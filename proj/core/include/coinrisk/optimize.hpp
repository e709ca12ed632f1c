#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace coinrisk::optimize {

using Objective = std::function<double(std::span<const double>)>;

struct NelderMeadOptions {
    int max_evals = 4000;
    /// Stop when the spread of simplex values falls below f_tol * (1 + |f_best|).
    double f_tol = 1e-11;
    /// ... and the simplex diameter falls below x_tol.
    double x_tol = 1e-7;
    double initial_step = 0.25;
};

struct Result {
    std::vector<double> x;
    double value = 0.0;
    int evals = 0;
    bool converged = false;
};

/// Adaptive Nelder–Mead (Gao & Han coefficients). Non-finite objective values
/// are treated as +infinity, so infeasible regions simply repel the simplex.
Result nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& opts = {});

struct MultiStartOptions {
    int starts = 8;
    /// Starts are center + spread[i] * (2h - 1), h a Halton point in [0,1)^n.
    /// The first start is always the center itself.
    std::vector<double> spread;
    NelderMeadOptions local;
    /// Restart polish rounds at the incumbent.
    int polish_rounds = 4;
};

/// Deterministic multi-start Nelder–Mead. The best start is chosen by minimum
/// value with ties going to the lower start index; it is then re-polished from
/// fresh simplices until it stops improving.
Result multi_start(const Objective& f, const std::vector<double>& center, const MultiStartOptions& opts);

/// i-th element (i >= 1) of the van der Corput sequence in `base`.
double halton(std::size_t index, unsigned base);

/// Minimize a scalar function on [lo, hi] (Brent). Returns (argmin, value).
std::pair<double, double> brent_minimize(const std::function<double(double)>& f, double lo, double hi,
                                         int bits = 40);

} // namespace coinrisk::optimize
