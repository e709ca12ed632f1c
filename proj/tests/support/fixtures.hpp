#pragma once

#include "coinrisk/copulas.hpp"

#include <cmath>
#include <random>

namespace fixture {

using coinrisk::copulas::CopulaParams;
using coinrisk::copulas::Family;
using coinrisk::copulas::UniformPair;
using coinrisk::copulas::simulate_copula;

inline CopulaParams gaussian(double rho) {
    CopulaParams p;
    p.rho = rho;
    return p;
}

inline CopulaParams student(double rho, double nu) {
    CopulaParams p;
    p.rho = rho;
    p.nu = nu;
    return p;
}

inline CopulaParams plackett(double pi) {
    CopulaParams p;
    p.pi_plackett = pi;
    return p;
}

inline CopulaParams frank(double lambda) {
    CopulaParams p;
    p.lambda_frank = lambda;
    return p;
}

inline CopulaParams gumbel(double delta) {
    CopulaParams p;
    p.delta = delta;
    return p;
}

inline CopulaParams sjc(double upper, double lower) {
    CopulaParams p;
    p.lam_u = upper;
    p.lam_l = lower;
    return p;
}

/// Random parameters for `f`; `moderate` keeps them away from the extremes.
inline CopulaParams random_params(Family f, std::mt19937_64& g, bool moderate) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double s = moderate ? 0.7 : 0.98;
    switch (f) {
    case Family::Gaussian: return gaussian(s * (2.0 * u(g) - 1.0));
    case Family::StudentT: return student(s * (2.0 * u(g) - 1.0), moderate ? 3.0 + 12.0 * u(g) : 2.1 + 40.0 * u(g));
    case Family::Plackett: return plackett(std::exp((moderate ? 2.5 : 6.0) * (2.0 * u(g) - 1.0)));
    case Family::Frank: {
        const double mag = moderate ? 0.5 + 7.5 * u(g) : 0.2 + 30.0 * u(g);
        return frank(u(g) < 0.5 ? -mag : mag);
    }
    case Family::Gumbel:
    case Family::RotatedGumbel: return gumbel(1.0 + (moderate ? 2.0 : 6.0) * u(g));
    case Family::Sjc:
        return moderate ? sjc(0.05 + 0.65 * u(g), 0.05 + 0.65 * u(g)) : sjc(0.01 + 0.94 * u(g), 0.01 + 0.94 * u(g));
    }
    return {};
}

/// Gaussian copula with rho 0.2 over the first half and 0.8 over the second.
inline UniformPair regime_switching(std::size_t n, std::uint64_t seed) {
    const auto first = simulate_copula(Family::Gaussian, gaussian(0.2), n / 2, seed);
    const auto second = simulate_copula(Family::Gaussian, gaussian(0.8), n - n / 2, seed + 7919);
    UniformPair out = first;
    out.u.insert(out.u.end(), second.u.begin(), second.u.end());
    out.v.insert(out.v.end(), second.v.begin(), second.v.end());
    return out;
}

} // namespace fixture
