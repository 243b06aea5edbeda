#pragma once

// Random scenario generators for property sweeps.

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "zbias/scenario.hpp"

namespace gen {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Strictly positive pmf; last entry absorbs rounding so the sum is exactly 1 up to one ulp.
inline std::vector<double> pmf(Rng& rng, std::size_t n) {
    std::vector<double> w(n);
    for (double& x : w) x = uniform(rng, 0.05, 1.0);
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        w[i] /= total;
        acc += w[i];
    }
    w[n - 1] = 1.0 - acc;
    return w;
}

inline std::vector<double> support(std::size_t n) {
    std::vector<double> s(n);
    std::iota(s.begin(), s.end(), 0.0);
    return s;
}

/// All ten probabilities uniform, with Z and U kept away from degenerate laws.
inline zbias::BinaryScenario binary(Rng& rng) {
    zbias::BinaryScenario s;
    s.p_z = uniform(rng, 0.02, 0.98);
    s.p_u = uniform(rng, 0.02, 0.98);
    for (auto& row : s.p)
        for (double& x : row) x = uniform(rng, 0.01, 0.99);
    for (auto& row : s.r)
        for (double& x : row) x = uniform(rng);
    return s;
}

inline void sort_increasing(double& lo, double& hi) {
    if (lo > hi) std::swap(lo, hi);
}

/// Interaction-free binary scenario with monotone effects of Z and U on A and
/// of U on Y. `multiplicative` picks p11 p00 = p10 p01 instead of p11 - p10 - p01 + p00 = 0.
inline zbias::BinaryScenario no_interaction(Rng& rng, bool multiplicative) {
    for (;;) {
        zbias::BinaryScenario s = binary(rng);
        const double p00 = s.p[0][0];
        const double p10 = uniform(rng, p00, 1.0);
        const double p01 = uniform(rng, p00, 1.0);
        const double p11 = multiplicative ? p10 * p01 / p00 : p10 + p01 - p00;
        if (p11 > 1.0) continue;
        s.p[1][1] = p11;
        s.p[1][0] = p10;
        s.p[0][1] = p01;
        sort_increasing(s.r[1][0], s.r[1][1]);
        sort_increasing(s.r[0][0], s.r[0][1]);
        return s;
    }
}

/// Discrete scenario with random laws; treat in (0.02, 0.98) and outcome
/// means constant in z. Optionally monotone in the directions of the
/// scalar-case theorem (treat increasing in z and u, means increasing in u).
inline zbias::DiscreteScenario discrete(Rng& rng, std::size_t nz, std::size_t nu, bool monotone = false) {
    zbias::DiscreteScenario s;
    s.z_support = support(nz);
    s.u_support = support(nu);
    s.z_pmf = pmf(rng, nz);
    s.u_pmf = pmf(rng, nu);
    s.treat = zbias::Table(nz, nu);
    for (std::size_t i = 0; i < nz; ++i)
        for (std::size_t j = 0; j < nu; ++j) s.treat(i, j) = uniform(rng, 0.02, 0.98);
    std::array<std::vector<double>, 2> m;
    for (int a = 0; a < 2; ++a) {
        m[a].resize(nu);
        for (double& x : m[a]) x = uniform(rng, -1.0, 2.0);
    }
    if (monotone) {
        // Sort each row, then each column, giving a table increasing in both indices.
        for (std::size_t i = 0; i < nz; ++i) {
            std::vector<double> row(nu);
            for (std::size_t j = 0; j < nu; ++j) row[j] = s.treat(i, j);
            std::sort(row.begin(), row.end());
            for (std::size_t j = 0; j < nu; ++j) s.treat(i, j) = row[j];
        }
        for (std::size_t j = 0; j < nu; ++j) {
            std::vector<double> col(nz);
            for (std::size_t i = 0; i < nz; ++i) col[i] = s.treat(i, j);
            std::sort(col.begin(), col.end());
            for (std::size_t i = 0; i < nz; ++i) s.treat(i, j) = col[i];
        }
        for (auto& v : m) std::sort(v.begin(), v.end());
    }
    for (int a = 0; a < 2; ++a) {
        s.outcome_mean[a] = zbias::Table(nz, nu);
        for (std::size_t i = 0; i < nz; ++i)
            for (std::size_t j = 0; j < nu; ++j) s.outcome_mean[a](i, j) = m[a][j];
    }
    return s;
}

/// Binary potential outcomes under pr(A=1 | pi, y1, y0) = alpha + pi + delta y1 + eta y0 + theta y1 y0
/// with delta, eta, theta >= 0, OR_Y >= 1 and alpha = -E(delta Y1 + eta Y0 + theta Y1 Y0).
inline zbias::PotentialOutcomeScenario cor3(Rng& rng, std::size_t levels) {
    zbias::PotentialOutcomeScenario s;
    // Joint of (Y1, Y0) with q11 q00 >= q10 q01.
    double q11, q10, q01, q00;
    do {
        const std::vector<double> q = pmf(rng, 4);
        q11 = q[0], q10 = q[1], q01 = q[2], q00 = q[3];
    } while (q11 * q00 < q10 * q01);
    const double delta = uniform(rng, 0.0, 0.15);
    const double eta = uniform(rng, 0.0, 0.15);
    const double theta = uniform(rng, 0.0, 0.15);
    const double alpha = -(delta * (q11 + q10) + eta * (q11 + q01) + theta * q11);
    const double lo = std::max(-alpha, 0.01), hi = std::min(1.0 - alpha - delta - eta - theta, 0.99);
    std::vector<double> pis(levels);
    for (double& p : pis) p = uniform(rng, lo, hi);
    std::sort(pis.begin(), pis.end());
    pis.erase(std::unique(pis.begin(), pis.end()), pis.end());
    s.pi_support = pis;
    s.pi_pmf = pmf(rng, pis.size());
    s.pairs = {{1, 1, q11}, {1, 0, q10}, {0, 1, q01}, {0, 0, q00}};
    s.treat = zbias::Table(pis.size(), 4);
    for (std::size_t k = 0; k < pis.size(); ++k) {
        for (std::size_t j = 0; j < 4; ++j) {
            const double y1 = s.pairs[j].y1, y0 = s.pairs[j].y0;
            s.treat(k, j) = std::clamp(alpha + pis[k] + delta * y1 + eta * y0 + theta * y1 * y0, 0.0, 1.0);
        }
    }
    return s;
}

}  // namespace gen
