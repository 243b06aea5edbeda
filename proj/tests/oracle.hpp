#pragma once

// Brute-force reference implementations. They enumerate joint cells directly
// and share no code with the library beyond the scenario structs.

#include <array>
#include <cmath>
#include <vector>

#include "zbias/scenario.hpp"

namespace oracle {

struct Slots {
    double true_treated, true_control, true_all, unadj, adj_treated, adj_control, adj_all, f;
};

inline double bern(double p, int x) { return x ? p : 1.0 - p; }

/// Joint law of the 16 cells (z, u, a, y) of a binary scenario with binary Y.
/// Counterfactual means come from E(Y | A=a, U=u) read off the joint, which is
/// valid because Y(a) is independent of (A, Z) given U.
inline Slots binary(const zbias::BinaryScenario& s) {
    double joint[2][2][2][2] = {};  // [z][u][a][y]
    for (int z = 0; z < 2; ++z)
        for (int u = 0; u < 2; ++u)
            for (int a = 0; a < 2; ++a)
                for (int y = 0; y < 2; ++y)
                    joint[z][u][a][y] = bern(s.p_z, z) * bern(s.p_u, u) * bern(s.p[z][u], a) * bern(s.r[a][u], y);

    auto mass = [&](int z, int u, int a, int y) {
        double t = 0.0;
        for (int zz = 0; zz < 2; ++zz)
            for (int uu = 0; uu < 2; ++uu)
                for (int aa = 0; aa < 2; ++aa)
                    for (int yy = 0; yy < 2; ++yy)
                        if ((z < 0 || z == zz) && (u < 0 || u == uu) && (a < 0 || a == aa) && (y < 0 || y == yy))
                            t += joint[zz][uu][aa][yy];
        return t;
    };
    constexpr int any = -1;
    Slots out{};
    out.f = mass(any, any, 1, any);

    double m[2][2];  // E(Y | A=a, U=u)
    for (int a = 0; a < 2; ++a)
        for (int u = 0; u < 2; ++u) m[a][u] = mass(any, u, a, 1) / mass(any, u, a, any);

    auto truth = [&](int arm) {
        double t = 0.0;
        const double denom = arm < 0 ? 1.0 : mass(any, any, arm, any);
        for (int u = 0; u < 2; ++u) {
            const double w = (arm < 0 ? mass(any, u, any, any) : mass(any, u, arm, any)) / denom;
            t += w * (m[1][u] - m[0][u]);
        }
        return t;
    };
    out.true_treated = truth(1);
    out.true_control = truth(0);
    out.true_all = truth(any);
    out.unadj = mass(any, any, 1, 1) / mass(any, any, 1, any) - mass(any, any, 0, 1) / mass(any, any, 0, any);

    auto adjusted = [&](int arm) {
        double t = 0.0;
        const double denom = arm < 0 ? 1.0 : mass(any, any, arm, any);
        for (int z = 0; z < 2; ++z) {
            const double w = (arm < 0 ? mass(z, any, any, any) : mass(z, any, arm, any)) / denom;
            const double mu1 = mass(z, any, 1, 1) / mass(z, any, 1, any);
            const double mu0 = mass(z, any, 0, 1) / mass(z, any, 0, any);
            t += w * (mu1 - mu0);
        }
        return t;
    };
    out.adj_treated = adjusted(1);
    out.adj_control = adjusted(0);
    out.adj_all = adjusted(any);
    return out;
}

/// Enumeration over (z, u, a) cells of a discrete scenario, adjusting on Z.
inline Slots discrete(const zbias::DiscreteScenario& s) {
    const std::size_t nz = s.z_levels(), nu = s.u_levels();
    // w[a][i][j] = Pr(Z=z_i, U=u_j, A=a)
    std::vector<double> w[2];
    for (int a = 0; a < 2; ++a) w[a].assign(nz * nu, 0.0);
    for (std::size_t i = 0; i < nz; ++i)
        for (std::size_t j = 0; j < nu; ++j) {
            const double base = s.z_pmf[i] * s.u_pmf[j];
            w[1][i * nu + j] = base * s.treat(i, j);
            w[0][i * nu + j] = base * (1.0 - s.treat(i, j));
        }
    auto effect = [&](std::size_t i, std::size_t j) { return s.outcome_mean[1](i, j) - s.outcome_mean[0](i, j); };

    Slots out{};
    double arm_mass[2] = {0.0, 0.0}, arm_y[2] = {0.0, 0.0}, eff[2] = {0.0, 0.0}, eff_all = 0.0;
    for (int a = 0; a < 2; ++a)
        for (std::size_t i = 0; i < nz; ++i)
            for (std::size_t j = 0; j < nu; ++j) {
                const double c = w[a][i * nu + j];
                arm_mass[a] += c;
                arm_y[a] += c * s.outcome_mean[a](i, j);
                eff[a] += c * effect(i, j);
                eff_all += c * effect(i, j);
            }
    out.f = arm_mass[1];
    out.true_treated = eff[1] / arm_mass[1];
    out.true_control = eff[0] / arm_mass[0];
    out.true_all = eff_all;
    out.unadj = arm_y[1] / arm_mass[1] - arm_y[0] / arm_mass[0];

    double adj[3] = {0.0, 0.0, 0.0};  // treated, control, all
    for (std::size_t i = 0; i < nz; ++i) {
        double za[2] = {0.0, 0.0}, zy[2] = {0.0, 0.0};
        for (int a = 0; a < 2; ++a)
            for (std::size_t j = 0; j < nu; ++j) {
                za[a] += w[a][i * nu + j];
                zy[a] += w[a][i * nu + j] * s.outcome_mean[a](i, j);
            }
        if (s.z_pmf[i] == 0.0) continue;
        const double d = zy[1] / za[1] - zy[0] / za[0];
        adj[0] += za[1] / arm_mass[1] * d;
        adj[1] += za[0] / arm_mass[0] * d;
        adj[2] += s.z_pmf[i] * d;
    }
    out.adj_treated = adj[0];
    out.adj_control = adj[1];
    out.adj_all = adj[2];
    return out;
}

/// Enumeration over (pi, y1, y0, a) for a potential-outcome scenario.
inline Slots potential_outcomes(const zbias::PotentialOutcomeScenario& s) {
    const std::size_t nk = s.pi_support.size(), np = s.pairs.size();
    double arm_mass[2] = {0, 0}, arm_y[2] = {0, 0}, eff[2] = {0, 0}, eff_all = 0;
    std::vector<std::array<double, 2>> level_mass(nk, {0, 0}), level_y(nk, {0, 0});
    for (std::size_t k = 0; k < nk; ++k)
        for (std::size_t j = 0; j < np; ++j)
            for (int a = 0; a < 2; ++a) {
                const auto& p = s.pairs[j];
                const double c = s.pi_pmf[k] * p.prob * bern(s.treat(k, j), a);
                const double y = a ? p.y1 : p.y0;
                arm_mass[a] += c;
                arm_y[a] += c * y;
                eff[a] += c * (p.y1 - p.y0);
                eff_all += c * (p.y1 - p.y0);
                level_mass[k][a] += c;
                level_y[k][a] += c * y;
            }
    Slots out{};
    out.f = arm_mass[1];
    out.true_treated = eff[1] / arm_mass[1];
    out.true_control = eff[0] / arm_mass[0];
    out.true_all = eff_all;
    out.unadj = arm_y[1] / arm_mass[1] - arm_y[0] / arm_mass[0];
    for (std::size_t k = 0; k < nk; ++k) {
        if (s.pi_pmf[k] == 0.0) continue;
        const double d = level_y[k][1] / level_mass[k][1] - level_y[k][0] / level_mass[k][0];
        out.adj_treated += level_mass[k][1] / arm_mass[1] * d;
        out.adj_control += level_mass[k][0] / arm_mass[0] * d;
        out.adj_all += s.pi_pmf[k] * d;
    }
    return out;
}

}  // namespace oracle
