#include "zbias/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "zbias/error.hpp"

namespace zbias {

namespace {

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

void require_probability(double x, const std::string& field) {
    if (!std::isfinite(x) || x < 0.0 || x > 1.0) {
        throw ValidationError("invariant violated: " + field + " = " + fmt(x) + " is not a probability in [0,1]");
    }
}

void require_finite(double x, const std::string& field) {
    if (!std::isfinite(x)) throw ValidationError("invariant violated: " + field + " is not finite");
}

void require_pmf(const std::vector<double>& pmf, const std::string& field) {
    if (pmf.empty()) throw ValidationError("invariant violated: " + field + " is empty");
    for (std::size_t i = 0; i < pmf.size(); ++i) {
        require_probability(pmf[i], field + "[" + std::to_string(i) + "]");
    }
    const double total = compensated_total(pmf);
    if (std::fabs(total - 1.0) > kValidationTol) {
        throw ValidationError("invariant violated: " + field + " sums to " + fmt(total) + ", expected 1");
    }
}

void require_increasing(const std::vector<double>& support, const std::string& field) {
    for (std::size_t i = 0; i < support.size(); ++i) {
        require_finite(support[i], field + "[" + std::to_string(i) + "]");
        if (i > 0 && !(support[i - 1] < support[i])) {
            throw ValidationError("invariant violated: " + field + " must be strictly increasing (position " +
                                  std::to_string(i) + ")");
        }
    }
}

std::string cell(const std::string& name, std::size_t i, std::size_t j) {
    return name + "[" + std::to_string(i) + "][" + std::to_string(j) + "]";
}

}  // namespace

double OutcomeLaw::mean() const {
    CompensatedSum s;
    for (std::size_t i = 0; i < values.size(); ++i) s += values[i] * probs[i];
    return s.value();
}

double OutcomeLaw::upper_tail(double y) const {
    CompensatedSum s;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] > y) s += probs[i];
    }
    return s.value();
}

void validate(const BinaryScenario& s) {
    require_probability(s.p_z, "pZ");
    require_probability(s.p_u, "pU");
    for (int z = 1; z >= 0; --z) {
        for (int u = 1; u >= 0; --u) {
            require_probability(s.p[z][u], "p" + std::to_string(z) + std::to_string(u));
        }
    }
    for (int a = 1; a >= 0; --a) {
        for (int u = 1; u >= 0; --u) {
            const std::string name = "r" + std::to_string(a) + std::to_string(u);
            if (s.binary_outcome) {
                require_probability(s.r[a][u], name);
            } else {
                require_finite(s.r[a][u], name);
            }
        }
    }
}

bool outcome_constant_in_z(const DiscreteScenario& s, double tol) {
    for (const auto& m : s.outcome_mean) {
        for (std::size_t i = 1; i < m.rows(); ++i) {
            for (std::size_t j = 0; j < m.cols(); ++j) {
                if (std::fabs(m(i, j) - m(0, j)) > tol) return false;
            }
        }
    }
    return true;
}

void validate(const DiscreteScenario& s) {
    require_increasing(s.z_support, "z_support");
    require_increasing(s.u_support, "u_support");
    if (s.z_pmf.size() != s.z_support.size()) {
        throw ValidationError("invariant violated: z_pmf has " + std::to_string(s.z_pmf.size()) +
                              " entries but z_support has " + std::to_string(s.z_support.size()));
    }
    if (s.u_pmf.size() != s.u_support.size()) {
        throw ValidationError("invariant violated: u_pmf has " + std::to_string(s.u_pmf.size()) +
                              " entries but u_support has " + std::to_string(s.u_support.size()));
    }
    require_pmf(s.z_pmf, "z_pmf");
    require_pmf(s.u_pmf, "u_pmf");

    const std::size_t nz = s.z_levels();
    const std::size_t nu = s.u_levels();
    if (s.treat.rows() != nz || s.treat.cols() != nu) {
        throw ValidationError("invariant violated: treat must be " + std::to_string(nz) + "x" + std::to_string(nu));
    }
    for (std::size_t i = 0; i < nz; ++i) {
        for (std::size_t j = 0; j < nu; ++j) require_probability(s.treat(i, j), cell("treat", i, j));
    }
    for (int a = 0; a < 2; ++a) {
        const Table& m = s.outcome_mean[a];
        if (m.rows() != nz || m.cols() != nu) {
            throw ValidationError("invariant violated: mean[" + std::to_string(a) + "] must be " +
                                  std::to_string(nz) + "x" + std::to_string(nu));
        }
        for (std::size_t i = 0; i < nz; ++i) {
            for (std::size_t j = 0; j < nu; ++j) {
                const std::string name = "mean[" + std::to_string(a) + "]" + cell("", i, j);
                if (s.binary_outcome) {
                    require_probability(m(i, j), name);
                } else {
                    require_finite(m(i, j), name);
                }
            }
        }
    }
    if (!s.direct_effect && !outcome_constant_in_z(s)) {
        throw ValidationError(
            "invariant violated: mean[a][i][j] varies with z although direct_effect is false (Z must be "
            "independent of Y given A and U)");
    }
    if (s.outcome_law) {
        for (int a = 0; a < 2; ++a) {
            const auto& laws = (*s.outcome_law)[a];
            if (laws.size() != nu) {
                throw ValidationError("invariant violated: law[" + std::to_string(a) + "] needs one entry per u-level");
            }
            for (std::size_t j = 0; j < nu; ++j) {
                const OutcomeLaw& law = laws[j];
                const std::string name = cell("law", static_cast<std::size_t>(a), j);
                if (law.values.empty() || law.values.size() != law.probs.size()) {
                    throw ValidationError("invariant violated: " + name + " is empty or malformed");
                }
                for (double v : law.values) require_finite(v, name);
                require_pmf(law.probs, name);
                const double mean = law.mean();
                for (std::size_t i = 0; i < nz; ++i) {
                    if (std::fabs(mean - s.outcome_mean[a](i, j)) > kValidationTol) {
                        throw ValidationError("invariant violated: " + name + " has mean " + fmt(mean) +
                                              " but mean[" + std::to_string(a) + "]" + cell("", i, j) + " = " +
                                              fmt(s.outcome_mean[a](i, j)));
                    }
                }
            }
        }
    }
}

void validate(const PotentialOutcomeScenario& s) {
    require_increasing(s.pi_support, "pi_support");
    for (std::size_t k = 0; k < s.pi_support.size(); ++k) {
        require_probability(s.pi_support[k], "pi_support[" + std::to_string(k) + "]");
    }
    if (s.pi_pmf.size() != s.pi_support.size()) {
        throw ValidationError("invariant violated: pi_pmf and pi_support differ in length");
    }
    require_pmf(s.pi_pmf, "pi_pmf");
    if (s.pairs.empty()) throw ValidationError("invariant violated: y_pairs is empty");
    std::vector<double> q;
    q.reserve(s.pairs.size());
    for (std::size_t j = 0; j < s.pairs.size(); ++j) {
        require_finite(s.pairs[j].y1, "y_pairs[" + std::to_string(j) + "].y1");
        require_finite(s.pairs[j].y0, "y_pairs[" + std::to_string(j) + "].y0");
        q.push_back(s.pairs[j].prob);
    }
    require_pmf(q, "y_pairs");
    if (s.treat.rows() != s.pi_support.size() || s.treat.cols() != s.pairs.size()) {
        throw ValidationError("invariant violated: treat must be " + std::to_string(s.pi_support.size()) + "x" +
                              std::to_string(s.pairs.size()));
    }
    for (std::size_t k = 0; k < s.treat.rows(); ++k) {
        CompensatedSum avg;
        for (std::size_t j = 0; j < s.treat.cols(); ++j) {
            require_probability(s.treat(k, j), cell("treat", k, j));
            avg += s.treat(k, j) * q[j];
        }
        if (std::fabs(avg.value() - s.pi_support[k]) > kValidationTol) {
            throw ValidationError("invariant violated: Pr(A=1|Pi) = Pi fails at pi_support[" + std::to_string(k) +
                                  "]: sum_j treat[" + std::to_string(k) + "][j] * prob_j = " + fmt(avg.value()) +
                                  " but pi = " + fmt(s.pi_support[k]));
        }
    }
}

void validate(const CovariateFamily& f) {
    if (f.strata.empty()) throw ValidationError("invariant violated: covariate family has no strata");
    std::vector<double> w;
    for (const Stratum& st : f.strata) {
        w.push_back(st.weight);
        try {
            validate(st.scenario);
        } catch (const ValidationError& e) {
            throw ValidationError("stratum '" + st.label + "': " + e.what());
        }
    }
    require_pmf(w, "stratum weights");
}

DiscreteScenario to_discrete(const BinaryScenario& b) {
    DiscreteScenario d;
    d.z_support = {0.0, 1.0};
    d.z_pmf = {1.0 - b.p_z, b.p_z};
    d.u_support = {0.0, 1.0};
    d.u_pmf = {1.0 - b.p_u, b.p_u};
    d.treat = Table(2, 2);
    for (std::size_t z = 0; z < 2; ++z) {
        for (std::size_t u = 0; u < 2; ++u) d.treat(z, u) = b.p[z][u];
    }
    for (std::size_t a = 0; a < 2; ++a) {
        d.outcome_mean[a] = Table(2, 2);
        for (std::size_t z = 0; z < 2; ++z) {
            for (std::size_t u = 0; u < 2; ++u) d.outcome_mean[a](z, u) = b.r[a][u];
        }
    }
    d.binary_outcome = b.binary_outcome;
    return d;
}

std::vector<double> propensity(const DiscreteScenario& s) {
    std::vector<double> pi(s.z_levels());
    for (std::size_t i = 0; i < s.z_levels(); ++i) {
        CompensatedSum acc;
        for (std::size_t j = 0; j < s.u_levels(); ++j) acc += s.treat(i, j) * s.u_pmf[j];
        pi[i] = std::clamp(acc.value(), 0.0, 1.0);
    }
    return pi;
}

std::vector<double> treatment_given_u(const DiscreteScenario& s) {
    std::vector<double> out(s.u_levels());
    for (std::size_t j = 0; j < s.u_levels(); ++j) {
        CompensatedSum acc;
        for (std::size_t i = 0; i < s.z_levels(); ++i) acc += s.treat(i, j) * s.z_pmf[i];
        out[j] = std::clamp(acc.value(), 0.0, 1.0);
    }
    return out;
}

DiscreteScenario collapse_by_propensity(const DiscreteScenario& s, double tol) {
    if (!(tol >= 0.0)) throw ValidationError("propensity merge tolerance must be nonnegative");
    const std::vector<double> pi = propensity(s);
    std::vector<std::size_t> order(pi.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pi[a] < pi[b]; });

    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t idx : order) {
        if (!groups.empty() && pi[idx] - pi[groups.back().back()] <= tol) {
            groups.back().push_back(idx);
        } else {
            groups.push_back({idx});
        }
    }

    const std::size_t nu = s.u_levels();
    DiscreteScenario out;
    out.u_support = s.u_support;
    out.u_pmf = s.u_pmf;
    out.outcome_law = s.outcome_law;
    out.binary_outcome = s.binary_outcome;
    out.direct_effect = s.direct_effect;
    out.treat = Table(groups.size(), nu);
    out.outcome_mean = {Table(groups.size(), nu), Table(groups.size(), nu)};

    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto& members = groups[g];
        CompensatedSum mass;
        for (std::size_t i : members) mass += s.z_pmf[i];
        const double total = mass.value();
        // Zero-mass groups fall back to an unweighted average.
        auto weight = [&](std::size_t i) {
            return total > 0.0 ? s.z_pmf[i] / total : 1.0 / static_cast<double>(members.size());
        };

        CompensatedSum pi_avg;
        for (std::size_t i : members) pi_avg += weight(i) * pi[i];
        out.z_support.push_back(pi_avg.value());
        out.z_pmf.push_back(total);

        for (std::size_t j = 0; j < nu; ++j) {
            CompensatedSum t;
            for (std::size_t i : members) t += weight(i) * s.treat(i, j);
            out.treat(g, j) = t.value();

            for (int a = 0; a < 2; ++a) {
                // E(Y | A=a, merged level, U=u_j) weights each constituent by Pr(Z=z, A=a | U=u_j).
                CompensatedSum num;
                CompensatedSum den;
                for (std::size_t i : members) {
                    const double arm = a == 1 ? s.treat(i, j) : 1.0 - s.treat(i, j);
                    num += weight(i) * arm * s.outcome_mean[a](i, j);
                    den += weight(i) * arm;
                }
                if (den.value() > 0.0) {
                    out.outcome_mean[a](g, j) = num.value() / den.value();
                } else {
                    CompensatedSum plain;
                    for (std::size_t i : members) plain += weight(i) * s.outcome_mean[a](i, j);
                    out.outcome_mean[a](g, j) = plain.value();
                }
            }
        }
    }
    return out;
}

}  // namespace zbias
