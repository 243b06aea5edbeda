#include "zbias/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "zbias/error.hpp"

namespace zbias {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

double arm_prob(double treat, int arm) { return arm == 1 ? treat : 1.0 - treat; }

void require_nondegenerate(double f) {
    if (!(f > 0.0 && f < 1.0)) {
        throw DegenerateError("degenerate population: Pr(A=1) = " + fmt(f) +
                              "; treated/control conditional estimands are undefined");
    }
}

/// Building blocks shared by the difference and ratio scales.
struct Moments {
    double f = 0.0;
    double y_treated = 0.0;       // E(Y | A=1)
    double y_control = 0.0;       // E(Y | A=0)
    double y0_treated = 0.0;      // E{Y(0) | A=1}
    double y1_control = 0.0;      // E{Y(1) | A=0}
    double y1_all = 0.0;          // E{Y(1)}
    double y0_all = 0.0;          // E{Y(0)}
    double adj0_treated = 0.0;    // int mu_0(z) F(dz | A=1)
    double adj1_control = 0.0;    // int mu_1(z) F(dz | A=0)
    double adj1_all = 0.0;        // int mu_1(z) F(dz)
    double adj0_all = 0.0;        // int mu_0(z) F(dz)
};

/// Observational and potential-outcome moments. Ignorability holds given
/// (Z, U), so E{Y(a) | A=a', Z=z, U=u} = E(Y | A=a, Z=z, U=u).
void observational_moments(const DiscreteScenario& s, Moments& m) {
    CompensatedSum f, y1a1, y0a0, y0a1, y1a0, y1, y0;
    for (std::size_t i = 0; i < s.z_levels(); ++i) {
        for (std::size_t j = 0; j < s.u_levels(); ++j) {
            const double w = s.z_pmf[i] * s.u_pmf[j];
            const double t = s.treat(i, j);
            const double m1 = s.outcome_mean[1](i, j);
            const double m0 = s.outcome_mean[0](i, j);
            f += w * t;
            y1a1 += w * t * m1;
            y0a0 += w * (1.0 - t) * m0;
            y0a1 += w * t * m0;
            y1a0 += w * (1.0 - t) * m1;
            y1 += w * m1;
            y0 += w * m0;
        }
    }
    m.f = f.value();
    require_nondegenerate(m.f);
    m.y_treated = y1a1.value() / m.f;
    m.y_control = y0a0.value() / (1.0 - m.f);
    m.y0_treated = y0a1.value() / m.f;
    m.y1_control = y1a0.value() / (1.0 - m.f);
    m.y1_all = y1.value();
    m.y0_all = y0.value();
}

void adjusted_moments(const DiscreteScenario& s, double f, Moments& m) {
    const std::vector<double> pi = propensity(s);
    const std::vector<double> mu1 = stratum_means(s, 1);
    const std::vector<double> mu0 = stratum_means(s, 0);
    CompensatedSum a0t, a1c, a1, a0;
    for (std::size_t i = 0; i < s.z_levels(); ++i) {
        const double p = s.z_pmf[i];
        if (p == 0.0) continue;
        a0t += p * pi[i] * mu0[i];
        a1c += p * (1.0 - pi[i]) * mu1[i];
        a1 += p * mu1[i];
        a0 += p * mu0[i];
    }
    m.adj0_treated = a0t.value() / f;
    m.adj1_control = a1c.value() / (1.0 - f);
    m.adj1_all = a1.value();
    m.adj0_all = a0.value();
}

Moments moments(const DiscreteScenario& s, Conditioning conditioning) {
    Moments m;
    observational_moments(s, m);
    if (conditioning == Conditioning::OnPropensity) {
        adjusted_moments(collapse_by_propensity(s), m.f, m);
    } else {
        adjusted_moments(s, m.f, m);
    }
    return m;
}

EstimateSet difference_scale(const Moments& m, Conditioning conditioning) {
    EstimateSet e;
    e.f = m.f;
    e.conditioning = conditioning;
    e.true_treated = m.y_treated - m.y0_treated;
    e.true_control = m.y1_control - m.y_control;
    e.true_all = m.y1_all - m.y0_all;
    e.unadj = m.y_treated - m.y_control;
    e.adj_treated = m.y_treated - m.adj0_treated;
    e.adj_control = m.adj1_control - m.y_control;
    e.adj_all = m.adj1_all - m.adj0_all;
    return e;
}

double covariance(const std::vector<double>& pmf, const std::vector<double>& x, const std::vector<double>& y) {
    CompensatedSum ex, ey, exy;
    for (std::size_t i = 0; i < pmf.size(); ++i) {
        if (pmf[i] == 0.0) continue;
        ex += pmf[i] * x[i];
        ey += pmf[i] * y[i];
    }
    const double mx = ex.value();
    const double my = ey.value();
    for (std::size_t i = 0; i < pmf.size(); ++i) {
        if (pmf[i] == 0.0) continue;
        exy += pmf[i] * (x[i] - mx) * (y[i] - my);
    }
    return exy.value();
}

}  // namespace

std::string_view to_string(Conditioning c) noexcept {
    return c == Conditioning::OnZ ? "on_z" : "on_propensity";
}

Conditioning parse_conditioning(std::string_view text) {
    if (text == "on_z") return Conditioning::OnZ;
    if (text == "on_propensity") return Conditioning::OnPropensity;
    throw ValidationError("unknown conditioning '" + std::string(text) + "' (expected on_z or on_propensity)");
}

void check_convex_combination(const EffectSlots& e) {
    auto close = [](double lhs, double rhs) {
        const double scale = std::max({1.0, std::fabs(lhs), std::fabs(rhs)});
        return std::fabs(lhs - rhs) <= kIdentityTol * scale;
    };
    if (!close(e.true_all, e.f * e.true_treated + (1.0 - e.f) * e.true_control)) {
        throw std::logic_error("convex-combination identity violated for the true effects");
    }
    if (!close(e.adj_all, e.f * e.adj_treated + (1.0 - e.f) * e.adj_control)) {
        throw std::logic_error("convex-combination identity violated for the adjusted estimators");
    }
}

double treated_fraction(const DiscreteScenario& s) {
    CompensatedSum f;
    for (std::size_t i = 0; i < s.z_levels(); ++i) {
        for (std::size_t j = 0; j < s.u_levels(); ++j) f += s.z_pmf[i] * s.u_pmf[j] * s.treat(i, j);
    }
    return f.value();
}

std::vector<double> stratum_means(const DiscreteScenario& s, int arm) {
    std::vector<double> mu(s.z_levels(), kNaN);
    for (std::size_t i = 0; i < s.z_levels(); ++i) {
        if (s.z_pmf[i] == 0.0) continue;
        CompensatedSum num, den;
        for (std::size_t j = 0; j < s.u_levels(); ++j) {
            const double w = s.u_pmf[j] * arm_prob(s.treat(i, j), arm);
            num += w * s.outcome_mean[arm](i, j);
            den += w;
        }
        if (!(den.value() > 0.0)) {
            throw UndefinedStratumError("undefined stratum: E(Y|A=" + std::to_string(arm) + ", Z=" +
                                        fmt(s.z_support[i]) + ") with Pr(A=" + std::to_string(arm) +
                                        "|Z=z) = 0 (a=" + std::to_string(arm) + ", z index " + std::to_string(i) +
                                        ")");
        }
        mu[i] = num.value() / den.value();
    }
    return mu;
}

std::vector<double> outcome_given_u(const DiscreteScenario& s, int arm) {
    std::vector<double> m(s.u_levels());
    for (std::size_t j = 0; j < s.u_levels(); ++j) {
        CompensatedSum num, den, plain;
        for (std::size_t i = 0; i < s.z_levels(); ++i) {
            const double w = s.z_pmf[i] * arm_prob(s.treat(i, j), arm);
            num += w * s.outcome_mean[arm](i, j);
            den += w;
            plain += s.z_pmf[i] * s.outcome_mean[arm](i, j);
        }
        m[j] = den.value() > 0.0 ? num.value() / den.value() : plain.value();
    }
    return m;
}

PopulationTriple true_ace(const DiscreteScenario& s) {
    Moments m;
    observational_moments(s, m);
    return {m.y_treated - m.y0_treated, m.y1_control - m.y_control, m.y1_all - m.y0_all};
}

double unadjusted_ace(const DiscreteScenario& s) {
    Moments m;
    observational_moments(s, m);
    return m.y_treated - m.y_control;
}

PopulationTriple adjusted_ace(const DiscreteScenario& s, Conditioning conditioning) {
    const EstimateSet e = difference_scale(moments(s, conditioning), conditioning);
    return e.adjusted();
}

PopulationTriple adjusted_minus_unadjusted_via_covariance(const DiscreteScenario& s, Conditioning conditioning) {
    const DiscreteScenario collapsed =
        conditioning == Conditioning::OnPropensity ? collapse_by_propensity(s) : DiscreteScenario{};
    const DiscreteScenario& base = conditioning == Conditioning::OnPropensity ? collapsed : s;
    const double f = treated_fraction(base);
    require_nondegenerate(f);
    const std::vector<double> pi = propensity(base);
    const double cov0 = covariance(base.z_pmf, pi, stratum_means(base, 0));
    const double cov1 = covariance(base.z_pmf, pi, stratum_means(base, 1));
    return {-cov0 / (f * (1.0 - f)), -cov1 / (f * (1.0 - f)), -cov0 / (1.0 - f) - cov1 / f};
}

EstimateSet estimates(const DiscreteScenario& s, Conditioning conditioning) {
    EstimateSet e = difference_scale(moments(s, conditioning), conditioning);
    check_convex_combination(e);
    return e;
}

EstimateSet estimates(const BinaryScenario& s, Conditioning conditioning) {
    return estimates(to_discrete(s), conditioning);
}

DiscreteScenario dichotomize(const DiscreteScenario& s, double threshold) {
    if (!std::isfinite(threshold)) throw ValidationError("DCE threshold must be finite");
    DiscreteScenario out = s;
    if (s.outcome_law) {
        std::array<std::vector<OutcomeLaw>, 2> laws;
        for (int a = 0; a < 2; ++a) {
            for (std::size_t j = 0; j < s.u_levels(); ++j) {
                const double tail = (*s.outcome_law)[a][j].upper_tail(threshold);
                laws[a].push_back(OutcomeLaw{{0.0, 1.0}, {1.0 - tail, tail}});
                for (std::size_t i = 0; i < s.z_levels(); ++i) out.outcome_mean[a](i, j) = tail;
            }
        }
        out.outcome_law = std::move(laws);
    } else if (s.binary_outcome) {
        for (int a = 0; a < 2; ++a) {
            for (std::size_t i = 0; i < s.z_levels(); ++i) {
                for (std::size_t j = 0; j < s.u_levels(); ++j) {
                    const double m = s.outcome_mean[a](i, j);
                    out.outcome_mean[a](i, j) = threshold < 0.0 ? 1.0 : (threshold < 1.0 ? m : 0.0);
                }
            }
        }
    } else {
        throw ValidationError("missing outcome law: distributional effects need law[a][j] for a non-binary outcome");
    }
    out.binary_outcome = true;
    return out;
}

DceSet dce(const DiscreteScenario& s, double threshold, Conditioning conditioning) {
    DceSet out;
    static_cast<EffectSlots&>(out) = estimates(dichotomize(s, threshold), conditioning);
    out.threshold = threshold;
    return out;
}

RrSet rr(const DiscreteScenario& s, Conditioning conditioning) {
    for (int a = 0; a < 2; ++a) {
        for (double v : s.outcome_mean[a].data()) {
            if (v < 0.0) {
                throw ValidationError("ratio measures require binary or nonnegative outcomes; found mean " + fmt(v));
            }
        }
    }
    const Moments m = moments(s, conditioning);
    auto ratio = [](double num, double den, const char* slot) {
        if (!(den > 0.0)) throw DegenerateError(std::string("zero denominator in ratio slot ") + slot);
        return num / den;
    };
    RrSet out;
    out.f = m.f;
    out.conditioning = conditioning;
    out.true_treated = ratio(m.y_treated, m.y0_treated, "true_treated");
    out.true_control = ratio(m.y1_control, m.y_control, "true_control");
    out.true_all = ratio(m.y1_all, m.y0_all, "true_all");
    out.unadj = ratio(m.y_treated, m.y_control, "unadj");
    out.adj_treated = ratio(m.y_treated, m.adj0_treated, "adj_treated");
    out.adj_control = ratio(m.adj1_control, m.y_control, "adj_control");
    out.adj_all = ratio(m.adj1_all, m.adj0_all, "adj_all");
    return out;
}

EstimateSet covariate_average(const CovariateFamily& fam, Conditioning conditioning) {
    CompensatedSum treated_mass, control_mass;
    CompensatedSum t_treated, t_control, t_all, unadj, a_treated, a_control, a_all;
    bool any = false;
    for (const Stratum& st : fam.strata) {
        if (st.weight == 0.0) continue;
        EstimateSet e;
        try {
            e = estimates(st.scenario, conditioning);
        } catch (const DegenerateError& err) {
            throw DegenerateError("stratum '" + st.label + "': " + err.what());
        } catch (const UndefinedStratumError& err) {
            throw UndefinedStratumError("stratum '" + st.label + "': " + err.what());
        }
        any = true;
        const double wt = st.weight * e.f;
        const double wc = st.weight * (1.0 - e.f);
        treated_mass += wt;
        control_mass += wc;
        t_treated += wt * e.true_treated;
        a_treated += wt * e.adj_treated;
        t_control += wc * e.true_control;
        a_control += wc * e.adj_control;
        t_all += st.weight * e.true_all;
        a_all += st.weight * e.adj_all;
        unadj += st.weight * e.unadj;
    }
    if (!any) throw DegenerateError("covariate family has no stratum with positive weight");
    const double ft = treated_mass.value();
    const double fc = control_mass.value();
    EstimateSet out;
    out.conditioning = conditioning;
    out.f = ft;
    out.true_treated = t_treated.value() / ft;
    out.true_control = t_control.value() / fc;
    out.true_all = t_all.value();
    out.unadj = unadj.value();
    out.adj_treated = a_treated.value() / ft;
    out.adj_control = a_control.value() / fc;
    out.adj_all = a_all.value();
    check_convex_combination(out);
    return out;
}

double treated_fraction(const PotentialOutcomeScenario& s) {
    CompensatedSum f;
    for (std::size_t k = 0; k < s.pi_support.size(); ++k) f += s.pi_pmf[k] * s.pi_support[k];
    return f.value();
}

std::vector<double> propensity_stratum_means(const PotentialOutcomeScenario& s, int arm) {
    std::vector<double> nu(s.pi_support.size(), kNaN);
    for (std::size_t k = 0; k < s.pi_support.size(); ++k) {
        if (s.pi_pmf[k] == 0.0) continue;
        CompensatedSum num, den;
        for (std::size_t j = 0; j < s.pairs.size(); ++j) {
            const double w = s.pairs[j].prob * arm_prob(s.treat(k, j), arm);
            num += w * (arm == 1 ? s.pairs[j].y1 : s.pairs[j].y0);
            den += w;
        }
        if (!(den.value() > 0.0)) {
            throw UndefinedStratumError("undefined stratum: E(Y|A=" + std::to_string(arm) + ", Pi=" +
                                        fmt(s.pi_support[k]) + ") has an empty conditioning event");
        }
        nu[k] = num.value() / den.value();
    }
    return nu;
}

EstimateSet po_estimates(const PotentialOutcomeScenario& s) {
    CompensatedSum f, y1a1, y0a0, y0a1, y1a0;
    for (std::size_t k = 0; k < s.pi_support.size(); ++k) {
        for (std::size_t j = 0; j < s.pairs.size(); ++j) {
            const double w = s.pi_pmf[k] * s.pairs[j].prob;
            const double t = s.treat(k, j);
            f += w * t;
            y1a1 += w * t * s.pairs[j].y1;
            y0a1 += w * t * s.pairs[j].y0;
            y1a0 += w * (1.0 - t) * s.pairs[j].y1;
            y0a0 += w * (1.0 - t) * s.pairs[j].y0;
        }
    }
    CompensatedSum y1, y0;
    for (const OutcomePair& p : s.pairs) {
        y1 += p.prob * p.y1;
        y0 += p.prob * p.y0;
    }
    const double fv = f.value();
    require_nondegenerate(fv);
    const double y_treated = y1a1.value() / fv;
    const double y_control = y0a0.value() / (1.0 - fv);

    const std::vector<double> nu1 = propensity_stratum_means(s, 1);
    const std::vector<double> nu0 = propensity_stratum_means(s, 0);
    CompensatedSum a0t, a1c, a1, a0;
    for (std::size_t k = 0; k < s.pi_support.size(); ++k) {
        const double p = s.pi_pmf[k];
        if (p == 0.0) continue;
        const double pi = s.pi_support[k];
        a0t += p * pi * nu0[k];
        a1c += p * (1.0 - pi) * nu1[k];
        a1 += p * nu1[k];
        a0 += p * nu0[k];
    }

    EstimateSet e;
    e.f = fv;
    e.conditioning = Conditioning::OnPropensity;
    e.true_treated = y_treated - y0a1.value() / fv;
    e.true_control = y1a0.value() / (1.0 - fv) - y_control;
    e.true_all = y1.value() - y0.value();
    e.unadj = y_treated - y_control;
    e.adj_treated = y_treated - a0t.value() / fv;
    e.adj_control = a1c.value() / (1.0 - fv) - y_control;
    e.adj_all = a1.value() - a0.value();
    check_convex_combination(e);
    return e;
}

}  // namespace zbias
