#include "zbias/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
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

std::string idx(const char* name, std::size_t i) { return std::string(name) + "[" + std::to_string(i) + "]"; }

/// Accumulates slacks for one condition. A slack below -kIdentityTol is a violation.
class ReportBuilder {
public:
    explicit ReportBuilder(std::string id) { report_.condition_id = std::move(id); }

    void slack(double value, std::string cell, double lhs, double rhs) {
        margin_ = margin_ ? std::min(*margin_, value) : value;
        if (value < -kIdentityTol || std::isnan(value)) report_.witnesses.push_back({std::move(cell), lhs, rhs});
    }

    void ge(double lhs, double rhs, std::string cell) { slack(lhs - rhs, std::move(cell), lhs, rhs); }
    void le(double lhs, double rhs, std::string cell) { slack(rhs - lhs, std::move(cell), lhs, rhs); }

    /// |lhs - rhs| <= tol, expressed so that the violation threshold is exactly tol.
    void eq(double lhs, double rhs, std::string cell, double tol = kIdentityTol) {
        slack((tol - kIdentityTol) - std::fabs(lhs - rhs), std::move(cell), lhs, rhs);
    }

    /// value must be strictly positive (masses below kIdentityTol count as zero).
    void positive(double value, std::string cell) { slack(value - 2.0 * kIdentityTol, std::move(cell), value, 0.0); }

    void fail(std::string cell, double lhs, double rhs) {
        margin_ = -std::numeric_limits<double>::infinity();
        report_.witnesses.push_back({std::move(cell), lhs, rhs});
    }

    ConditionReport finish() {
        report_.margin = margin_.value_or(0.0);
        report_.holds = report_.witnesses.empty();
        return std::move(report_);
    }

private:
    ConditionReport report_;
    std::optional<double> margin_;
};

void non_decreasing(ReportBuilder& b, const std::vector<double>& v, const char* name, const std::string& suffix = {}) {
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        b.ge(v[i + 1], v[i], idx(name, i) + "->" + idx(name, i + 1) + suffix);
    }
}

/// Non-increasing over the levels with positive mass (NaN entries are skipped).
void non_increasing_defined(ReportBuilder& b, const std::vector<double>& v, const char* name,
                            const std::string& suffix) {
    std::optional<std::size_t> prev;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (std::isnan(v[i])) continue;
        if (prev) b.le(v[i], v[*prev], idx(name, *prev) + "->" + idx(name, i) + suffix);
        prev = i;
    }
}

void outcome_monotone_in_u(ReportBuilder& b, const DiscreteScenario& s) {
    for (int a = 0; a < 2; ++a) {
        non_decreasing(b, outcome_given_u(s, a), "u", " m_" + std::to_string(a));
    }
}

void collider_monotone_in_z(ReportBuilder& b, const DiscreteScenario& s) {
    for (int a = 0; a < 2; ++a) {
        non_increasing_defined(b, stratum_means(s, a), "z", " mu_" + std::to_string(a));
    }
}

/// For each (a, z) with positive mass, the top u-level keeps positive conditional mass.
ConditionReport essential_supremum_report(const DiscreteScenario& s, const std::string& id) {
    ReportBuilder b(id);
    std::optional<std::size_t> top;
    for (std::size_t j = 0; j < s.u_levels(); ++j) {
        if (s.u_pmf[j] > 0.0) top = j;
    }
    for (int a = 0; a < 2; ++a) {
        for (std::size_t i = 0; i < s.z_levels(); ++i) {
            if (s.z_pmf[i] == 0.0) continue;
            CompensatedSum den;
            for (std::size_t j = 0; j < s.u_levels(); ++j) {
                den += s.u_pmf[j] * (a == 1 ? s.treat(i, j) : 1.0 - s.treat(i, j));
            }
            if (!(den.value() > 0.0)) continue;
            const double t = a == 1 ? s.treat(i, *top) : 1.0 - s.treat(i, *top);
            b.positive(s.u_pmf[*top] * t / den.value(),
                       "Pr(U=top|A=" + std::to_string(a) + ",Z=" + idx("z", i) + ")");
        }
    }
    return b.finish();
}

struct CellIndex {
    std::size_t c11, c10, c01, c00;
};

CellIndex binary_cells(const PotentialOutcomeScenario& s) {
    std::array<std::optional<std::size_t>, 4> found;
    for (std::size_t j = 0; j < s.pairs.size(); ++j) {
        const auto& p = s.pairs[j];
        const bool b1 = p.y1 == 0.0 || p.y1 == 1.0;
        const bool b0 = p.y0 == 0.0 || p.y0 == 1.0;
        if (!b1 || !b0) {
            throw ValidationError("non-binary outcome: y_pairs[" + std::to_string(j) + "] = (" + fmt(p.y1) + ", " +
                                  fmt(p.y0) + ")");
        }
        const std::size_t slot = (p.y1 == 1.0 ? 0 : 2) + (p.y0 == 1.0 ? 0 : 1);
        if (found[slot]) throw ValidationError("duplicate (y1, y0) cell in y_pairs");
        found[slot] = j;
    }
    for (const auto& f : found) {
        if (!f) throw ValidationError("binary outcome models need all four (y1, y0) cells in y_pairs");
    }
    return {*found[0], *found[1], *found[2], *found[3]};
}

double pair_prob(const PotentialOutcomeScenario& s, std::size_t j) { return s.pairs[j].prob; }

ConditionReport odds_ratio_report(const PotentialOutcomeScenario& s, const std::string& id) {
    const CellIndex c = binary_cells(s);
    const double concordant = pair_prob(s, c.c11) * pair_prob(s, c.c00);
    const double discordant = pair_prob(s, c.c10) * pair_prob(s, c.c01);
    ReportBuilder b(id);
    b.slack(concordant - discordant, "OR_Y", outcome_odds_ratio(s), 1.0);
    return b.finish();
}

template <typename Fit>
Cor3Model fit_binary_model(const PotentialOutcomeScenario& s, Fit per_level) {
    const CellIndex c = binary_cells(s);
    std::vector<std::array<double, 4>> coefs;
    std::vector<double> weights;
    for (std::size_t k = 0; k < s.pi_support.size(); ++k) {
        if (s.pi_pmf[k] == 0.0) continue;
        coefs.push_back(per_level(s.pi_support[k], s.treat(k, c.c11), s.treat(k, c.c10), s.treat(k, c.c01),
                                  s.treat(k, c.c00)));
        weights.push_back(s.pi_pmf[k]);
    }
    std::array<CompensatedSum, 4> avg;
    CompensatedSum total;
    for (std::size_t k = 0; k < coefs.size(); ++k) {
        total += weights[k];
        for (int m = 0; m < 4; ++m) avg[m] += weights[k] * coefs[k][m];
    }
    Cor3Model model;
    model.alpha = avg[0].value() / total.value();
    model.delta = avg[1].value() / total.value();
    model.eta = avg[2].value() / total.value();
    model.theta = avg[3].value() / total.value();
    const std::array<double, 4> mean = {model.alpha, model.delta, model.eta, model.theta};
    for (const auto& co : coefs) {
        for (int m = 0; m < 4; ++m) model.residual_max = std::max(model.residual_max, std::fabs(co[m] - mean[m]));
    }
    return model;
}

}  // namespace

bool all_hold(const ConditionBundle& bundle) noexcept {
    return std::all_of(bundle.begin(), bundle.end(), [](const ConditionReport& r) { return r.holds; });
}

bool AdditiveDecomposition::holds() const noexcept { return residual_max <= kModelFitTol; }
bool MultiplicativeDecomposition::holds() const noexcept { return residual_max <= kModelFitTol; }

ConditionBundle check_thm1(const DiscreteScenario& s) {
    ConditionBundle out;
    {
        ReportBuilder b("thm1.a1");
        non_decreasing(b, propensity(s), "z", " Pi");
        out.push_back(b.finish());
    }
    {
        ReportBuilder b("thm1.a2");
        non_decreasing(b, treatment_given_u(s), "u", " Pr(A=1|U)");
        out.push_back(b.finish());
    }
    {
        ReportBuilder b("thm1.a3");
        outcome_monotone_in_u(b, s);
        out.push_back(b.finish());
    }
    {
        ReportBuilder b("thm1.b");
        collider_monotone_in_z(b, s);
        out.push_back(b.finish());
    }
    return out;
}

AdditiveDecomposition fit_additive(const DiscreteScenario& s) {
    AdditiveDecomposition d;
    d.beta = propensity(s);
    const double f = treated_fraction(s);
    d.gamma = treatment_given_u(s);
    for (double& g : d.gamma) g -= f;
    for (std::size_t i = 0; i < s.z_levels(); ++i) {
        for (std::size_t j = 0; j < s.u_levels(); ++j) {
            d.residual_max = std::max(d.residual_max, std::fabs(s.treat(i, j) - d.beta[i] - d.gamma[j]));
        }
    }
    return d;
}

MultiplicativeDecomposition fit_multiplicative(const DiscreteScenario& s) {
    for (std::size_t i = 0; i < s.z_levels(); ++i) {
        for (std::size_t j = 0; j < s.u_levels(); ++j) {
            if (!(s.treat(i, j) > 0.0)) {
                throw ValidationError("multiplicative fit needs positive treatment probabilities; treat[" +
                                      std::to_string(i) + "][" + std::to_string(j) + "] = " + fmt(s.treat(i, j)));
            }
        }
    }
    MultiplicativeDecomposition d;
    d.beta = propensity(s);
    const double f = treated_fraction(s);
    d.gamma = treatment_given_u(s);
    for (double& g : d.gamma) g /= f;
    for (std::size_t i = 0; i < s.z_levels(); ++i) {
        for (std::size_t j = 0; j < s.u_levels(); ++j) {
            d.residual_max = std::max(d.residual_max, std::fabs(s.treat(i, j) - d.beta[i] * d.gamma[j]));
        }
    }
    return d;
}

ConditionBundle check_thm2(const DiscreteScenario& s) {
    const AdditiveDecomposition d = fit_additive(s);
    ConditionBundle out;
    {
        ReportBuilder b("thm2.a");
        b.eq(d.residual_max, 0.0, "max|treat - beta - gamma|", kModelFitTol);
        out.push_back(b.finish());
    }
    {
        ReportBuilder b("thm2.b");
        non_decreasing(b, d.beta, "z", " beta");
        non_decreasing(b, d.gamma, "u", " gamma");
        outcome_monotone_in_u(b, s);
        out.push_back(b.finish());
    }
    out.push_back(essential_supremum_report(s, "thm2.c"));
    return out;
}

ConditionBundle check_thm3(const DiscreteScenario& s) {
    ConditionBundle out;
    std::optional<MultiplicativeDecomposition> d;
    {
        ReportBuilder b("thm3.a'");
        try {
            d = fit_multiplicative(s);
            b.eq(d->residual_max, 0.0, "max|treat - beta * gamma|", kModelFitTol);
        } catch (const ValidationError&) {
            for (std::size_t i = 0; i < s.z_levels(); ++i) {
                for (std::size_t j = 0; j < s.u_levels(); ++j) {
                    if (!(s.treat(i, j) > 0.0)) {
                        b.fail("treat[" + std::to_string(i) + "][" + std::to_string(j) + "]", s.treat(i, j), 0.0);
                    }
                }
            }
        }
        out.push_back(b.finish());
    }
    {
        ReportBuilder b("thm3.b");
        non_decreasing(b, d ? d->beta : propensity(s), "z", " beta");
        non_decreasing(b, d ? d->gamma : treatment_given_u(s), "u", " gamma");
        outcome_monotone_in_u(b, s);
        out.push_back(b.finish());
    }
    out.push_back(essential_supremum_report(s, "thm3.c"));
    return out;
}

ConditionBundle check_thm7(const DiscreteScenario& s) {
    ConditionBundle out;
    const std::size_t nz = s.z_levels();
    const std::size_t nu = s.u_levels();
    auto both_directions = [&](ReportBuilder& b, const Table& t, const std::string& label) {
        for (std::size_t j = 0; j < nu; ++j) {
            for (std::size_t i = 0; i + 1 < nz; ++i) {
                b.ge(t(i + 1, j), t(i, j), label + " " + idx("z", i) + "->" + idx("z", i + 1) + " at " + idx("u", j));
            }
        }
        for (std::size_t i = 0; i < nz; ++i) {
            for (std::size_t j = 0; j + 1 < nu; ++j) {
                b.ge(t(i, j + 1), t(i, j), label + " " + idx("u", j) + "->" + idx("u", j + 1) + " at " + idx("z", i));
            }
        }
    };
    {
        ReportBuilder b("thm7.a.treat");
        both_directions(b, s.treat, "treat");
        out.push_back(b.finish());
    }
    {
        ReportBuilder b("thm7.a.outcome");
        both_directions(b, s.outcome_mean[0], "mean[0]");
        both_directions(b, s.outcome_mean[1], "mean[1]");
        out.push_back(b.finish());
    }
    {
        ReportBuilder b("thm7.b");
        collider_monotone_in_z(b, s);
        out.push_back(b.finish());
    }
    return out;
}

ConditionBundle check_collider_association(const DiscreteScenario& s, int arm) {
    if (arm != 0 && arm != 1) throw ValidationError("treatment arm must be 0 or 1");
    const std::size_t nz = s.z_levels();
    const std::size_t nu = s.u_levels();
    // cdf(i, j) = F(u_j | A=arm, Z=z_i); NaN rows for zero-mass z.
    Table cdf(nz, nu, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < nz; ++i) {
        if (s.z_pmf[i] == 0.0) continue;
        std::vector<double> mass(nu);
        CompensatedSum total;
        for (std::size_t j = 0; j < nu; ++j) {
            mass[j] = s.u_pmf[j] * (arm == 1 ? s.treat(i, j) : 1.0 - s.treat(i, j));
            total += mass[j];
        }
        if (!(total.value() > 0.0)) {
            throw UndefinedStratumError("undefined conditional: F(u|A=" + std::to_string(arm) + ", Z=" +
                                        fmt(s.z_support[i]) + ") with Pr(A=" + std::to_string(arm) + "|Z=z) = 0");
        }
        CompensatedSum run;
        for (std::size_t j = 0; j < nu; ++j) {
            run += mass[j];
            cdf(i, j) = run.value() / total.value();
        }
    }

    ConditionBundle out;
    {
        ReportBuilder b("collider.a" + std::to_string(arm));
        for (std::size_t j = 0; j + 1 < nu; ++j) {
            std::optional<std::size_t> prev;
            for (std::size_t i = 0; i < nz; ++i) {
                if (std::isnan(cdf(i, j))) continue;
                if (prev) {
                    b.ge(cdf(i, j), cdf(*prev, j),
                         "F(" + idx("u", j) + "|A=" + std::to_string(arm) + ") " + idx("z", *prev) + "->" + idx("z", i));
                }
                prev = i;
            }
        }
        out.push_back(b.finish());
    }

    if (arm == 1) {
        bool multiplicative = false;
        try {
            multiplicative = fit_multiplicative(s).holds();
        } catch (const ValidationError&) {
            multiplicative = false;
        }
        if (multiplicative) {
            ReportBuilder b("collider.independence");
            std::optional<std::size_t> first;
            for (std::size_t i = 0; i < nz; ++i) {
                if (std::isnan(cdf(i, 0))) continue;
                if (!first) {
                    first = i;
                    continue;
                }
                for (std::size_t j = 0; j + 1 < nu; ++j) {
                    b.eq(cdf(i, j), cdf(*first, j), "F(" + idx("u", j) + "|A=1) " + idx("z", *first) + " vs " + idx("z", i));
                }
            }
            out.push_back(b.finish());
        }
    }
    return out;
}

ConditionReport check_weaker_condition(const BinaryScenario& s) {
    const double p11 = s.p[1][1], p10 = s.p[1][0], p01 = s.p[0][1], p00 = s.p[0][0];
    ReportBuilder b("weaker_condition");
    auto ratio_check = [&](double num, double den, const char* cell, const char* den_cells) {
        if (num == 0.0) {
            b.le(0.0, 1.0, cell);
            return;
        }
        if (den == 0.0) {
            throw DegenerateError(std::string("zero denominator in ") + cell + ": " + den_cells + " is zero");
        }
        b.le(num / den, 1.0, cell);
    };
    ratio_check(p11 * p00, p10 * p01, "p11*p00/(p10*p01)", "p10*p01");
    ratio_check((1.0 - p11) * (1.0 - p00), (1.0 - p10) * (1.0 - p01), "(1-p11)(1-p00)/((1-p10)(1-p01))",
                "(1-p10)(1-p01)");
    return b.finish();
}

namespace {

ConditionReport monotone_effects(const BinaryScenario& s, const std::string& id) {
    const double p11 = s.p[1][1], p10 = s.p[1][0], p01 = s.p[0][1], p00 = s.p[0][0];
    ReportBuilder b(id);
    b.ge(p11, p10, "p11>=p10");
    b.ge(p11, p01, "p11>=p01");
    b.ge(p10, p00, "p10>=p00");
    b.ge(p01, p00, "p01>=p00");
    return b.finish();
}

ConditionReport outcome_monotone(const BinaryScenario& s, const std::string& id) {
    ReportBuilder b(id);
    b.ge(s.r[1][1], s.r[1][0], "r11>=r10");
    b.ge(s.r[0][1], s.r[0][0], "r01>=r00");
    return b.finish();
}

void require_monotone_premise(double p11, double p10, double p01, double p00, const char* lemma) {
    const bool ok = p11 >= std::max(p10, p01) - kValidationTol && std::min(p10, p01) >= p00 - kValidationTol &&
                    p00 > 0.0;
    if (!ok) {
        throw ValidationError(std::string(lemma) +
                              " premise violated: need p11 >= max(p10, p01) and min(p10, p01) >= p00 > 0");
    }
    for (double p : {p11, p10, p01, p00}) {
        if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(std::string(lemma) + " premise violated: p out of [0,1]");
    }
}

double complement_ratio(double p11, double p10, double p01, double p00) {
    const double num = (1.0 - p11) * (1.0 - p00);
    if (num == 0.0) return 0.0;
    return num / ((1.0 - p10) * (1.0 - p01));
}

}  // namespace

ConditionBundle check_cor1(const BinaryScenario& s) {
    const double contrast = s.p[1][1] - s.p[1][0] - s.p[0][1] + s.p[0][0];
    ReportBuilder a("cor1.a");
    a.eq(contrast, 0.0, "p11-p10-p01+p00");
    return {a.finish(), monotone_effects(s, "cor1.b"), outcome_monotone(s, "cor1.c")};
}

ConditionBundle check_cor2(const BinaryScenario& s) {
    ReportBuilder a("cor2.a'");
    a.eq(s.p[1][1] * s.p[0][0], s.p[1][0] * s.p[0][1], "p11*p00 vs p10*p01");
    return {a.finish(), monotone_effects(s, "cor2.b"), outcome_monotone(s, "cor2.c")};
}

ConditionReport check_lemma_s5(double p11, double p10, double p01, double p00) {
    require_monotone_premise(p11, p10, p01, p00, "lemma S5");
    if (std::fabs(p11 - p10 - p01 + p00) > kValidationTol) {
        throw ValidationError("lemma S5 premise violated: additive contrast p11-p10-p01+p00 is not zero");
    }
    ReportBuilder b("lemma_s5");
    b.le(p11 * p00 / (p10 * p01), 1.0, "p11*p00/(p10*p01)");
    b.le(complement_ratio(p11, p10, p01, p00), 1.0, "(1-p11)(1-p00)/((1-p10)(1-p01))");
    return b.finish();
}

ConditionReport check_lemma_s7(double p11, double p10, double p01, double p00) {
    require_monotone_premise(p11, p10, p01, p00, "lemma S7");
    if (std::fabs(p11 * p00 - p10 * p01) > kValidationTol) {
        throw ValidationError("lemma S7 premise violated: p11*p00 != p10*p01");
    }
    ReportBuilder b("lemma_s7");
    b.ge(p11 - p10 - p01 + p00, 0.0, "p11-p10-p01+p00");
    b.le(complement_ratio(p11, p10, p01, p00), 1.0, "(1-p11)(1-p00)/((1-p10)(1-p01))");
    return b.finish();
}

double outcome_odds_ratio(const PotentialOutcomeScenario& s) {
    const CellIndex c = binary_cells(s);
    const double concordant = pair_prob(s, c.c11) * pair_prob(s, c.c00);
    const double discordant = pair_prob(s, c.c10) * pair_prob(s, c.c01);
    if (discordant == 0.0) {
        return concordant == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                                 : std::numeric_limits<double>::infinity();
    }
    return concordant / discordant;
}

ConditionBundle check_thm4(const PotentialOutcomeScenario& s) {
    const double f = treated_fraction(s);
    if (!(f > 0.0 && f < 1.0)) {
        throw DegenerateError("degenerate population: Pr(A=1) = " + fmt(f));
    }
    ConditionBundle out;
    {
        ReportBuilder b("thm4.a");
        for (int a = 0; a < 2; ++a) {
            // Pr(A=1 | Y(a)=y), grouped by the distinct values of Y(a).
            std::map<double, std::pair<CompensatedSum, CompensatedSum>> groups;
            for (std::size_t j = 0; j < s.pairs.size(); ++j) {
                const double y = a == 1 ? s.pairs[j].y1 : s.pairs[j].y0;
                CompensatedSum treated;
                for (std::size_t k = 0; k < s.pi_support.size(); ++k) treated += s.pi_pmf[k] * s.treat(k, j);
                auto& [num, den] = groups[y];
                num += s.pairs[j].prob * treated.value();
                den += s.pairs[j].prob;
            }
            std::optional<std::pair<double, double>> prev;
            for (const auto& [y, sums] : groups) {
                if (!(sums.second.value() > 0.0)) continue;
                const double p = sums.first.value() / sums.second.value();
                if (prev) {
                    b.ge(p, prev->second,
                         "Pr(A=1|Y(" + std::to_string(a) + ")) at " + fmt(prev->first) + "->" + fmt(y));
                }
                prev = {y, p};
            }
        }
        out.push_back(b.finish());
    }
    {
        ReportBuilder b("thm4.b");
        for (int a = 0; a < 2; ++a) {
            const std::vector<double> nu = propensity_stratum_means(s, a);
            CompensatedSum epi, enu;
            for (std::size_t k = 0; k < nu.size(); ++k) {
                if (s.pi_pmf[k] == 0.0) continue;
                epi += s.pi_pmf[k] * s.pi_support[k];
                enu += s.pi_pmf[k] * nu[k];
            }
            CompensatedSum cov;
            for (std::size_t k = 0; k < nu.size(); ++k) {
                if (s.pi_pmf[k] == 0.0) continue;
                cov += s.pi_pmf[k] * (s.pi_support[k] - epi.value()) * (nu[k] - enu.value());
            }
            b.le(cov.value(), 0.0, "cov(Pi, nu_" + std::to_string(a) + "(Pi))");
        }
        out.push_back(b.finish());
    }
    return out;
}

Cor3Model fit_cor3(const PotentialOutcomeScenario& s) {
    return fit_binary_model(s, [](double pi, double t11, double t10, double t01, double t00) {
        return std::array<double, 4>{t00 - pi, t10 - t00, t01 - t00, t11 - t10 - t01 + t00};
    });
}

Cor3Model fit_cor4(const PotentialOutcomeScenario& s) {
    return fit_binary_model(s, [](double pi, double t11, double t10, double t01, double t00) {
        if (!(pi > 0.0 && t11 > 0.0 && t10 > 0.0 && t01 > 0.0 && t00 > 0.0)) {
            throw ValidationError("multiplicative model needs positive propensity and treatment probabilities");
        }
        return std::array<double, 4>{t00 / pi, t10 / t00, t01 / t00, t11 * t00 / (t10 * t01)};
    });
}

ConditionBundle check_cor3(const PotentialOutcomeScenario& s) {
    const Cor3Model m = fit_cor3(s);
    ReportBuilder b("cor3.a");
    b.eq(m.residual_max, 0.0, "coefficient variation across pi", kModelFitTol);
    b.ge(m.delta, 0.0, "delta");
    b.ge(m.eta, 0.0, "eta");
    b.ge(m.theta, 0.0, "theta");
    return {b.finish(), odds_ratio_report(s, "cor3.b")};
}

ConditionBundle check_cor4(const PotentialOutcomeScenario& s) {
    const CellIndex c = binary_cells(s);
    ReportBuilder b("cor4.a'");
    bool positive = true;
    for (std::size_t k = 0; k < s.pi_support.size(); ++k) {
        if (s.pi_pmf[k] == 0.0) continue;
        if (!(s.pi_support[k] > 0.0)) {
            b.fail(idx("pi", k), s.pi_support[k], 0.0);
            positive = false;
        }
        for (std::size_t j : {c.c11, c.c10, c.c01, c.c00}) {
            if (!(s.treat(k, j) > 0.0)) {
                b.fail("treat[" + std::to_string(k) + "][" + std::to_string(j) + "]", s.treat(k, j), 0.0);
                positive = false;
            }
        }
    }
    if (positive) {
        const Cor3Model m = fit_cor4(s);
        b.eq(m.residual_max, 0.0, "coefficient variation across pi", kModelFitTol);
        b.ge(m.delta, 1.0, "delta");
        b.ge(m.eta, 1.0, "eta");
        b.ge(m.theta, 1.0, "theta");
    }
    return {b.finish(), odds_ratio_report(s, "cor4.b")};
}

ConditionBundle check_thm5_binary(const PotentialOutcomeScenario& s) {
    const CellIndex c = binary_cells(s);
    const Cor3Model m = fit_cor3(s);
    ConditionBundle out;
    {
        ReportBuilder b("thm5.a");
        b.eq(m.residual_max, 0.0, "coefficient variation across pi", kModelFitTol);
        b.eq(m.theta, 0.0, "theta", kModelFitTol);
        b.ge(m.delta, 0.0, "delta");
        b.ge(m.eta, 0.0, "eta");
        out.push_back(b.finish());
    }
    out.push_back(odds_ratio_report(s, "thm5.b"));
    {
        // The top value of one potential outcome must stay reachable from every level of the other.
        ReportBuilder b("thm5.c");
        const double q11 = pair_prob(s, c.c11), q10 = pair_prob(s, c.c10);
        const double q01 = pair_prob(s, c.c01), q00 = pair_prob(s, c.c00);
        auto compare = [&](double top_given_1, double mass_1, double top_given_0, double mass_0, const char* what) {
            if (mass_1 == 0.0 || mass_0 == 0.0) return;
            const bool sup1 = top_given_1 > 0.0;
            const bool sup0 = top_given_0 > 0.0;
            if (sup1 != sup0) {
                b.fail(what, sup1 ? 1.0 : 0.0, sup0 ? 1.0 : 0.0);
            } else {
                b.slack(0.0, what, sup1 ? 1.0 : 0.0, sup0 ? 1.0 : 0.0);
            }
        };
        compare(q11, q11 + q01, q10, q10 + q00, "ess sup Y(1) given Y(0)=1 vs 0");
        compare(q11, q11 + q10, q01, q01 + q00, "ess sup Y(0) given Y(1)=1 vs 0");
        out.push_back(b.finish());
    }
    return out;
}

ZBiasVerdict zbias_verdict(const EstimateSet& e) {
    auto slot = [&](double adj, double truth) {
        SlotVerdict v;
        v.signed_ordering = adj >= e.unadj - kIdentityTol && e.unadj >= truth - kIdentityTol;
        const double bias_adj = std::fabs(adj - truth);
        const double bias_unadj = std::fabs(e.unadj - truth);
        v.amplification = bias_adj >= bias_unadj - kIdentityTol;
        v.strict = bias_adj > bias_unadj + kIdentityTol;
        v.tie = std::fabs(bias_adj - bias_unadj) <= kIdentityTol;
        return v;
    };
    ZBiasVerdict out;
    out.treated = slot(e.adj_treated, e.true_treated);
    out.control = slot(e.adj_control, e.true_control);
    out.all = slot(e.adj_all, e.true_all);
    out.zbias = out.all.strict;
    out.tie = out.all.tie;
    return out;
}

}  // namespace zbias
