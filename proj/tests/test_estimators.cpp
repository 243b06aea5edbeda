#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "oracle.hpp"
#include "zbias/error.hpp"
#include "zbias/estimators.hpp"
#include "zbias/scenario_io.hpp"

using namespace zbias;

namespace {

BinaryScenario table_case(int k) {
    static const double rows[3][8] = {{0.8, 0.6, 0.2, 0.1, 0.08, 0.06, 0.02, 0.01},
                                      {0.3, 0.2, 0.3, 0.1, 0.03, 0.02, 0.03, 0.01},
                                      {0.5, 0.4, 0.4, 0.1, 0.04, 0.04, 0.04, 0.01}};
    const double* v = rows[k - 1];
    BinaryScenario s;
    s.p = {{{v[3], v[2]}, {v[1], v[0]}}};  // p[z][u]
    s.r = {{{v[7], v[6]}, {v[5], v[4]}}};  // r[a][u]
    return s;
}

void same_as_oracle(const EffectSlots& e, const oracle::Slots& o, double tol = 1e-12) {
    CHECK(std::fabs(e.true_treated - o.true_treated) <= tol);
    CHECK(std::fabs(e.true_control - o.true_control) <= tol);
    CHECK(std::fabs(e.true_all - o.true_all) <= tol);
    CHECK(std::fabs(e.unadj - o.unadj) <= tol);
    CHECK(std::fabs(e.adj_treated - o.adj_treated) <= tol);
    CHECK(std::fabs(e.adj_control - o.adj_control) <= tol);
    CHECK(std::fabs(e.adj_all - o.adj_all) <= tol);
    CHECK(std::fabs(e.f - o.f) <= tol);
}

void same_slots(const EffectSlots& a, const EffectSlots& b, double tol = 1e-12) {
    same_as_oracle(a, {b.true_treated, b.true_control, b.true_all, b.unadj, b.adj_treated, b.adj_control, b.adj_all, b.f},
                   tol);
}

/// Potential-outcome scenario rewritten with Z = Pi and U = (Y(1), Y(0)).
DiscreteScenario as_discrete(const PotentialOutcomeScenario& s) {
    DiscreteScenario d;
    d.z_support = s.pi_support;
    d.z_pmf = s.pi_pmf;
    const std::size_t np = s.pairs.size();
    d.u_support = gen::support(np);
    for (const OutcomePair& p : s.pairs) d.u_pmf.push_back(p.prob);
    d.treat = s.treat;
    for (int a = 0; a < 2; ++a) {
        d.outcome_mean[a] = Table(s.pi_support.size(), np);
        for (std::size_t k = 0; k < s.pi_support.size(); ++k)
            for (std::size_t j = 0; j < np; ++j) d.outcome_mean[a](k, j) = a ? s.pairs[j].y1 : s.pairs[j].y0;
    }
    return d;
}

}  // namespace

TEST_CASE("worked example values") {
    const double expected[3][3] = {{0.055, 0.0574169, 0.0583613},
                                   {0.005, 0.0076344, 0.0077083},
                                   {0.015, 0.0173077, 0.0171818}};
    for (int k = 1; k <= 3; ++k) {
        CAPTURE(k);
        const BinaryScenario s = table_case(k);
        const EstimateSet e = estimates(s);
        CHECK(e.true_all == doctest::Approx(expected[k - 1][0]).epsilon(1e-6));
        CHECK(e.unadj == doctest::Approx(expected[k - 1][1]).epsilon(1e-6));
        CHECK(e.adj_all == doctest::Approx(expected[k - 1][2]).epsilon(1e-6));
        same_as_oracle(e, oracle::binary(s));
    }
    const EstimateSet c1 = estimates(table_case(1));
    CHECK(c1.f == doctest::Approx(0.425).epsilon(1e-12));
    CHECK(c1.unadj == doctest::Approx(0.0305 / 0.425 - 0.00825 / 0.575).epsilon(1e-12));
    CHECK(c1.conditioning == Conditioning::OnZ);
}

TEST_CASE("oracle agreement on random scenarios") {
    gen::Rng rng(21);
    for (int n = 0; n < 300; ++n) {
        const BinaryScenario b = gen::binary(rng);
        same_as_oracle(estimates(b), oracle::binary(b));
        const DiscreteScenario d = gen::discrete(rng, 2 + n % 4, 2 + n % 3);
        same_as_oracle(estimates(d), oracle::discrete(d));
    }
}

TEST_CASE("convex-combination identities") {
    gen::Rng rng(22);
    for (int n = 0; n < 300; ++n) {
        const EstimateSet e = estimates(gen::discrete(rng, 3, 3));
        CHECK(std::fabs(e.true_all - (e.f * e.true_treated + (1 - e.f) * e.true_control)) <= 1e-12);
        CHECK(std::fabs(e.adj_all - (e.f * e.adj_treated + (1 - e.f) * e.adj_control)) <= 1e-12);
    }
    EstimateSet broken;
    broken.f = 0.5;
    broken.true_treated = 1.0;
    broken.true_all = 0.9;
    CHECK_THROWS_AS(check_convex_combination(broken), std::logic_error);
}

TEST_CASE("no treatment effect gives zero truth") {
    BinaryScenario s = table_case(1);
    s.r[1] = s.r[0];
    const PopulationTriple t = true_ace(to_discrete(s));
    CHECK(t.treated == 0.0);
    CHECK(t.control == 0.0);
    CHECK(t.all == 0.0);
}

TEST_CASE("reductions") {
    gen::Rng rng(23);
    for (int n = 0; n < 200; ++n) {
        BinaryScenario s = gen::binary(rng);
        s.p[0][1] = s.p[0][0];
        s.p[1][1] = s.p[1][0];
        s.r[0][1] = s.r[0][0];
        s.r[1][1] = s.r[1][0];
        const EstimateSet e = estimates(s);
        for (double x : {e.true_treated, e.true_control, e.unadj, e.adj_treated, e.adj_control, e.adj_all}) {
            CHECK(std::fabs(x - e.true_all) <= 1e-12);
        }
        BinaryScenario t = gen::binary(rng);
        t.p[1] = t.p[0];
        const EstimateSet g = estimates(t);
        for (double x : {g.adj_treated, g.adj_control, g.adj_all}) CHECK(std::fabs(x - g.unadj) <= 1e-12);
        const PopulationTriple d = adjusted_minus_unadjusted_via_covariance(to_discrete(t));
        CHECK(std::fabs(d.all) <= 1e-12);
        CHECK(std::fabs(d.treated) <= 1e-12);
        CHECK(std::fabs(d.control) <= 1e-12);
    }
}

TEST_CASE("covariance route") {
    gen::Rng rng(24);
    for (int n = 0; n < 300; ++n) {
        const DiscreteScenario s = gen::discrete(rng, 2 + n % 3, 2 + n % 4);
        const PopulationTriple adj = adjusted_ace(s, Conditioning::OnZ);
        const double unadj = unadjusted_ace(s);
        const PopulationTriple d = adjusted_minus_unadjusted_via_covariance(s);
        CHECK(std::fabs(d.treated - (adj.treated - unadj)) <= 1e-12);
        CHECK(std::fabs(d.control - (adj.control - unadj)) <= 1e-12);
        CHECK(std::fabs(d.all - (adj.all - unadj)) <= 1e-12);
    }
    const PopulationTriple d1 = adjusted_minus_unadjusted_via_covariance(to_discrete(table_case(1)));
    CHECK(d1.all == doctest::Approx(0.0583613 - 0.0574169).epsilon(1e-4));
}

TEST_CASE("degenerate and undefined strata") {
    BinaryScenario s = table_case(1);
    s.p = {{{0.0, 0.0}, {0.0, 0.0}}};
    CHECK_THROWS_AS(estimates(s), DegenerateError);

    BinaryScenario z = table_case(1);
    z.p[1] = {1.0, 1.0};  // nobody untreated at z = 1
    CHECK_THROWS_AS(adjusted_ace(to_discrete(z), Conditioning::OnZ), UndefinedStratumError);
    try {
        adjusted_ace(to_discrete(z), Conditioning::OnZ);
    } catch (const UndefinedStratumError& e) {
        CHECK(std::string(e.what()).find("A=0") != std::string::npos);
    }
    // A zero-mass z-level is skipped rather than an error.
    z.p_z = 0.0;
    CHECK_NOTHROW(estimates(z));
}

TEST_CASE("conditioning on the propensity score") {
    gen::Rng rng(25);
    for (int n = 0; n < 100; ++n) {
        const DiscreteScenario s = gen::discrete(rng, 3, 2);
        same_slots(estimates(s, Conditioning::OnZ), estimates(s, Conditioning::OnPropensity));
        CHECK(estimates(s, Conditioning::OnPropensity).conditioning == Conditioning::OnPropensity);
    }
    // Two z-levels with one propensity but different stratum means. Since A is independent of Z given
    // the propensity, the two standardisations still coincide.
    DiscreteScenario s;
    s.z_support = {0, 1};
    s.z_pmf = {0.5, 0.5};
    s.u_support = {0, 1};
    s.u_pmf = {0.5, 0.5};
    s.treat = Table(2, 2);
    s.treat(0, 0) = 0.2;
    s.treat(0, 1) = 0.6;
    s.treat(1, 0) = 0.6;
    s.treat(1, 1) = 0.2;
    for (int a = 0; a < 2; ++a) {
        s.outcome_mean[a] = Table(2, 2);
        for (int i = 0; i < 2; ++i) {
            s.outcome_mean[a](i, 0) = 0.1 + 0.3 * a;
            s.outcome_mean[a](i, 1) = 0.7 + 0.1 * a;
        }
    }
    validate(s);
    const EstimateSet on_z = estimates(s, Conditioning::OnZ);
    const EstimateSet on_pi = estimates(s, Conditioning::OnPropensity);
    CHECK(std::fabs(on_pi.adj_all - on_pi.unadj) <= 1e-12);  // a single propensity level
    const std::vector<double> mu1 = stratum_means(s, 1);
    CHECK(std::fabs(mu1[0] - mu1[1]) > 1e-3);
    same_slots(on_z, on_pi);
    CHECK(parse_conditioning("on_z") == Conditioning::OnZ);
    CHECK_THROWS_AS(parse_conditioning("on_x"), ValidationError);
}

TEST_CASE("distributional effects") {
    gen::Rng rng(26);
    for (int n = 0; n < 100; ++n) {
        const DiscreteScenario d = to_discrete(gen::binary(rng));
        for (double y : {0.0, 0.5, 0.99}) {
            const DceSet c = dce(d, y);
            same_slots(c, estimates(d));
            CHECK(c.threshold == y);
        }
    }
    const AnyScenario any = load_scenario(std::string(ZBIAS_SCENARIO_DIR) + "/three_level.scn");
    const auto& s = std::get<DiscreteScenario>(any);
    const DceSet high = dce(s, 10.0);
    for (double x : {high.true_treated, high.true_control, high.true_all, high.unadj, high.adj_treated,
                     high.adj_control, high.adj_all}) {
        CHECK(x == 0.0);
    }

    // Dichotomise by hand at y = 1.5: Pr(Y > 1.5 | A=a, U=u) from the laws.
    DiscreteScenario manual = s;
    manual.outcome_law.reset();
    const double tail[2][2] = {{0.0, 0.5}, {0.5, 1.0}};  // [a][u]
    for (int a = 0; a < 2; ++a)
        for (std::size_t i = 0; i < s.z_levels(); ++i)
            for (std::size_t j = 0; j < 2; ++j) manual.outcome_mean[a](i, j) = tail[a][j];
    same_slots(dce(s, 1.5), estimates(manual));

    DiscreteScenario no_law = s;
    no_law.outcome_law.reset();
    CHECK_THROWS_AS(dce(no_law, 1.5), ValidationError);
}

TEST_CASE("ratio scale") {
    const RrSet c1 = rr(to_discrete(table_case(1)));
    CHECK(c1.unadj == doctest::Approx((0.0305 / 0.425) / (0.00825 / 0.575)).epsilon(1e-12));
    CHECK(c1.unadj == doctest::Approx(5.0018).epsilon(1e-4));

    gen::Rng rng(27);
    for (int n = 0; n < 100; ++n) {
        BinaryScenario s = gen::binary(rng);
        s.r[1] = s.r[0];
        const RrSet r = rr(to_discrete(s));
        CHECK(r.true_all == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.true_treated == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.true_control == doctest::Approx(1.0).epsilon(1e-12));
    }
    for (int n = 0; n < 100; ++n) {
        const BinaryScenario s = gen::no_interaction(rng, false);
        const RrSet r = rr(to_discrete(s));
        for (double t : {r.true_treated, r.true_control, r.true_all}) {
            CHECK(r.unadj >= t - 1e-12);
        }
        for (double a : {r.adj_treated, r.adj_control, r.adj_all}) CHECK(a >= r.unadj - 1e-12);
    }

    BinaryScenario zero = table_case(1);
    zero.r[0] = {0.0, 0.0};
    CHECK_THROWS_AS(rr(to_discrete(zero)), DegenerateError);

    DiscreteScenario negative = gen::discrete(rng, 2, 2);
    negative.outcome_mean[0](0, 0) = negative.outcome_mean[0](1, 0) = -0.5;
    CHECK_THROWS_AS(rr(negative), ValidationError);
}

TEST_CASE("averaging over a covariate") {
    const DiscreteScenario c1 = to_discrete(table_case(1));
    const DiscreteScenario c3 = to_discrete(table_case(3));

    CovariateFamily one{{{"x", 1.0, c1}}};
    same_slots(covariate_average(one), estimates(c1));

    CovariateFamily twins{{{"a", 0.3, c1}, {"b", 0.7, c1}}};
    same_slots(covariate_average(twins), estimates(c1));

    const double w[2] = {0.6, 0.4};
    CovariateFamily fam{{{"x0", w[0], c1}, {"x1", w[1], c3}}};
    const EstimateSet avg = covariate_average(fam);

    // Flatten X into U' = (X, U); Z has the same law in both strata.
    DiscreteScenario flat;
    flat.z_support = {0, 1};
    flat.z_pmf = {0.5, 0.5};
    flat.u_support = {0, 1, 2, 3};
    flat.u_pmf = {w[0] * 0.5, w[0] * 0.5, w[1] * 0.5, w[1] * 0.5};
    flat.treat = Table(2, 4);
    for (int a = 0; a < 2; ++a) flat.outcome_mean[a] = Table(2, 4);
    const DiscreteScenario* strata[2] = {&c1, &c3};
    for (int x = 0; x < 2; ++x)
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j) {
                flat.treat(i, 2 * x + j) = strata[x]->treat(i, j);
                for (int a = 0; a < 2; ++a) flat.outcome_mean[a](i, 2 * x + j) = strata[x]->outcome_mean[a](i, j);
            }
    validate(flat);
    const EstimateSet pooled = estimates(flat);
    CHECK(std::fabs(avg.true_all - pooled.true_all) <= 1e-12);
    CHECK(std::fabs(avg.true_treated - pooled.true_treated) <= 1e-12);
    CHECK(std::fabs(avg.true_control - pooled.true_control) <= 1e-12);
    CHECK(std::fabs(avg.f - pooled.f) <= 1e-12);

    const EstimateSet e0 = estimates(c1), e1 = estimates(c3);
    const double f = w[0] * e0.f + w[1] * e1.f;
    const double t0 = w[0] * e0.f / f, t1 = w[1] * e1.f / f;
    const double k0 = w[0] * (1 - e0.f) / (1 - f), k1 = w[1] * (1 - e1.f) / (1 - f);
    CHECK(std::fabs(avg.unadj - (w[0] * e0.unadj + w[1] * e1.unadj)) <= 1e-12);
    CHECK(std::fabs(avg.adj_all - (w[0] * e0.adj_all + w[1] * e1.adj_all)) <= 1e-12);
    CHECK(std::fabs(avg.adj_treated - (t0 * e0.adj_treated + t1 * e1.adj_treated)) <= 1e-12);
    CHECK(std::fabs(avg.adj_control - (k0 * e0.adj_control + k1 * e1.adj_control)) <= 1e-12);

    CovariateFamily skipped{{{"empty", 0.0, to_discrete(BinaryScenario{})}, {"x", 1.0, c1}}};
    same_slots(covariate_average(skipped), estimates(c1));

    BinaryScenario dead = table_case(1);
    dead.p = {{{0.0, 0.0}, {0.0, 0.0}}};
    CovariateFamily bad{{{"dead", 0.5, to_discrete(dead)}, {"x", 0.5, c1}}};
    try {
        covariate_average(bad);
        FAIL("expected an error");
    } catch (const DegenerateError& e) {
        CHECK(std::string(e.what()).find("dead") != std::string::npos);
    }
}

TEST_CASE("potential-outcome estimates") {
    gen::Rng rng(28);
    for (int n = 0; n < 200; ++n) {
        const PotentialOutcomeScenario s = gen::cor3(rng, 2 + n % 3);
        validate(s);
        const EstimateSet e = po_estimates(s);
        CHECK(e.conditioning == Conditioning::OnPropensity);
        same_as_oracle(e, oracle::potential_outcomes(s));
        same_slots(e, estimates(as_discrete(s)));
    }
    // Assignment ignoring the potential outcomes: everything coincides.
    PotentialOutcomeScenario r;
    r.pi_support = {0.3, 0.7};
    r.pi_pmf = {0.5, 0.5};
    r.pairs = {{1, 1, 0.3}, {1, 0, 0.2}, {0, 1, 0.1}, {0, 0, 0.4}};
    r.treat = Table(2, 4);
    for (std::size_t j = 0; j < 4; ++j) {
        r.treat(0, j) = 0.3;
        r.treat(1, j) = 0.7;
    }
    const EstimateSet e = po_estimates(r);
    for (double x : {e.true_treated, e.true_control, e.unadj, e.adj_treated, e.adj_control, e.adj_all}) {
        CHECK(std::fabs(x - e.true_all) <= 1e-12);
    }

    const AnyScenario file = load_scenario(std::string(ZBIAS_SCENARIO_DIR) + "/potential_outcomes.scn");
    const EstimateSet g = po_estimates(std::get<PotentialOutcomeScenario>(file));
    for (double t : {g.true_treated, g.true_control, g.true_all}) CHECK(g.unadj >= t - 1e-12);
    for (double a : {g.adj_treated, g.adj_control, g.adj_all}) CHECK(a >= g.unadj - 1e-12);
}
