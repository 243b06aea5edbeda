#pragma once

#include <string_view>
#include <vector>

#include "zbias/scenario.hpp"

namespace zbias {

/// Which pretreatment summary the adjusted estimators stratify on.
enum class Conditioning { OnZ, OnPropensity };

std::string_view to_string(Conditioning c) noexcept;
/// Accepts "on_z" and "on_propensity"; throws ValidationError otherwise.
Conditioning parse_conditioning(std::string_view text);

/// One value per population: treated (A=1), control (A=0), whole.
struct PopulationTriple {
    double treated = 0.0;
    double control = 0.0;
    double all = 0.0;
};

/// The seven estimands plus Pr(A=1).
struct EffectSlots {
    double true_treated = 0.0;
    double true_control = 0.0;
    double true_all = 0.0;
    double unadj = 0.0;
    double adj_treated = 0.0;
    double adj_control = 0.0;
    double adj_all = 0.0;
    double f = 0.0;
    Conditioning conditioning = Conditioning::OnZ;

    PopulationTriple truth() const noexcept { return {true_treated, true_control, true_all}; }
    PopulationTriple adjusted() const noexcept { return {adj_treated, adj_control, adj_all}; }
};

using EstimateSet = EffectSlots;

/// Effects on the dichotomised outcome I(Y > threshold).
struct DceSet : EffectSlots {
    double threshold = 0.0;
};

/// Ratio-scale effects; every slot is a ratio of integrated means.
struct RrSet : EffectSlots {};

/// Throws std::logic_error when the whole-population slots are not the
/// f-weighted combinations of the treated and control slots.
void check_convex_combination(const EffectSlots& e);

double treated_fraction(const DiscreteScenario& s);

/// mu_a(z_i) = E(Y | A=a, Z=z_i). Zero-mass levels are reported as NaN;
/// throws UndefinedStratumError when Pr(Z=z_i) > 0 but Pr(A=a | Z=z_i) = 0.
std::vector<double> stratum_means(const DiscreteScenario& s, int arm);

/// m_a(u_j) = E(Y | A=a, U=u_j), averaged over Z given (A=a, U=u_j).
/// Falls back to the Z-marginal average where Pr(A=a | U=u_j) = 0.
std::vector<double> outcome_given_u(const DiscreteScenario& s, int arm);

PopulationTriple true_ace(const DiscreteScenario& s);
double unadjusted_ace(const DiscreteScenario& s);
PopulationTriple adjusted_ace(const DiscreteScenario& s, Conditioning conditioning);

/// Adjusted minus unadjusted, computed from cov{Pi, mu_a} under the law of Z
/// instead of from the adjusted integrals.
PopulationTriple adjusted_minus_unadjusted_via_covariance(const DiscreteScenario& s,
                                                          Conditioning conditioning = Conditioning::OnZ);

EstimateSet estimates(const DiscreteScenario& s, Conditioning conditioning = Conditioning::OnZ);
EstimateSet estimates(const BinaryScenario& s, Conditioning conditioning = Conditioning::OnZ);

/// Replace Y by I(Y > threshold). Uses the outcome law when present; binary
/// outcomes without a law are dichotomised from their means.
DiscreteScenario dichotomize(const DiscreteScenario& s, double threshold);
DceSet dce(const DiscreteScenario& s, double threshold, Conditioning conditioning = Conditioning::OnZ);
RrSet rr(const DiscreteScenario& s, Conditioning conditioning = Conditioning::OnZ);

/// Averages stratum estimates over X: whole-population and unadjusted slots by
/// the X law, treated slots by F(dx | A=1), control slots by F(dx | A=0).
EstimateSet covariate_average(const CovariateFamily& fam, Conditioning conditioning = Conditioning::OnZ);

double treated_fraction(const PotentialOutcomeScenario& s);
/// nu_a(pi_k) = E(Y | A=a, Pi=pi_k); NaN for zero-mass levels.
std::vector<double> propensity_stratum_means(const PotentialOutcomeScenario& s, int arm);
EstimateSet po_estimates(const PotentialOutcomeScenario& s);

}  // namespace zbias
