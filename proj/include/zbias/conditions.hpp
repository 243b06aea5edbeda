#pragma once

#include <map>
#include <string>
#include <vector>

#include "zbias/estimators.hpp"
#include "zbias/scenario.hpp"

namespace zbias {

/// A single failing cell: where, and the two sides of the violated inequality.
struct Witness {
    std::string cell;
    double lhs = 0.0;
    double rhs = 0.0;
};

/// Verdict for one condition. `margin` is the smallest slack over all checked
/// inequalities; holds <=> witnesses empty <=> margin >= -kIdentityTol.
struct ConditionReport {
    std::string condition_id;
    bool holds = true;
    double margin = 0.0;
    std::vector<Witness> witnesses;
};

using ConditionBundle = std::vector<ConditionReport>;

/// True when every report in the bundle holds.
bool all_hold(const ConditionBundle& bundle) noexcept;

struct AdditiveDecomposition {
    std::vector<double> beta;   // per z-level
    std::vector<double> gamma;  // per u-level, E[gamma(U)] = 0
    double residual_max = 0.0;
    bool holds() const noexcept;
};

struct MultiplicativeDecomposition {
    std::vector<double> beta;   // per z-level
    std::vector<double> gamma;  // per u-level, E[gamma(U)] = 1
    double residual_max = 0.0;
    bool holds() const noexcept;
};

/// pr(A=1 | Pi, Y(1), Y(0)) = alpha + Pi + delta Y(1) + eta Y(0) + theta Y(1) Y(0),
/// or the multiplicative analogue alpha Pi delta^Y(1) eta^Y(0) theta^{Y(1)Y(0)}.
/// Coefficients are the pmf-weighted average of the per-level fits;
/// residual_max is the largest deviation of any per-level coefficient.
struct Cor3Model {
    double alpha = 0.0;
    double delta = 0.0;
    double eta = 0.0;
    double theta = 0.0;
    double residual_max = 0.0;
};

// Scalar Z and U.
ConditionBundle check_thm1(const DiscreteScenario& s);
AdditiveDecomposition fit_additive(const DiscreteScenario& s);
MultiplicativeDecomposition fit_multiplicative(const DiscreteScenario& s);
ConditionBundle check_thm2(const DiscreteScenario& s);
ConditionBundle check_thm3(const DiscreteScenario& s);
ConditionBundle check_thm7(const DiscreteScenario& s);

/// Conditional law of U given (A=a, Z=z) shifts down as z rises; for a=1 and an
/// exact multiplicative treatment model, also checks Z independent of U given A=1.
ConditionBundle check_collider_association(const DiscreteScenario& s, int arm);

// Binary Z and U.
ConditionReport check_weaker_condition(const BinaryScenario& s);
ConditionBundle check_cor1(const BinaryScenario& s);
ConditionBundle check_cor2(const BinaryScenario& s);
/// Throws ValidationError when the lemma's premises do not hold.
ConditionReport check_lemma_s5(double p11, double p10, double p01, double p00);
ConditionReport check_lemma_s7(double p11, double p10, double p01, double p00);

// Propensity score with U = {Y(1), Y(0)}.
ConditionBundle check_thm4(const PotentialOutcomeScenario& s);
/// Binary-outcome analogue of the additive general theorem: delta/eta model
/// without interaction, OR_Y >= 1, and Y(1)=1 reachable from every Y(0) level.
ConditionBundle check_thm5_binary(const PotentialOutcomeScenario& s);
Cor3Model fit_cor3(const PotentialOutcomeScenario& s);
Cor3Model fit_cor4(const PotentialOutcomeScenario& s);
ConditionBundle check_cor3(const PotentialOutcomeScenario& s);
ConditionBundle check_cor4(const PotentialOutcomeScenario& s);
/// Odds ratio of the joint law of binary (Y(1), Y(0)); +inf when the
/// discordant cells are empty.
double outcome_odds_ratio(const PotentialOutcomeScenario& s);

/// Ordering and amplification per population slot.
struct SlotVerdict {
    bool signed_ordering = false;  // adj >= unadj >= true
    bool amplification = false;    // |adj - true| >= |unadj - true|
    bool strict = false;           // |adj - true| > |unadj - true| beyond tolerance
    bool tie = false;              // |adj - true| and |unadj - true| equal within tolerance
};

struct ZBiasVerdict {
    SlotVerdict treated;
    SlotVerdict control;
    SlotVerdict all;
    /// Strict amplification on the whole population.
    bool zbias = false;
    bool tie = false;

    bool signed_ordering_everywhere() const noexcept {
        return treated.signed_ordering && control.signed_ordering && all.signed_ordering;
    }
};

ZBiasVerdict zbias_verdict(const EstimateSet& e);

}  // namespace zbias
