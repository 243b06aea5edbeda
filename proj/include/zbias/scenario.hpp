#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "zbias/numeric.hpp"

namespace zbias {

/// Dense row-major table of doubles.
class Table {
public:
    Table() = default;
    Table(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    const std::vector<double>& data() const noexcept { return data_; }

    friend bool operator==(const Table&, const Table&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// The binary (Z, U, A, Y) world parameterised by ten probabilities.
///
/// p[z][u] = Pr(A=1 | Z=z, U=u) and r[a][u] = E(Y | A=a, U=u). Z and U are
/// independent Bernoulli(p_z) and Bernoulli(p_u).
struct BinaryScenario {
    double p_z = 0.5;
    double p_u = 0.5;
    std::array<std::array<double, 2>, 2> p{};
    std::array<std::array<double, 2>, 2> r{};
    bool binary_outcome = true;
};

/// A finite outcome distribution: values[i] occurs with probability probs[i].
struct OutcomeLaw {
    std::vector<double> values;
    std::vector<double> probs;

    double mean() const;
    double upper_tail(double y) const;  // Pr(Y > y)
};

/// General finite-support world with Z independent of U.
///
/// treat(i, j) = Pr(A=1 | Z=z_i, U=u_j); outcome_mean[a](i, j) = E(Y | A=a, Z=z_i, U=u_j).
/// Unless direct_effect is set, outcome_mean must not depend on z.
struct DiscreteScenario {
    std::vector<double> z_support;
    std::vector<double> z_pmf;
    std::vector<double> u_support;
    std::vector<double> u_pmf;
    Table treat;
    std::array<Table, 2> outcome_mean;
    /// Optional per-(a, u_j) outcome law, indexed [a][j].
    std::optional<std::array<std::vector<OutcomeLaw>, 2>> outcome_law;
    bool binary_outcome = false;
    bool direct_effect = false;

    std::size_t z_levels() const noexcept { return z_support.size(); }
    std::size_t u_levels() const noexcept { return u_support.size(); }
};

struct OutcomePair {
    double y1 = 0.0;
    double y0 = 0.0;
    double prob = 0.0;
};

/// World with U = {Y(1), Y(0)} and a propensity score independent of U.
///
/// treat(k, j) = Pr(A=1 | Pi=pi_k, (Y(1),Y(0)) = pairs[j]); each row must average to pi_k.
struct PotentialOutcomeScenario {
    std::vector<double> pi_support;
    std::vector<double> pi_pmf;
    std::vector<OutcomePair> pairs;
    Table treat;
};

struct Stratum {
    std::string label;
    double weight = 0.0;
    DiscreteScenario scenario;
};

/// Strata of observed covariates X with their law.
struct CovariateFamily {
    std::vector<Stratum> strata;
};

using AnyScenario = std::variant<BinaryScenario, DiscreteScenario, PotentialOutcomeScenario, CovariateFamily>;

// Validation. Each throws ValidationError naming the offending field.
void validate(const BinaryScenario& s);
void validate(const DiscreteScenario& s);
void validate(const PotentialOutcomeScenario& s);
void validate(const CovariateFamily& f);

DiscreteScenario to_discrete(const BinaryScenario& b);

/// Pi(z_i) = sum_j treat(i, j) Pr(U=u_j), one entry per z-level.
std::vector<double> propensity(const DiscreteScenario& s);

/// Pr(A=1 | U=u_j), one entry per u-level.
std::vector<double> treatment_given_u(const DiscreteScenario& s);

/// Merge z-levels whose propensity scores are within tol (single linkage over
/// the sorted scores). The result is supported on the merged propensity values.
DiscreteScenario collapse_by_propensity(const DiscreteScenario& s, double tol = kPropensityMergeTol);

/// True when outcome_mean[a](i, j) does not vary over i within tol.
bool outcome_constant_in_z(const DiscreteScenario& s, double tol = kValidationTol);

}  // namespace zbias
