#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace crcap {

/// Raised when an input violates a documented domain or configuration constraint.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when an iterative method fails to reach its tolerance.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Tolerance {
    double rel = 1e-8;
    double abs = 1e-12;
    int max_iter = 60;

    void validate() const;
};

/// Distribution of the fading power z = |h|^2.
///
/// RayleighPower: z ~ Exp(mean_power).
/// Degenerate:    z == mean_power with probability one.
/// TabulatedCdf:  piecewise-linear CDF through (z[k], cdf[k]); any mass left
///                above cdf.back() sits at z.back().
class FadingModel {
public:
    enum class Kind { RayleighPower, Degenerate, TabulatedCdf };

    static FadingModel rayleigh(double mean_power = 1.0);
    static FadingModel degenerate(double z0);
    static FadingModel tabulated(std::vector<double> z, std::vector<double> cdf);

    Kind kind() const { return kind_; }
    double mean_power() const { return mean_power_; }
    std::span<const double> table_z() const { return z_; }
    std::span<const double> table_cdf() const { return cdf_; }

    double cdf(double z) const;
    /// P{z > alpha}.
    double tail(double alpha) const;
    /// Inverse CDF; p in [0, 1).
    double quantile(double p) const;

private:
    FadingModel(Kind kind, double mean) : kind_(kind), mean_power_(mean) {}

    Kind kind_;
    double mean_power_;
    std::vector<double> z_;
    std::vector<double> cdf_;
};

std::string to_string(FadingModel::Kind kind);
FadingModel::Kind fading_kind_from_string(const std::string& name);

/// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).
double reg_lower_gamma(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed without cancellation.
double reg_upper_gamma(double a, double x);

/// Upper tail of the standard normal.
double gaussian_q(double x);

using ScalarFn = std::function<double(double)>;

/// Adaptive 15-point Gauss-Kronrod on a finite interval.
double integrate_gk(const ScalarFn& f, double lo, double hi, const Tolerance& tol = {});

/// E_z{ g(z) 1[z > lower] } for the given fading law.
///
/// RayleighPower integrals run adaptive Gauss-Kronrod over a dyadic partition
/// of the exponential variable, so integrands concentrated in a tiny
/// neighbourhood of the lower limit are still resolved. Throws NumericError if
/// the error estimate does not reach `tol` within the refinement budget.
double expect_over_fading(const ScalarFn& g, const FadingModel& model, const Tolerance& tol = {},
                          double lower = 0.0);

/// E_z{ h(u) * (over_z ? 1/z : 1) * 1[z > e^{log_lower}] } with u = ln z - log_lower.
///
/// Integrates in u, which resolves integrands whose structure lives on a
/// logarithmic scale above a cutoff that may be far below any dyadic grid
/// (cutoffs down to e^{-700}). With over_z the 1/z factor cancels against the
/// Jacobian, so h may be given as g(z) * z. Rayleigh integrals are truncated at
/// z = 80 * mean power, where the exponential weight is below 1e-34.
double expect_over_fading_log(const ScalarFn& h, const FadingModel& model, double log_lower,
                              const Tolerance& tol = {}, bool over_z = false);

/// Gauss-Laguerre nodes and weights for the weight e^{-t} on [0, inf).
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
QuadratureRule gauss_laguerre_rule(int order);

/// E{g(t)} for t ~ Exp(1) with the fixed-order Gauss-Laguerre rule, doubling the
/// order until successive estimates agree to tol.rel. Only reliable for
/// integrands that are smooth on the scale of the smallest node.
double gauss_laguerre_expect(const ScalarFn& g, const Tolerance& tol = {}, int order = 64);

enum class BracketExpansion {
    Linear,     // widen [lo, hi] by doubling its width
    Geometric,  // positive domain: lo /= 2, hi *= 2
};

/// Root of f, which must be continuous and monotone. The initial bracket is
/// expanded at most tol.max_iter times if f(lo) and f(hi) share a sign.
double find_root_monotone(const ScalarFn& f, double lo, double hi, const Tolerance& tol = {},
                          BracketExpansion expansion = BracketExpansion::Linear);

}  // namespace crcap
