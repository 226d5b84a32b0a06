#include "crcap/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <queue>

namespace crcap {

void Tolerance::validate() const {
    if (!(rel > 0.0) || !(abs > 0.0) || max_iter < 1) {
        throw ConfigError("tolerance requires rel > 0, abs > 0, max_iter >= 1");
    }
}

// ---------------------------------------------------------------------------
// Fading laws

FadingModel FadingModel::rayleigh(double mean_power) {
    if (!std::isfinite(mean_power) || mean_power <= 0.0) {
        throw ConfigError("rayleigh fading needs mean_power > 0");
    }
    return FadingModel(Kind::RayleighPower, mean_power);
}

FadingModel FadingModel::degenerate(double z0) {
    if (!std::isfinite(z0) || z0 <= 0.0) {
        throw ConfigError("degenerate fading needs z0 > 0");
    }
    return FadingModel(Kind::Degenerate, z0);
}

FadingModel FadingModel::tabulated(std::vector<double> z, std::vector<double> cdf) {
    if (z.size() < 2 || z.size() != cdf.size()) {
        throw ConfigError("tabulated fading needs at least two (z, cdf) pairs of equal length");
    }
    for (std::size_t k = 0; k < z.size(); ++k) {
        if (!std::isfinite(z[k]) || !std::isfinite(cdf[k]) || z[k] < 0.0 || cdf[k] < 0.0 ||
            cdf[k] > 1.0) {
            throw ConfigError("tabulated fading entries must be finite, z >= 0, cdf in [0,1]");
        }
        if (k > 0 && (z[k] <= z[k - 1] || cdf[k] < cdf[k - 1])) {
            throw ConfigError("tabulated fading needs strictly increasing z and nondecreasing cdf");
        }
    }
    // Mean of the piecewise-linear CDF: uniform mass on each cell, an atom at
    // z[0] for cdf[0] and an atom at z.back() for 1 - cdf.back().
    double mean = cdf.front() * z.front() + (1.0 - cdf.back()) * z.back();
    for (std::size_t k = 1; k < z.size(); ++k) {
        mean += (cdf[k] - cdf[k - 1]) * 0.5 * (z[k] + z[k - 1]);
    }
    if (mean <= 0.0) {
        throw ConfigError("tabulated fading has zero mean power");
    }
    FadingModel m(Kind::TabulatedCdf, mean);
    m.z_ = std::move(z);
    m.cdf_ = std::move(cdf);
    return m;
}

double FadingModel::cdf(double z) const {
    switch (kind_) {
        case Kind::RayleighPower:
            return z <= 0.0 ? 0.0 : -std::expm1(-z / mean_power_);
        case Kind::Degenerate:
            return z < mean_power_ ? 0.0 : 1.0;
        case Kind::TabulatedCdf: {
            if (z < z_.front()) return 0.0;
            if (z >= z_.back()) return 1.0;
            auto it = std::upper_bound(z_.begin(), z_.end(), z);
            const std::size_t k = static_cast<std::size_t>(it - z_.begin());
            const double w = (z - z_[k - 1]) / (z_[k] - z_[k - 1]);
            return cdf_[k - 1] + w * (cdf_[k] - cdf_[k - 1]);
        }
    }
    return 0.0;
}

double FadingModel::tail(double alpha) const {
    if (std::isnan(alpha)) throw ConfigError("tail probability of NaN threshold");
    switch (kind_) {
        case Kind::RayleighPower:
            return alpha <= 0.0 ? 1.0 : std::exp(-alpha / mean_power_);
        case Kind::Degenerate:
            return mean_power_ > alpha ? 1.0 : 0.0;
        case Kind::TabulatedCdf:
            return 1.0 - cdf(alpha);
    }
    return 0.0;
}

double FadingModel::quantile(double p) const {
    if (!(p >= 0.0 && p < 1.0)) throw ConfigError("quantile level must lie in [0, 1)");
    switch (kind_) {
        case Kind::RayleighPower:
            return -mean_power_ * std::log1p(-p);
        case Kind::Degenerate:
            return mean_power_;
        case Kind::TabulatedCdf: {
            if (p <= cdf_.front()) return z_.front();
            if (p >= cdf_.back()) return z_.back();
            auto it = std::upper_bound(cdf_.begin(), cdf_.end(), p);
            const std::size_t k = static_cast<std::size_t>(it - cdf_.begin());
            const double w = (p - cdf_[k - 1]) / (cdf_[k] - cdf_[k - 1]);
            return z_[k - 1] + w * (z_[k] - z_[k - 1]);
        }
    }
    return 0.0;
}

std::string to_string(FadingModel::Kind kind) {
    switch (kind) {
        case FadingModel::Kind::RayleighPower: return "rayleigh";
        case FadingModel::Kind::Degenerate: return "degenerate";
        case FadingModel::Kind::TabulatedCdf: return "tabulated";
    }
    return "unknown";
}

FadingModel::Kind fading_kind_from_string(const std::string& name) {
    if (name == "rayleigh") return FadingModel::Kind::RayleighPower;
    if (name == "degenerate") return FadingModel::Kind::Degenerate;
    if (name == "tabulated") return FadingModel::Kind::TabulatedCdf;
    throw ConfigError("unknown fading kind '" + name + "'");
}

// ---------------------------------------------------------------------------
// Incomplete gamma

namespace {

constexpr double kEps = 2.220446049250313e-16;

// lgamma(a) - Stirling approximation, accurate for a >= 10.
double stirling_error(double a) {
    const double a2 = a * a;
    return (1.0 / 12.0 -
            (1.0 / 360.0 - (1.0 / 1260.0 - (1.0 / 1680.0 - (1.0 / 1188.0 - (691.0 / 360360.0) / a2) / a2) / a2) / a2) /
                a2) /
           a;
}

// x^a e^{-x} / Gamma(a), evaluated without forming the huge exponent terms
// separately when a is large.
double gamma_prefactor(double a, double x) {
    if (x == 0.0) return 0.0;
    if (a < 10.0) {
        return std::exp(a * std::log(x) - x - std::log(std::tgamma(a)));
    }
    const double d = (x - a) / a;
    // a * (d - log1p(d)) is the Kullback-type deviation of x from a.
    const double dev = a * (d - std::log1p(d));
    return std::sqrt(a / (2.0 * std::numbers::pi)) * std::exp(-dev - stirling_error(a));
}

int gamma_iteration_cap(double a) { return 200 + static_cast<int>(30.0 * std::sqrt(a)); }

// Series for P(a, x); converges for x < a + 1.
double lower_gamma_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    const int cap = gamma_iteration_cap(a);
    for (int n = 1; n < cap; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * kEps) {
            return std::min(1.0, sum * gamma_prefactor(a, x));
        }
    }
    throw NumericError("incomplete gamma series did not converge");
}

// Modified Lentz continued fraction for Q(a, x); converges for x > a + 1.
double upper_gamma_fraction(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    const int cap = gamma_iteration_cap(a);
    for (int i = 1; i < cap; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEps) {
            return std::min(1.0, gamma_prefactor(a, x) * h);
        }
    }
    throw NumericError("incomplete gamma continued fraction did not converge");
}

void check_gamma_args(double a, double x) {
    if (!std::isfinite(a) || a <= 0.0) throw ConfigError("incomplete gamma needs finite a > 0");
    if (std::isnan(x) || x < 0.0) throw ConfigError("incomplete gamma needs x >= 0");
}

}  // namespace

double reg_lower_gamma(double a, double x) {
    check_gamma_args(a, x);
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    if (x < a + 1.0) return lower_gamma_series(a, x);
    return 1.0 - upper_gamma_fraction(a, x);
}

double reg_upper_gamma(double a, double x) {
    check_gamma_args(a, x);
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    if (x < a + 1.0) return 1.0 - lower_gamma_series(a, x);
    return upper_gamma_fraction(a, x);
}

double gaussian_q(double x) {
    if (!std::isfinite(x)) {
        if (std::isnan(x)) throw ConfigError("gaussian_q of NaN");
        return x > 0 ? 0.0 : 1.0;
    }
    return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

// ---------------------------------------------------------------------------
// Gauss-Kronrod

namespace {

constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double lo;
    double hi;
    double value;
    double error;
    int depth;

    bool operator<(const Segment& other) const { return error < other.error; }
};

Segment gk15(const ScalarFn& f, double lo, double hi, int depth) {
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const double fc = f(center);
    double kronrod = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const double fsum = f(center - dx) + f(center + dx);
        kronrod += kWgk[j] * fsum;
        if (j % 2 == 1) gauss += kWg[j / 2] * fsum;
    }
    kronrod *= half;
    gauss *= half;
    if (!std::isfinite(kronrod)) {
        throw NumericError("integrand is not finite on [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "]");
    }
    return {lo, hi, kronrod, std::abs(kronrod - gauss), depth};
}

constexpr std::size_t kMaxSegments = 20000;

double adaptive_gk(const ScalarFn& f, std::span<const double> breaks, const Tolerance& tol) {
    tol.validate();
    std::priority_queue<Segment> heap;
    double total = 0.0;
    double error = 0.0;
    for (std::size_t k = 1; k < breaks.size(); ++k) {
        Segment s = gk15(f, breaks[k - 1], breaks[k], 0);
        total += s.value;
        error += s.error;
        heap.push(s);
    }
    while (error > std::max(tol.abs, tol.rel * std::abs(total))) {
        Segment worst = heap.top();
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (worst.depth >= tol.max_iter || heap.size() >= kMaxSegments || mid <= worst.lo ||
            mid >= worst.hi) {
            throw NumericError("adaptive quadrature did not reach tolerance (error estimate " +
                               std::to_string(error) + ", value " + std::to_string(total) + ")");
        }
        heap.pop();
        const Segment left = gk15(f, worst.lo, mid, worst.depth + 1);
        const Segment right = gk15(f, mid, worst.hi, worst.depth + 1);
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed the drift of the running updates.
    double sum = 0.0;
    while (!heap.empty()) {
        sum += heap.top().value;
        heap.pop();
    }
    return sum;
}

}  // namespace

double integrate_gk(const ScalarFn& f, double lo, double hi, const Tolerance& tol) {
    if (!std::isfinite(lo) || !std::isfinite(hi)) throw ConfigError("integrate_gk needs finite limits");
    if (lo == hi) return 0.0;
    if (lo > hi) return -integrate_gk(f, hi, lo, tol);
    const std::array<double, 2> breaks = {lo, hi};
    return adaptive_gk(f, breaks, tol);
}

namespace {

// Dyadic breakpoints 0, 2^-44, ..., 2^6 for the unit-rate exponential variable.
constexpr int kDyadicLow = -44;
constexpr int kDyadicHigh = 6;

std::vector<double> dyadic_breaks() {
    std::vector<double> b;
    b.push_back(0.0);
    for (int e = kDyadicLow; e <= kDyadicHigh; ++e) b.push_back(std::ldexp(1.0, e));
    return b;
}

constexpr int kTabulatedGrid = 1 << 14;

}  // namespace

double expect_over_fading(const ScalarFn& g, const FadingModel& model, const Tolerance& tol,
                          double lower) {
    if (std::isnan(lower)) throw ConfigError("expectation lower limit is NaN");
    lower = std::max(lower, 0.0);
    switch (model.kind()) {
        case FadingModel::Kind::Degenerate: {
            const double z0 = model.mean_power();
            return z0 > lower ? g(z0) : 0.0;
        }
        case FadingModel::Kind::TabulatedCdf: {
            double sum = 0.0;
            for (int j = 0; j < kTabulatedGrid; ++j) {
                const double z = model.quantile((j + 0.5) / kTabulatedGrid);
                if (z > lower) sum += g(z);
            }
            return sum / kTabulatedGrid;
        }
        case FadingModel::Kind::RayleighPower: {
            const double s2 = model.mean_power();
            const double shift = lower / s2;
            const double mass = std::exp(-shift);
            if (mass == 0.0) return 0.0;
            static const std::vector<double> breaks = dyadic_breaks();
            const double t_hi = breaks.back();
            const ScalarFn body = [&](double t) { return g(lower + s2 * t) * std::exp(-t); };
            const double head = adaptive_gk(body, breaks, tol);
            // Remaining tail [t_hi, inf) mapped onto [0, 1).
            const ScalarFn tail_fn = [&](double s) {
                const double om = 1.0 - s;
                return body(t_hi + s / om) / (om * om);
            };
            const std::array<double, 2> unit = {0.0, 1.0};
            Tolerance tail_tol = tol;
            tail_tol.abs = std::max(tol.abs, tol.rel * std::abs(head));
            const double tail = adaptive_gk(tail_fn, unit, tail_tol);
            return mass * (head + tail);
        }
    }
    return 0.0;
}

double expect_over_fading_log(const ScalarFn& h, const FadingModel& model, double log_lower,
                              const Tolerance& tol, bool over_z) {
    if (std::isnan(log_lower)) throw ConfigError("expectation log lower limit is NaN");
    switch (model.kind()) {
        case FadingModel::Kind::Degenerate: {
            const double z0 = model.mean_power();
            const double u = std::log(z0) - log_lower;
            if (!(u > 0.0)) return 0.0;
            return over_z ? h(u) / z0 : h(u);
        }
        case FadingModel::Kind::TabulatedCdf: {
            double sum = 0.0;
            for (int j = 0; j < kTabulatedGrid; ++j) {
                const double z = model.quantile((j + 0.5) / kTabulatedGrid);
                const double u = std::log(z) - log_lower;
                if (u > 0.0) sum += over_z ? h(u) / z : h(u);
            }
            return sum / kTabulatedGrid;
        }
        case FadingModel::Kind::RayleighPower: {
            const double s2 = model.mean_power();
            const double u_max = std::log(80.0 * s2) - log_lower;
            if (!(u_max > 0.0)) return 0.0;
            // Integrand in u: h(u) f(z) z du, or h(u) f(z) du when dividing by z.
            const ScalarFn body = [&](double u) {
                const double log_z = log_lower + u;
                const double x = std::exp(log_z) / s2;
                const double weight = over_z ? std::exp(-x) / s2 : x * std::exp(-x);
                return weight == 0.0 ? 0.0 : h(u) * weight;
            };
            constexpr int pieces = 32;
            std::vector<double> breaks(pieces + 1);
            for (int k = 0; k <= pieces; ++k) breaks[k] = u_max * k / pieces;
            return adaptive_gk(body, breaks, tol);
        }
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Gauss-Laguerre via the Golub-Welsch eigenproblem

QuadratureRule gauss_laguerre_rule(int order) {
    if (order < 1 || order > 1024) throw ConfigError("Gauss-Laguerre order must be in [1, 1024]");
    const std::size_t n = static_cast<std::size_t>(order);
    // Jacobi matrix: diagonal 2k+1, off-diagonal k.
    std::vector<double> d(n), e(n, 0.0), z(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) d[k] = 2.0 * static_cast<double>(k) + 1.0;
    for (std::size_t k = 0; k + 1 < n; ++k) e[k] = static_cast<double>(k + 1);
    z[0] = 1.0;  // first components of the eigenvectors

    // Implicit QL, tracking only the first row of the eigenvector matrix.
    for (std::size_t l = 0; l < n; ++l) {
        int iter = 0;
        std::size_t m;
        do {
            for (m = l; m + 1 < n; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= kEps * dd) break;
            }
            if (m != l) {
                if (iter++ == 60) throw NumericError("Gauss-Laguerre eigensolver did not converge");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                bool underflow = false;
                for (std::size_t i = m; i-- > l;) {
                    const double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    const double zf = z[i + 1];
                    z[i + 1] = s * z[i] + c * zf;
                    z[i] = c * z[i] - s * zf;
                }
                if (underflow) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }

    std::vector<std::size_t> idx(n);
    for (std::size_t k = 0; k < n; ++k) idx[k] = k;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
    QuadratureRule rule;
    rule.nodes.reserve(n);
    rule.weights.reserve(n);
    for (std::size_t k : idx) {
        rule.nodes.push_back(d[k]);
        rule.weights.push_back(z[k] * z[k]);
    }
    return rule;
}

double gauss_laguerre_expect(const ScalarFn& g, const Tolerance& tol, int order) {
    tol.validate();
    auto apply = [&](const QuadratureRule& rule) {
        double sum = 0.0;
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) sum += rule.weights[k] * g(rule.nodes[k]);
        return sum;
    };
    double previous = apply(gauss_laguerre_rule(order));
    for (int round = 0; round < tol.max_iter && order * 2 <= 1024; ++round) {
        order *= 2;
        const double current = apply(gauss_laguerre_rule(order));
        if (std::abs(current - previous) <= std::max(tol.abs, tol.rel * std::abs(current))) {
            return current;
        }
        previous = current;
    }
    throw NumericError("Gauss-Laguerre estimates did not settle");
}

// ---------------------------------------------------------------------------
// Root finding

double find_root_monotone(const ScalarFn& f, double lo, double hi, const Tolerance& tol,
                          BracketExpansion expansion) {
    tol.validate();
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw ConfigError("root bracket needs finite lo < hi");
    }
    if (expansion == BracketExpansion::Geometric && lo <= 0.0) {
        throw ConfigError("geometric bracket expansion needs lo > 0");
    }
    auto eval = [&](double x) {
        const double v = f(x);
        if (std::isnan(v)) throw NumericError("root function returned NaN");
        return v;
    };
    double fa = eval(lo);
    double fb = eval(hi);
    for (int k = 0; fa * fb > 0.0; ++k) {
        if (k >= tol.max_iter) throw NumericError("no root in range after bracket expansion");
        // For a monotone f the root lies beyond the endpoint with the smaller |f|.
        const bool move_lo = std::abs(fa) < std::abs(fb);
        if (expansion == BracketExpansion::Geometric) {
            if (move_lo) { hi = lo; fb = fa; lo *= 0.5; fa = eval(lo); }
            else { lo = hi; fa = fb; hi *= 2.0; fb = eval(hi); }
        } else {
            const double width = 2.0 * (hi - lo);
            if (move_lo) { hi = lo; fb = fa; lo -= width; fa = eval(lo); }
            else { lo = hi; fa = fb; hi += width; fb = eval(hi); }
        }
    }
    if (fa == 0.0) return lo;
    if (fb == 0.0) return hi;

    // Brent's method.
    double a = lo, b = hi, c = hi;
    double fc = fb;
    double d = b - a, e = d;
    for (int iter = 0; iter < 4 * tol.max_iter; ++iter) {
        if ((fb > 0.0 && fc > 0.0) || (fb < 0.0 && fc < 0.0)) {
            c = a;
            fc = fa;
            e = d = b - a;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 = 2.0 * kEps * std::abs(b) + 0.5 * tol.abs;
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || std::abs(fb) <= tol.abs) return b;
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            double p, q, r;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                q = fa / fc;
                r = fb / fc;
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            const double min1 = 3.0 * xm * q - std::abs(tol1 * q);
            const double min2 = std::abs(e * q);
            if (2.0 * p < std::min(min1, min2)) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += std::abs(d) > tol1 ? d : std::copysign(tol1, xm);
        fb = eval(b);
    }
    throw NumericError("root finder exceeded its iteration budget");
}

}  // namespace crcap
