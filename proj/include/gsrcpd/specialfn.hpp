#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include "gsrcpd/error.hpp"

namespace gsrcpd {

/// Degrees of freedom of a central F distribution.
struct FParams {
    double df1 = 1.0;
    double df2 = 1.0;
};

/// ln Gamma(x) for x > 0 (Lanczos approximation, g = 607/128).
inline double ln_gamma(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("ln_gamma requires x > 0");
    static constexpr double cof[14] = {57.1562356658629235,     -59.5979603554754912,    14.1360979747417471,
                                       -0.491913816097620199,   .339946499848118887e-4,  .465236289270485756e-4,
                                       -.983744753048795646e-4, .158088703224912494e-3,  -.210264441724104883e-3,
                                       .217439618115212643e-3,  -.164318106536763890e-3, .844182239838527433e-4,
                                       -.261908384015814087e-4, .368991826595316234e-5};
    double y = x;
    double tmp = x + 5.24218750000000000;
    tmp = (x + 0.5) * std::log(tmp) - tmp;
    double ser = 0.999999999999997092;
    for (double c : cof) ser += c / ++y;
    return tmp + std::log(2.5066282746310005 * ser / x);
}

namespace detail {

/// ln Gamma(z) minus its Stirling approximation, for z >= 10.
inline double stirling_delta(double z) {
    const double r = 1.0 / z;
    const double r2 = r * r;
    return r * (1.0 / 12 + r2 * (-1.0 / 360 + r2 * (1.0 / 1260 + r2 * (-1.0 / 1680 + r2 * (1.0 / 1188 +
           r2 * (-691.0 / 360360 + r2 * (1.0 / 156)))))));
}

inline constexpr double kStirlingMin = 10.0;

}  // namespace detail

/// ln B(a, b); for large arguments the Stirling form avoids cancellation
/// between the three ln Gamma terms.
inline double ln_beta(double a, double b) {
    if (a < b) std::swap(a, b);
    const double s = a + b;
    if (b >= detail::kStirlingMin) {
        return a * std::log(a / s) + b * std::log(b / s) + 0.5 * std::log(2.0 * std::numbers::pi * s / (a * b)) +
               detail::stirling_delta(a) + detail::stirling_delta(b) - detail::stirling_delta(s);
    }
    if (a >= detail::kStirlingMin) {
        // ln Gamma(a) - ln Gamma(a + b) in Stirling form.
        return ln_gamma(b) - (a - 0.5) * std::log1p(b / a) - b * std::log(s) + b + detail::stirling_delta(a) -
               detail::stirling_delta(s);
    }
    return ln_gamma(a) + ln_gamma(b) - ln_gamma(s);
}

namespace detail {

/// ln(x^a y^b / B(a, b)) with y = 1 - x supplied separately.
inline double log_beta_front(double a, double b, double x, double y) {
    if (std::min(a, b) >= kStirlingMin) {
        const double s = a + b;
        const double x0 = a / s;
        const double y0 = b / s;
        const double e = x - x0;
        return a * std::log1p(e / x0) + b * std::log1p(-e / y0) +
               0.5 * std::log(a * b / (2.0 * std::numbers::pi * s)) + stirling_delta(s) - stirling_delta(a) -
               stirling_delta(b);
    }
    return a * std::log(x) + b * std::log(y) - ln_beta(a, b);
}

/// Continued fraction for I_x(a, b) (modified Lentz).
inline double inc_beta_fraction(double a, double b, double x) {
    constexpr int kMaxIter = 1'000'000;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) <= kEps) return h;
    }
    throw NumericalFault("incomplete beta continued fraction did not converge (a=" + std::to_string(a) +
                         ", b=" + std::to_string(b) + ", x=" + std::to_string(x) + ")");
}

}  // namespace detail

namespace detail {

/// I_x(a, b) with both x and y = 1 - x given, so callers can keep y exact.
inline double reg_inc_beta_xy(double a, double b, double x, double y) {
    if (x <= 0.0) return 0.0;
    if (y <= 0.0) return 1.0;
    const double front = std::exp(log_beta_front(a, b, x, y));
    if (x < (a + 1.0) / (a + b + 2.0)) return front * inc_beta_fraction(a, b, x) / a;
    return 1.0 - front * inc_beta_fraction(b, a, y) / b;
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b).
inline double reg_inc_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
        throw DomainError("reg_inc_beta requires a, b > 0");
    }
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("reg_inc_beta requires 0 <= x <= 1");
    return detail::reg_inc_beta_xy(a, b, x, 1.0 - x);
}

inline void require_f_params(const FParams& f) {
    if (!(f.df1 > 0.0) || !(f.df2 > 0.0) || !std::isfinite(f.df1) || !std::isfinite(f.df2)) {
        throw DomainError("F degrees of freedom must be positive and finite");
    }
}

/// CDF of the central F distribution.
inline double f_cdf(double x, const FParams& f) {
    require_f_params(f);
    if (std::isnan(x)) throw DomainError("f_cdf of NaN");
    if (x <= 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    const double t = f.df1 * x;
    return detail::reg_inc_beta_xy(0.5 * f.df1, 0.5 * f.df2, t / (t + f.df2), f.df2 / (t + f.df2));
}

/// Density of the central F distribution.
inline double f_pdf(double x, const FParams& f) {
    require_f_params(f);
    if (x <= 0.0) return 0.0;
    const double a = 0.5 * f.df1;
    const double b = 0.5 * f.df2;
    // pdf = front(a, b, u, 1 - u) / x with u = df1 x / (df1 x + df2).
    const double t = f.df1 * x;
    return std::exp(detail::log_beta_front(a, b, t / (t + f.df2), f.df2 / (t + f.df2))) / x;
}

/// x with f_cdf(x) = p. Geometric bracketing from 1, then Newton steps
/// kept inside the bracket, with bisection whenever Newton would leave it.
inline double f_quantile(double p, const FParams& f) {
    require_f_params(f);
    if (!(p > 0.0 && p < 1.0)) throw DomainError("f_quantile requires 0 < p < 1");
    double lo = 1.0;
    double hi = 1.0;
    double cdf_lo = f_cdf(lo, f);
    double cdf_hi = cdf_lo;
    for (int i = 0; cdf_hi < p; ++i) {
        if (i > 2000) throw NumericalFault("f_quantile: upper bracket not found");
        lo = hi;
        cdf_lo = cdf_hi;
        hi *= 2.0;
        cdf_hi = f_cdf(hi, f);
    }
    for (int i = 0; cdf_lo > p; ++i) {
        if (i > 2000) throw NumericalFault("f_quantile: lower bracket not found");
        hi = lo;
        cdf_hi = cdf_lo;
        lo *= 0.5;
        cdf_lo = f_cdf(lo, f);
    }
    double x = 0.5 * (lo + hi);
    for (int iter = 0; iter < 500; ++iter) {
        const double c = f_cdf(x, f);
        const double err = c - p;
        if (std::fabs(err) <= 1e-14) return x;
        if (err < 0.0) lo = x; else hi = x;
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) return x;
        const double dens = f_pdf(x, f);
        double next = dens > 0.0 ? x - err / dens : lo - 1.0;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        x = next;
    }
    throw NumericalFault("f_quantile did not converge for p=" + std::to_string(p));
}

/// Upper bound on the (1-u) quantile of a non-central chi-square with D
/// degrees of freedom and non-centrality a.
inline double noncentral_chisq_upper_bound(double a, double D, double u) {
    if (!(a >= 0.0) || !(D > 0.0) || !(u > 0.0 && u < 1.0)) {
        throw DomainError("noncentral_chisq_upper_bound: need a >= 0, D > 0, 0 < u < 1");
    }
    const double l = std::log(1.0 / u);
    return D + a + 2.0 * std::sqrt((D + 2.0 * a) * l) + 2.0 * l;
}

/// Lower bound on the u quantile of the same law; may be negative.
inline double noncentral_chisq_lower_bound(double a, double D, double u) {
    if (!(a >= 0.0) || !(D > 0.0) || !(u > 0.0 && u < 1.0)) {
        throw DomainError("noncentral_chisq_lower_bound: need a >= 0, D > 0, 0 < u < 1");
    }
    const double l = std::log(1.0 / u);
    return D + a - 2.0 * std::sqrt((D + 2.0 * a) * l);
}

}  // namespace gsrcpd
