#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gsrcpd/error.hpp"
#include "gsrcpd/specialfn.hpp"

namespace gsrcpd {

/// Expected complete-graph spanning weight of n i.i.d. N(mu, sigma2 I_d)
/// points: n(n-1)/2 pairs, each with E|Y_i - Y_j|^2 = 2 sigma2 d.
inline double cg_gaussian_spanning_expectation(std::size_t n, std::size_t d, double sigma2) {
    return sigma2 * static_cast<double>(n) * static_cast<double>(n - 1) * static_cast<double>(d);
}

/// Inputs of the power calculators. Unset block expectations default to
/// the complete-graph Gaussian value.
struct PowerInputs {
    std::size_t n = 30;
    std::size_t d = 10;
    double alpha = 0.05;
    double beta = 0.1;
    double sigma2 = 1.0;
    std::optional<double> mu_l_sq;
    std::optional<double> mu_r_sq;

    void validate() const {
        if (n < 2) throw DomainError("n must be >= 2");
        if (d == 0) throw DomainError("d must be >= 1");
        if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
        if (!(beta > 0.0 && beta < 1.0)) throw DomainError("beta must lie in (0, 1)");
        if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw DomainError("sigma2 must be positive");
        if (mu_l_sq && !(*mu_l_sq >= 0.0)) throw DomainError("mu_l_sq must be nonnegative");
        if (mu_r_sq && !(*mu_r_sq >= 0.0)) throw DomainError("mu_r_sq must be nonnegative");
    }
    [[nodiscard]] double left() const { return mu_l_sq.value_or(cg_gaussian_spanning_expectation(n, d, sigma2)); }
    [[nodiscard]] double right() const { return mu_r_sq.value_or(cg_gaussian_spanning_expectation(n, d, sigma2)); }
};

/// Threshold on the expected gap-spanning distance above which the pooled
/// mean test has power at least 1 - beta:
/// C1 (mu_l + mu_r + C2 sigma2), C1 = 5 (N/D) F^{-1}_{N,D}(alpha),
/// C2 = (D + 2 sqrt(D L) + 4L) - 5/4 (N - 2 sqrt(N L) - 10 L),
/// N = d, D = 2(n-1)d, L = log(2/beta). F^{-1}(alpha) is the upper-alpha
/// quantile.
inline double delta_mu(const PowerInputs& in) {
    in.validate();
    const double N = static_cast<double>(in.d);
    const double D = 2.0 * static_cast<double>(in.n - 1) * N;
    const double L = std::log(2.0 / in.beta);
    const double c1 = 5.0 * (N / D) * f_quantile(1.0 - in.alpha, {N, D});
    const double c2 = (D + 2.0 * std::sqrt(D * L) + 4.0 * L) - 1.25 * (N - 2.0 * std::sqrt(N * L) - 10.0 * L);
    return c1 * (in.left() + in.right() + c2 * in.sigma2);
}

namespace detail {

/// C1 mu_other + C2 sigma2 for the variance tests, with d_num on the side
/// whose variance grows.
inline double delta_sigma(double mu_other, double d_num, double d_den, double alpha, double beta, double sigma2) {
    const double L = std::log(2.0 / beta);
    const double f = f_quantile(1.0 - alpha, {d_num, d_den});
    const double c1 = 2.5 * (d_num / d_den) * f;
    const double c2 = 1.25 * (d_num / d_den) * f * (d_den + 2.0 * std::sqrt(d_den * L) + 4.0 * L) -
                      1.25 * (d_num - 2.0 * std::sqrt(d_num * L) - 10.0 * L);
    return c1 * mu_other + c2 * sigma2;
}

}  // namespace detail

/// Lower bound on the right-block spanning expectation for power 1 - beta
/// against a variance increase.
inline double delta_sigma_plus(const PowerInputs& in) {
    in.validate();
    const double h = static_cast<double>(in.n - 1) * static_cast<double>(in.d);
    return detail::delta_sigma(in.left(), h, h, in.alpha, in.beta, in.sigma2);
}

/// Left/right exchange of delta_sigma_plus for a variance decrease.
inline double delta_sigma_minus(const PowerInputs& in) {
    in.validate();
    const double h = static_cast<double>(in.n - 1) * static_cast<double>(in.d);
    return detail::delta_sigma(in.right(), h, h, in.alpha, in.beta, in.sigma2);
}

inline double min_radius_theta(double alpha, double beta) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    if (!(beta > 0.0 && beta < 1.0 - alpha)) throw DomainError("beta must lie in (0, 1 - alpha)");
    const double g = 1.0 - alpha - beta;
    return std::sqrt(2.0 * std::log1p(4.0 * g * g));
}

/// theta(alpha, beta) sqrt(n d) sigma2: gap-spanning separations below this
/// cannot be detected at level alpha with power 1 - beta.
inline double min_radius(double alpha, double beta, std::size_t n, std::size_t d, double sigma2) {
    if (n == 0 || d == 0) throw DomainError("n and d must be positive");
    if (!(sigma2 > 0.0)) throw DomainError("sigma2 must be positive");
    return min_radius_theta(alpha, beta) * std::sqrt(static_cast<double>(n) * static_cast<double>(d)) * sigma2;
}

/// Expected gap-spanning distance 2 sigma2 n^2 d of two i.i.d. Gaussian halves.
inline double gap_expectation(std::size_t n, std::size_t d, double sigma2) {
    if (n == 0 || d == 0) throw DomainError("n and d must be positive");
    if (!(sigma2 > 0.0)) throw DomainError("sigma2 must be positive");
    return 2.0 * sigma2 * static_cast<double>(n) * static_cast<double>(n) * static_cast<double>(d);
}

struct DeltaMuPoint {
    double beta = 0.0;
    double delta_mu = 0.0;
    std::size_t n = 0;
    std::size_t d = 0;
    double alpha = 0.0;
};

/// Block expectations used for the (beta, delta_mu) curves.
enum class BlockPlugin {
    /// mu_l = mu_r = 0: the threshold's noise part only.
    Zero,
    CgGaussian,
};

/// (beta, delta_mu) curve for each n; beta = 0.05, 0.10, ..., 0.50 by default.
inline std::vector<DeltaMuPoint> delta_mu_series(const std::vector<std::size_t>& ns, std::size_t d, double alpha,
                                                 BlockPlugin plugin = BlockPlugin::Zero,
                                                 std::vector<double> betas = {}, double sigma2 = 1.0) {
    if (betas.empty())
        for (int i = 1; i <= 10; ++i) betas.push_back(0.05 * i);
    std::vector<DeltaMuPoint> out;
    for (auto n : ns) {
        for (double b : betas) {
            PowerInputs in{n, d, alpha, b, sigma2, std::nullopt, std::nullopt};
            if (plugin == BlockPlugin::Zero) in.mu_l_sq = in.mu_r_sq = 0.0;
            out.push_back({b, delta_mu(in), n, d, alpha});
        }
    }
    return out;
}

inline void write_delta_mu_csv(std::ostream& os, const std::vector<DeltaMuPoint>& pts) {
    const auto old = os.precision(17);
    os << "beta,delta_mu,n,d,alpha\n";
    for (const auto& p : pts) os << p.beta << ',' << p.delta_mu << ',' << p.n << ',' << p.d << ',' << p.alpha << '\n';
    os.precision(old);
}

}  // namespace gsrcpd
