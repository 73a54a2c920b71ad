#pragma once

#include <array>
#include <cmath>
#include <initializer_list>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gsrcpd/error.hpp"
#include "gsrcpd/graphkit.hpp"
#include "gsrcpd/observation.hpp"

namespace gsrcpd {

/// The three graph-spanning-ratio statistics.
enum class StatKind { Mean = 0, VarUp = 1, VarDown = 2 };

inline constexpr std::array<StatKind, 3> kAllStats{StatKind::Mean, StatKind::VarUp, StatKind::VarDown};

inline constexpr std::size_t index_of(StatKind s) { return static_cast<std::size_t>(s); }

inline std::string_view to_string(StatKind s) {
    switch (s) {
        case StatKind::Mean: return "mean";
        case StatKind::VarUp: return "var_up";
        case StatKind::VarDown: return "var_down";
    }
    return "?";
}

inline StatKind parse_stat_kind(std::string_view name) {
    if (name == "mean") return StatKind::Mean;
    if (name == "var_up") return StatKind::VarUp;
    if (name == "var_down") return StatKind::VarDown;
    throw DomainError("unknown statistic '" + std::string(name) + "'");
}

/// Subset of statistics a detector watches.
class StatSet {
  public:
    constexpr StatSet() = default;
    constexpr StatSet(std::initializer_list<StatKind> stats) {
        for (auto s : stats) bits_ |= 1u << index_of(s);
    }
    static constexpr StatSet all() { return {StatKind::Mean, StatKind::VarUp, StatKind::VarDown}; }

    constexpr void insert(StatKind s) { bits_ |= 1u << index_of(s); }
    [[nodiscard]] constexpr bool contains(StatKind s) const { return (bits_ >> index_of(s)) & 1u; }
    [[nodiscard]] constexpr bool empty() const { return bits_ == 0; }
    [[nodiscard]] constexpr std::size_t size() const {
        return ((bits_ >> 0) & 1u) + ((bits_ >> 1) & 1u) + ((bits_ >> 2) & 1u);
    }
    friend constexpr bool operator==(StatSet, StatSet) = default;

  private:
    unsigned bits_ = 0;
};

/// Inclusive range of reference points.
struct KRange {
    std::size_t first = 2;
    std::size_t last = 2;

    [[nodiscard]] std::size_t count() const { return last - first + 1; }
    [[nodiscard]] bool contains(std::size_t k) const { return k >= first && k <= last; }
    friend bool operator==(const KRange&, const KRange&) = default;
};

inline KRange full_k_range(std::size_t n, std::size_t t0 = 2) {
    if (n < 2 || t0 < 2 || 2 * n < 2 * t0) throw DomainError("invalid k range for n=" + std::to_string(n));
    return {t0, 2 * n - t0};
}

inline KRange symmetric_k_range(std::size_t n) {
    if (n < 2) throw DomainError("window half-length must be >= 2");
    return {n, n};
}

namespace detail {
inline void require_k(std::size_t n, std::size_t k) {
    if (n < 2 || k < 2 || k > 2 * n - 2) {
        throw DomainError("reference point k=" + std::to_string(k) + " outside [2, 2n-2] for n=" + std::to_string(n));
    }
}
}  // namespace detail

/// Mean-change ratio: (w2n - a wl - b wr) / (a wl + b wr), a = 2n/k, b = 2n/(2n-k).
inline double r_mu(double wl, double wr, double w2n, std::size_t n, std::size_t k) {
    detail::require_k(n, k);
    const double two_n = 2.0 * static_cast<double>(n);
    const double a = two_n / static_cast<double>(k);
    const double b = two_n / (two_n - static_cast<double>(k));
    const double denom = a * wl + b * wr;
    if (!(denom > 0.0)) throw DegenerateWindow("mean ratio denominator vanished at k=" + std::to_string(k));
    return (w2n - a * wl - b * wr) / denom;
}

/// Symmetric-window mean ratio in Fisher form, w2n / (wl + wr) - 2. It equals
/// 2 r_mu(k = n); under Gaussian H0 with the complete graph it is distributed
/// as 2 (d / D) F_{d, D}, D = 2(n-1)d.
inline double r_mu_fisher_form(double wl, double wr, double w2n) {
    if (!(wl + wr > 0.0)) throw DegenerateWindow("mean ratio denominator vanished");
    return w2n / (wl + wr) - 2.0;
}

/// Variance-increase ratio ((k-1) wr) / ((2n-k-1) wl).
inline double r_sigma_up(double wl, double wr, std::size_t n, std::size_t k) {
    detail::require_k(n, k);
    if (!(wl > 0.0)) throw DegenerateWindow("left spanning weight vanished at k=" + std::to_string(k));
    return (static_cast<double>(k - 1) * wr) / (static_cast<double>(2 * n - k - 1) * wl);
}

/// Variance-decrease ratio ((2n-k-1) wl) / ((k-1) wr).
inline double r_sigma_down(double wl, double wr, std::size_t n, std::size_t k) {
    detail::require_k(n, k);
    if (!(wr > 0.0)) throw DegenerateWindow("right spanning weight vanished at k=" + std::to_string(k));
    return (static_cast<double>(2 * n - k - 1) * wl) / (static_cast<double>(k - 1) * wr);
}

/// All three statistics for one triplet; nullopt where a denominator is zero.
inline std::array<std::optional<double>, 3> evaluate_stats(const SpanningTriplet& t, std::size_t n, std::size_t k) {
    std::array<std::optional<double>, 3> out;
    const double two_n = 2.0 * static_cast<double>(n);
    if (two_n / static_cast<double>(k) * t.left + two_n / (two_n - static_cast<double>(k)) * t.right > 0.0)
        out[0] = r_mu(t.left, t.right, t.full, n, k);
    if (t.left > 0.0) out[1] = r_sigma_up(t.left, t.right, n, k);
    if (t.right > 0.0) out[2] = r_sigma_down(t.left, t.right, n, k);
    return out;
}

/// The statistics of one window across its reference points.
struct StatisticProfile {
    std::size_t n = 0;
    GraphKind graph = GraphKind::Complete;
    KRange ks;
    /// values[stat][k - ks.first]; nullopt where the statistic is undefined.
    std::array<std::vector<std::optional<double>>, 3> values;
    /// Reference points where at least one denominator vanished.
    std::vector<std::size_t> degenerate_ks;

    [[nodiscard]] std::optional<double> value(StatKind s, std::size_t k) const {
        if (!ks.contains(k)) return std::nullopt;
        return values[index_of(s)][k - ks.first];
    }

    [[nodiscard]] std::size_t defined_count() const {
        std::size_t c = 0;
        for (const auto& v : values)
            for (const auto& x : v) c += x.has_value();
        return c;
    }

    /// Smallest k attaining the maximum of statistic s.
    [[nodiscard]] std::optional<std::size_t> argmax(StatKind s) const {
        std::optional<std::size_t> best;
        double best_v = 0.0;
        for (std::size_t k = ks.first; k <= ks.last; ++k) {
            const auto v = value(s, k);
            if (v && (!best || *v > best_v)) {
                best = k;
                best_v = *v;
            }
        }
        return best;
    }
};

/// Profile from an already-built spanning engine of a 2n window.
inline StatisticProfile profile(const SpanningEngine& engine, KRange ks) {
    const std::size_t m = engine.size();
    if (m < 4 || m % 2 != 0) throw DomainError("profile needs an even window length >= 4, got " + std::to_string(m));
    const std::size_t n = m / 2;
    if (ks.first < 2 || ks.last > 2 * n - 2 || ks.first > ks.last) throw DomainError("k range outside [2, 2n-2]");
    StatisticProfile p;
    p.n = n;
    p.graph = engine.kind();
    p.ks = ks;
    for (auto& v : p.values) v.assign(ks.count(), std::nullopt);
    const double full = engine.full_weight();
    for (std::size_t k = ks.first; k <= ks.last; ++k) {
        const auto stats = evaluate_stats(engine.triplet(k, full), n, k);
        bool degenerate = false;
        for (std::size_t s = 0; s < 3; ++s) {
            p.values[s][k - ks.first] = stats[s];
            degenerate = degenerate || !stats[s];
        }
        if (degenerate) p.degenerate_ks.push_back(k);
    }
    return p;
}

/// Evaluates all three statistics of a 2n window at every k in `ks`
/// (default: 2..2n-2).
inline StatisticProfile profile(const ObservationWindow& window, GraphKind graph, std::optional<KRange> ks = {}) {
    const std::size_t m = window.size();
    if (m < 4 || m % 2 != 0) throw DomainError("profile needs an even window length >= 4, got " + std::to_string(m));
    const SpanningEngine engine(window, graph);
    return profile(engine, ks.value_or(full_k_range(m / 2)));
}

/// Statistic value and calibrated threshold of one window size.
struct Margin {
    double r = 0.0;
    double rho = 0.0;
};

/// Supremum over window sizes of (R_mu,n - rho_mu,n); alarm when positive.
struct PooledStatistic {
    std::map<std::size_t, double> contributions;
    double value = 0.0;
    bool alarm = false;
};

inline PooledStatistic pooled_mu(const std::map<std::size_t, Margin>& margins) {
    if (margins.empty()) throw DomainError("pooled statistic needs at least one window size");
    PooledStatistic out;
    bool first = true;
    for (const auto& [n, m] : margins) {
        if (!std::isfinite(m.r) || !std::isfinite(m.rho)) {
            throw DomainError("non-finite margin for window n=" + std::to_string(n));
        }
        const double c = m.r - m.rho;
        out.contributions[n] = c;
        if (first || c > out.value) out.value = c;
        first = false;
    }
    out.alarm = out.value > 0.0;
    return out;
}

}  // namespace gsrcpd
