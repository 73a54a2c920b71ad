#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gsrcpd/error.hpp"
#include "gsrcpd/graphkit.hpp"
#include "gsrcpd/gsr_stats.hpp"
#include "gsrcpd/observation.hpp"
#include "gsrcpd/parallel.hpp"
#include "gsrcpd/rng.hpp"
#include "gsrcpd/specialfn.hpp"

namespace gsrcpd {

enum class ResampleMethod { Bootstrap, Permutation };

inline std::string_view to_string(ResampleMethod m) {
    return m == ResampleMethod::Bootstrap ? "bootstrap" : "permutation";
}

inline ResampleMethod parse_resample_method(std::string_view name) {
    if (name == "bootstrap") return ResampleMethod::Bootstrap;
    if (name == "permutation") return ResampleMethod::Permutation;
    throw DomainError("unknown resampling method '" + std::string(name) + "'");
}

struct CalibrationConfig {
    std::size_t n = 16;
    double alpha = 0.025;
    std::size_t reps = 500;
    ResampleMethod method = ResampleMethod::Permutation;
    GraphKind graph = GraphKind::Complete;
    std::uint64_t seed = 0;
    std::size_t t0 = 2;
    double bisection_tol = 0.001;
    std::size_t max_iters = 100;
    /// Calibrate only the symmetric reference point k = n.
    bool symmetric_only = false;
    /// Length N of each resampled stream; the whole training stream when
    /// unset. With N < m = training length, permutation draws N rows
    /// without replacement from the m available.
    std::optional<std::size_t> stream_length;

    [[nodiscard]] KRange k_range() const { return symmetric_only ? symmetric_k_range(n) : full_k_range(n, t0); }

    void validate(std::size_t train_length) const {
        if (n < 2) throw DomainError("window half-length n must be >= 2");
        if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
        if (reps == 0) throw DomainError("reps must be positive");
        if (alpha * static_cast<double>(reps) < 5.0) {
            throw DomainError("alpha * reps must be >= 5 (got " + std::to_string(alpha * static_cast<double>(reps)) +
                              ")");
        }
        if (t0 < 2 || t0 > n) throw DomainError("t0 must lie in [2, n]");
        if (!(bisection_tol > 0.0)) throw DomainError("bisection tolerance must be positive");
        if (max_iters == 0) throw DomainError("max_iters must be positive");
        if (train_length < 2 * n) {
            throw DomainError("training stream has " + std::to_string(train_length) +
                              " observations; calibration needs at least 2n = " + std::to_string(2 * n));
        }
        if (stream_length) {
            if (*stream_length < 2 * n) throw DomainError("resampled stream length must be at least 2n");
            if (method == ResampleMethod::Permutation && *stream_length > train_length) {
                throw DomainError("permutation stream length exceeds the training stream");
            }
        }
    }
};

/// Per-statistic, per-k critical values plus calibration metadata.
struct ThresholdTable {
    int version = 1;
    std::size_t n = 0;
    std::size_t d = 0;
    double alpha = 0.0;
    GraphKind graph = GraphKind::Complete;
    /// "permutation", "bootstrap" or "parametric".
    std::string method = "permutation";
    std::size_t reps = 0;
    std::uint64_t seed = 0;
    std::array<std::map<std::size_t, double>, 3> rho;
    std::array<double, 3> alpha_star{};
    std::array<double, 3> achieved_rate{};
    std::array<bool, 3> stat_converged{};
    bool converged = false;
    std::size_t dropped_replicates = 0;

    [[nodiscard]] std::optional<double> threshold(StatKind s, std::size_t k) const {
        const auto& m = rho[index_of(s)];
        const auto it = m.find(k);
        if (it == m.end()) return std::nullopt;
        return it->second;
    }

    /// Smallest range covering every calibrated k.
    [[nodiscard]] KRange k_range() const {
        std::size_t lo = std::numeric_limits<std::size_t>::max(), hi = 0;
        for (const auto& m : rho) {
            if (m.empty()) continue;
            lo = std::min(lo, m.begin()->first);
            hi = std::max(hi, m.rbegin()->first);
        }
        if (hi == 0) throw DomainError("threshold table is empty");
        return {lo, hi};
    }

    /// Same thresholds everywhere; for tests and degenerate baselines.
    static ThresholdTable constant(std::size_t n, std::size_t d, double value, std::optional<KRange> ks = {}) {
        ThresholdTable t;
        t.n = n;
        t.d = d;
        t.method = "constant";
        t.converged = true;
        const auto range = ks.value_or(full_k_range(n));
        for (auto& m : t.rho)
            for (std::size_t k = range.first; k <= range.last; ++k) m[k] = value;
        return t;
    }
};

/// Bootstrap draws `length` rows with replacement; permutation draws them
/// without replacement (a full shuffle when length = m). `length` defaults
/// to the training length m.
inline ObservationWindow resample(const ObservationWindow& train, ResampleMethod method, Rng& rng,
                                  std::optional<std::size_t> length = {}) {
    const std::size_t m = train.size();
    if (m == 0) throw DomainError("cannot resample an empty training stream");
    const std::size_t N = length.value_or(m);
    if (method == ResampleMethod::Permutation && N > m) {
        throw DomainError("cannot draw more rows than available without replacement");
    }
    std::vector<std::size_t> idx;
    if (method == ResampleMethod::Bootstrap) {
        idx.resize(N);
        for (auto& i : idx) i = rng.index(m);
    } else {
        idx.resize(m);
        std::iota(idx.begin(), idx.end(), 0);
        // Partial Fisher-Yates from the back: the last N slots are the draw.
        for (std::size_t i = m - 1; i > 0 && i + N >= m; --i) std::swap(idx[i], idx[rng.index(i + 1)]);
        idx.erase(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(m - N));
    }
    ObservationWindow out(train.dim());
    out.reserve(N);
    for (auto i : idx) out.push_back(train.row(i));
    return out;
}

/// Per-k maxima of each statistic over all window positions of one sample.
struct MaxScanRecord {
    KRange ks;
    /// max[stat][k - ks.first]; -inf where no position gave a defined value.
    std::array<std::vector<double>, 3> max;
    std::size_t positions = 0;
    std::size_t degenerate_positions = 0;
    /// Every position was degenerate at every k.
    bool flagged = false;

    [[nodiscard]] double at(StatKind s, std::size_t k) const { return max[index_of(s)][k - ks.first]; }
};

inline MaxScanRecord max_scan(const ObservationWindow& sample, std::size_t n, GraphKind graph, KRange ks) {
    const std::size_t N = sample.size();
    if (N < 2 * n) throw DomainError("max_scan needs at least 2n observations");
    MaxScanRecord rec;
    rec.ks = ks;
    for (auto& v : rec.max) v.assign(ks.count(), -std::numeric_limits<double>::infinity());
    rec.positions = N - 2 * n + 1;
    for (std::size_t a = 0; a < rec.positions; ++a) {
        const SpanningEngine engine(sample.slice(a, a + 2 * n), graph);
        const auto p = profile(engine, ks);
        if (p.defined_count() == 0) ++rec.degenerate_positions;
        for (std::size_t s = 0; s < 3; ++s) {
            for (std::size_t i = 0; i < ks.count(); ++i) {
                const auto& v = p.values[s][i];
                if (v && *v > rec.max[s][i]) rec.max[s][i] = *v;
            }
        }
    }
    rec.flagged = rec.degenerate_positions == rec.positions;
    return rec;
}

inline MaxScanRecord max_scan(const ObservationWindow& sample, const CalibrationConfig& config) {
    return max_scan(sample, config.n, config.graph, config.k_range());
}

namespace detail {

/// 1-based ascending rank of the upper-`level` order statistic among `count`
/// values: count - floor(level * count), clamped to [1, count].
inline std::size_t upper_rank(double level, std::size_t count) {
    const auto drop = static_cast<std::size_t>(std::floor(level * static_cast<double>(count) + 1e-9));
    return std::clamp<std::size_t>(count - std::min(drop, count), 1, count);
}

inline std::vector<const MaxScanRecord*> usable_records(const std::vector<MaxScanRecord>& records) {
    std::vector<const MaxScanRecord*> out;
    for (const auto& r : records)
        if (!r.flagged) out.push_back(&r);
    if (out.empty()) throw DegenerateWindow("every resampling replicate was fully degenerate");
    return out;
}

/// Ascending per-k columns of one statistic over usable replicates.
inline std::vector<std::vector<double>> sorted_columns(const std::vector<const MaxScanRecord*>& recs, StatKind s) {
    const KRange ks = recs.front()->ks;
    std::vector<std::vector<double>> cols(ks.count());
    for (std::size_t i = 0; i < ks.count(); ++i) {
        cols[i].reserve(recs.size());
        for (const auto* r : recs) cols[i].push_back(r->max[index_of(s)][i]);
        std::sort(cols[i].begin(), cols[i].end());
    }
    return cols;
}

}  // namespace detail

/// Empirical upper-`level` quantile per k (conservative order statistic,
/// no interpolation). Flagged replicates are ignored.
inline std::map<std::size_t, double> per_k_quantile(const std::vector<MaxScanRecord>& records, StatKind s,
                                                    double level) {
    if (!(level > 0.0 && level < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
    const auto recs = detail::usable_records(records);
    const auto cols = detail::sorted_columns(recs, s);
    const std::size_t rank = detail::upper_rank(level, recs.size());
    std::map<std::size_t, double> out;
    for (std::size_t i = 0; i < cols.size(); ++i) out[recs.front()->ks.first + i] = cols[i][rank - 1];
    return out;
}

/// Outcome of the family-wise level search for one statistic.
struct FamilyCalibration {
    std::map<std::size_t, double> rho;
    double alpha_star = 0.0;
    double achieved_rate = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Searches the inner level alpha* so that the fraction of replicates in
/// which any k exceeds its threshold matches alpha. Starts from
/// alpha/(2 t_L) and applies alpha* += (alpha - rate)/(2 t_L). Thresholds
/// only change when alpha* * B crosses an integer, so each iterate is also
/// forced to move at least one order statistic inside the bracket of levels
/// already seen to undershoot or overshoot. When adjacent order statistics
/// bracket the target, single reference points are stepped to the lower
/// one; alpha* is then the mean per-k level.
inline FamilyCalibration calibrate_family(const std::vector<MaxScanRecord>& records, StatKind s,
                                          const CalibrationConfig& config) {
    const auto recs = detail::usable_records(records);
    const auto cols = detail::sorted_columns(recs, s);
    const KRange ks = recs.front()->ks;
    const std::size_t B = recs.size();
    const double Bd = static_cast<double>(B);
    const double tL = static_cast<double>(ks.count());
    const double target = config.alpha * Bd;
    const double band = config.bisection_tol * Bd + 1e-9;

    auto thresholds_at = [&](std::size_t j) {
        std::vector<double> th(cols.size());
        const std::size_t rank = B - j;
        for (std::size_t i = 0; i < cols.size(); ++i) th[i] = cols[i][rank - 1];
        return th;
    };
    // Replicates reaching a threshold count as alarms: this equals the
    // leave-one-out count, since replicate b exceeds the thresholds built
    // from the other B - 1 exactly when it ranks at or above them.
    auto family_count = [&](const std::vector<double>& th) {
        std::size_t c = 0;
        for (const auto* r : recs) {
            const auto& v = r->max[index_of(s)];
            for (std::size_t i = 0; i < th.size(); ++i) {
                if (v[i] >= th[i]) {
                    ++c;
                    break;
                }
            }
        }
        return c;
    };
    auto index_of_level = [&](double level) {
        return B - detail::upper_rank(std::clamp(level, 0.0, 1.0), B);
    };

    // j = number of order statistics dropped from the top; count(j) is
    // nondecreasing in j. lo/hi hold the nearest j seen below/above the band.
    std::optional<std::size_t> lo, hi, prev_j;
    double a0 = config.alpha / (2.0 * tL);
    double a1 = config.alpha / 2.0;
    FamilyCalibration out;
    for (std::size_t it = 1; it <= config.max_iters; ++it) {
        a0 += (config.alpha - a1) / (2.0 * tL);
        std::size_t j = index_of_level(a0);
        if (prev_j && j == *prev_j) {
            if (a1 * Bd < target) ++j;
            else if (j > 0) --j;
        }
        if (lo && j <= *lo) j = *lo + 1;
        if (hi && j >= *hi && *hi > 0) j = *hi - 1;
        const bool exhausted = j >= B || (hi && j >= *hi) || (lo && hi && *hi - *lo <= 1);
        if (exhausted) break;
        if (index_of_level(a0) != j) a0 = (static_cast<double>(j) + 0.5) / Bd;
        out.iterations = it;
        const std::size_t count = family_count(thresholds_at(j));
        prev_j = j;
        a1 = static_cast<double>(count) / Bd;
        if (std::fabs(static_cast<double>(count) - target) <= band) {
            out.converged = true;
            break;
        }
        if (static_cast<double>(count) < target) lo = j;
        else hi = j;
    }
    std::size_t j = out.converged ? *prev_j : lo.value_or(0);
    auto th = thresholds_at(j);
    std::vector<std::size_t> dropped(th.size(), j);
    if (!out.converged && lo && j + 1 < B) {
        // One common index overshoots the band at j + 1, so step single
        // reference points, in k order, from j to j + 1 while the count stays
        // at or below the band.
        const auto next = thresholds_at(j + 1);
        for (std::size_t i = 0; i < th.size() && !out.converged; ++i) {
            const double keep = th[i];
            th[i] = next[i];
            const std::size_t c = family_count(th);
            if (static_cast<double>(c) > target + band) {
                th[i] = keep;
                continue;
            }
            dropped[i] = j + 1;
            out.converged = std::fabs(static_cast<double>(c) - target) <= band;
        }
        a0 = 0.0;
        for (auto dj : dropped) a0 += (static_cast<double>(dj) + 0.5) / Bd;
        a0 /= static_cast<double>(dropped.size());
    } else if (!out.converged) {
        a0 = (static_cast<double>(j) + 0.5) / Bd;
    }
    for (std::size_t i = 0; i < th.size(); ++i) {
        if (!std::isfinite(th[i])) {
            throw DegenerateWindow("calibrated threshold for " + std::string(to_string(s)) + " at k=" +
                                   std::to_string(ks.first + i) + " is not finite; training data too degenerate");
        }
        out.rho[ks.first + i] = th[i];
    }
    out.alpha_star = a0;
    out.achieved_rate = static_cast<double>(family_count(th)) / Bd;
    return out;
}

/// Max-scan records of `config.reps` resampled copies of `train`; replicate
/// b draws from Rng(seed, b).
inline std::vector<MaxScanRecord> scan_replicates(const ObservationWindow& train, const CalibrationConfig& config) {
    config.validate(train.size());
    std::vector<MaxScanRecord> records(config.reps);
    parallel_for(config.reps, [&](std::size_t b) {
        Rng rng(config.seed, b);
        records[b] = max_scan(resample(train, config.method, rng, config.stream_length), config);
    });
    return records;
}

inline ThresholdTable make_threshold_table(const std::vector<MaxScanRecord>& records, const CalibrationConfig& config,
                                           std::size_t d) {
    ThresholdTable t;
    t.n = config.n;
    t.d = d;
    t.alpha = config.alpha;
    t.graph = config.graph;
    t.method = std::string(to_string(config.method));
    t.reps = records.size();
    t.seed = config.seed;
    t.dropped_replicates = static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [](const MaxScanRecord& r) { return r.flagged; }));
    t.converged = true;
    for (auto s : kAllStats) {
        const auto fam = calibrate_family(records, s, config);
        const auto i = index_of(s);
        t.rho[i] = fam.rho;
        t.alpha_star[i] = fam.alpha_star;
        t.achieved_rate[i] = fam.achieved_rate;
        t.stat_converged[i] = fam.converged;
        t.converged = t.converged && fam.converged;
    }
    return t;
}

/// Resampling calibration of all three statistics on one training stream.
inline ThresholdTable calibrate(const ObservationWindow& train, const CalibrationConfig& config) {
    return make_threshold_table(scan_replicates(train, config), config, train.dim());
}

/// Gaussian-CG null-law threshold at the symmetric point k = n:
/// Mean uses 2 (d / D) F^{-1}_{d, D}(1 - alpha) with D = 2(n-1)d, which is on
/// the scale of r_mu_fisher_form (twice r_mu); the variance ratios use
/// F^{-1}_{(n-1)d, (n-1)d}(1 - alpha).
inline double parametric_threshold(std::size_t n, std::size_t d, double alpha, StatKind s,
                                   std::optional<std::size_t> k = {}) {
    if (n < 2 || d == 0) throw DomainError("parametric thresholds need n >= 2 and d >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    if (k && *k != n) throw DomainError("parametric thresholds exist only at k = n");
    const double dd = static_cast<double>(d);
    const double half = static_cast<double>(n - 1) * dd;
    if (s == StatKind::Mean) {
        const double D = 2.0 * half;
        return 2.0 * (dd / D) * f_quantile(1.0 - alpha, {dd, D});
    }
    return f_quantile(1.0 - alpha, {half, half});
}

inline std::map<std::size_t, double> parametric_thresholds(std::size_t n, std::size_t d, double alpha, StatKind s) {
    return {{n, parametric_threshold(n, d, alpha, s)}};
}

/// Parametric thresholds on the scale of the detector statistics, so the
/// mean entry is half of parametric_threshold(Mean).
inline ThresholdTable parametric_table(std::size_t n, std::size_t d, double alpha) {
    ThresholdTable t;
    t.n = n;
    t.d = d;
    t.alpha = alpha;
    t.method = "parametric";
    t.converged = true;
    for (auto s : kAllStats) {
        t.rho[index_of(s)] = parametric_thresholds(n, d, alpha, s);
        if (s == StatKind::Mean) t.rho[0][n] *= 0.5;
        t.alpha_star[index_of(s)] = alpha;
        t.achieved_rate[index_of(s)] = alpha;
        t.stat_converged[index_of(s)] = true;
    }
    return t;
}

}  // namespace gsrcpd
