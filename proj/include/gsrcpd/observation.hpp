#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gsrcpd/error.hpp"

namespace gsrcpd {

/// A single d-dimensional observation.
using Observation = std::vector<double>;

inline void require_finite(std::span<const double> values, const char* what = "observation") {
    for (std::size_t j = 0; j < values.size(); ++j) {
        if (!std::isfinite(values[j])) {
            throw DomainError(std::string(what) + " has a non-finite entry at column " + std::to_string(j));
        }
    }
}

/// Ordered block of m observations of common dimension d, stored row-major.
///
/// `anchor` is the stream index of the first row. Rows are read through
/// `row(i)`, which returns a view into the contiguous storage.
class ObservationWindow {
  public:
    ObservationWindow() = default;

    ObservationWindow(std::size_t dim, std::int64_t anchor = 0) : dim_(dim), anchor_(anchor) {
        if (dim == 0) throw DomainError("observation dimension must be >= 1");
    }

    ObservationWindow(const std::vector<Observation>& rows, std::int64_t anchor = 0) : anchor_(anchor) {
        if (rows.empty()) throw DomainError("window needs at least one observation");
        dim_ = rows.front().size();
        if (dim_ == 0) throw DomainError("observation dimension must be >= 1");
        data_.reserve(rows.size() * dim_);
        for (const auto& r : rows) push_back(r);
    }

    void push_back(std::span<const double> y) {
        if (dim_ == 0) {
            if (y.empty()) throw DomainError("observation dimension must be >= 1");
            dim_ = y.size();
        }
        if (y.size() != dim_) {
            throw DimensionMismatch("observation has dimension " + std::to_string(y.size()) + ", expected " +
                                    std::to_string(dim_));
        }
        require_finite(y);
        data_.insert(data_.end(), y.begin(), y.end());
    }

    void clear() { data_.clear(); }
    void reserve(std::size_t m) { data_.reserve(m * dim_); }

    [[nodiscard]] std::size_t size() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
    [[nodiscard]] std::size_t dim() const { return dim_; }
    [[nodiscard]] std::int64_t anchor() const { return anchor_; }
    void set_anchor(std::int64_t a) { anchor_ = a; }

    [[nodiscard]] std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * dim_, dim_};
    }
    [[nodiscard]] std::span<double> row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }

    [[nodiscard]] std::span<const double> data() const { return data_; }

    /// Rows [begin, end) as a new window anchored at anchor() + begin.
    [[nodiscard]] ObservationWindow slice(std::size_t begin, std::size_t end) const {
        ObservationWindow out(dim_, anchor_ + static_cast<std::int64_t>(begin));
        out.data_.assign(data_.begin() + static_cast<std::ptrdiff_t>(begin * dim_),
                         data_.begin() + static_cast<std::ptrdiff_t>(end * dim_));
        return out;
    }

    friend bool operator==(const ObservationWindow&, const ObservationWindow&) = default;

  private:
    std::vector<double> data_;
    std::size_t dim_ = 0;
    std::int64_t anchor_ = 0;
};

}  // namespace gsrcpd
