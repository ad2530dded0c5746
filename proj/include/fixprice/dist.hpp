#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fixprice/errors.hpp"
#include "fixprice/rng.hpp"

namespace fixprice {

using Money = double;
using Probability = double;

inline constexpr Money kInfinity = std::numeric_limits<double>::infinity();

/// Tolerance on total mass accepted at construction.
inline constexpr double kMassTolerance = 1e-12;

struct Atom {
    Money value;
    Probability mass;
};

/// An immutable one-dimensional valuation law.
///
/// Two representations are supported: finitely many point masses (Discrete),
/// or a density that is constant on each cell [b_i, b_{i+1}) of an increasing
/// breakpoint grid (PiecewiseUniform). Cells may carry zero mass, which is how
/// gaps in the support are expressed.
///
/// Conventions used by every query:
///   cdf(t)      = Pr[X <= t]
///   survival(t) = Pr[X >= t]   (closed at t, so an atom at t counts on both sides)
class Distribution {
public:
    enum class Kind { Discrete, PiecewiseUniform };

    static Distribution discrete(std::vector<Atom> points) {
        if (points.empty()) throw DomainError("discrete distribution needs at least one point");
        std::vector<Money> values;
        std::vector<Probability> masses;
        values.reserve(points.size());
        masses.reserve(points.size());
        for (const auto& a : points) {
            values.push_back(a.value);
            masses.push_back(a.mass);
        }
        return Distribution(Kind::Discrete, std::move(values), std::move(masses));
    }

    static Distribution piecewise_uniform(std::vector<Money> breakpoints, std::vector<Probability> masses) {
        if (breakpoints.size() < 2) throw DomainError("piecewise-uniform distribution needs at least two breakpoints");
        if (masses.size() + 1 != breakpoints.size())
            throw DomainError("piecewise-uniform distribution needs one mass per cell");
        return Distribution(Kind::PiecewiseUniform, std::move(breakpoints), std::move(masses));
    }

    static Distribution uniform(Money lo, Money hi) { return piecewise_uniform({lo, hi}, {1.0}); }

    static Distribution point(Money value) { return discrete({{value, 1.0}}); }

    Kind kind() const { return kind_; }
    bool atomless() const { return kind_ == Kind::PiecewiseUniform; }

    /// Atom values (Discrete) or breakpoints (PiecewiseUniform).
    std::span<const Money> values() const { return values_; }
    /// Atom masses (Discrete) or cell masses (PiecewiseUniform).
    std::span<const Probability> masses() const { return masses_; }

    /// Smallest and largest point of the support (positive-mass region).
    Money support_min() const {
        for (std::size_t i = 0; i < masses_.size(); ++i)
            if (masses_[i] > 0) return values_[i];
        return values_.front();
    }
    Money support_max() const {
        for (std::size_t i = masses_.size(); i-- > 0;)
            if (masses_[i] > 0) return atomless() ? values_[i + 1] : values_[i];
        return values_.back();
    }

    Money mean() const { return moment_above_.front(); }

    Probability cdf(Money t) const {
        if (kind_ == Kind::Discrete) {
            const auto idx = upper_index(t);
            return idx == values_.size() ? 1.0 : below_[idx];
        }
        if (t < values_.front()) return 0.0;
        if (t >= values_.back()) return 1.0;
        const auto i = cell_of(t);
        return below_[i] + masses_[i] * (t - values_[i]) / width(i);
    }

    Probability survival(Money t) const {
        if (kind_ == Kind::Discrete) {
            const auto idx = lower_index(t);
            return idx == 0 ? 1.0 : above_[idx];
        }
        if (t <= values_.front()) return 1.0;
        if (t >= values_.back()) return 0.0;
        const auto i = cell_of(t);
        return above_[i + 1] + masses_[i] * (values_[i + 1] - t) / width(i);
    }

    /// Smallest t with cdf(t) >= u. Returns +inf only when no such t exists.
    Money quantile(Probability u) const {
        check_level(u);
        const double target = u - kLevelTolerance;
        const auto it = std::lower_bound(below_.begin() + 1, below_.end(), target);
        if (it == below_.end()) return kInfinity;
        const auto i = static_cast<std::size_t>(it - below_.begin()) - 1;
        if (kind_ == Kind::Discrete) return values_[i];
        if (masses_[i] <= 0) return values_[i];
        const Money t = values_[i] + (u - below_[i]) / masses_[i] * width(i);
        return std::clamp(t, values_[i], values_[i + 1]);
    }

    /// Largest t with survival(t) >= u.
    Money survival_inverse(Probability u) const {
        check_level(u);
        const double target = u - kLevelTolerance;
        // above_ is nonincreasing; find the last entry index i with above_[i] >= target.
        std::size_t count = 0;
        {
            std::size_t lo = 0, hi = masses_.size();
            while (lo < hi) {
                const std::size_t mid = (lo + hi) / 2;
                if (above_[mid] >= target) lo = mid + 1;
                else hi = mid;
            }
            count = lo;
        }
        if (count == 0) return -kInfinity;
        const std::size_t i = count - 1;
        if (kind_ == Kind::Discrete) return values_[i];
        if (masses_[i] <= 0) return values_[i + 1];
        const Money t = values_[i + 1] - (u - above_[i + 1]) / masses_[i] * width(i);
        return std::clamp(t, values_[i], values_[i + 1]);
    }

    /// E[X 1(X <= t)].
    Money partial_expectation_below(Money t) const {
        if (kind_ == Kind::Discrete) return moment_below_[upper_index(t)];
        if (t <= values_.front()) return 0.0;
        if (t >= values_.back()) return moment_below_.back();
        const auto i = cell_of(t);
        return moment_below_[i] + masses_[i] / width(i) * (t - values_[i]) * (t + values_[i]) / 2;
    }

    /// E[X 1(X >= t)].
    Money partial_expectation_above(Money t) const {
        if (kind_ == Kind::Discrete) return moment_above_[lower_index(t)];
        if (t <= values_.front()) return moment_above_.front();
        if (t >= values_.back()) return 0.0;
        const auto i = cell_of(t);
        return moment_above_[i + 1] + masses_[i] / width(i) * (values_[i + 1] - t) * (values_[i + 1] + t) / 2;
    }

    /// Conditional law of X given lo <= X <= hi (hi may be +inf).
    Distribution restrict(Money lo, Money hi) const {
        if (!(lo <= hi)) throw DomainError("restrict: lo must not exceed hi");
        if (kind_ == Kind::Discrete) {
            std::vector<Money> values;
            std::vector<Probability> masses;
            double total = 0;
            for (std::size_t i = 0; i < values_.size(); ++i) {
                if (values_[i] < lo || values_[i] > hi) continue;
                values.push_back(values_[i]);
                masses.push_back(masses_[i]);
                total += masses_[i];
            }
            if (!(total > 0)) throw DomainError("empty conditioning event");
            for (auto& m : masses) m /= total;
            return Distribution(Kind::Discrete, std::move(values), std::move(masses));
        }
        const Money start = std::max(lo, values_.front());
        const Money end = std::min(hi, values_.back());
        if (!(start < end)) throw DomainError("empty conditioning event");
        std::vector<Money> breaks{start};
        std::vector<Probability> masses;
        double total = 0;
        for (std::size_t i = 0; i < masses_.size(); ++i) {
            const Money a = std::max(values_[i], start);
            const Money b = std::min(values_[i + 1], end);
            if (!(a < b)) continue;
            const double m = masses_[i] * ((b - a) / width(i));
            breaks.push_back(b);
            masses.push_back(m);
            total += m;
        }
        if (!(total > 0)) throw DomainError("empty conditioning event");
        for (auto& m : masses) m /= total;
        return Distribution(Kind::PiecewiseUniform, std::move(breaks), std::move(masses));
    }

    /// Replaces each atom (v, m) by a uniform cell of mass m on [v, v + width].
    /// Overlapping cells add their densities.
    Distribution smooth(Money cell_width) const {
        if (kind_ != Kind::Discrete) throw DomainError("smooth: input must be discrete");
        if (!(cell_width > 0) || !std::isfinite(cell_width)) throw DomainError("smooth: width must be positive");
        std::vector<Money> grid;
        grid.reserve(2 * values_.size());
        for (const Money v : values_) {
            grid.push_back(v);
            grid.push_back(v + cell_width);
        }
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
        std::vector<Probability> masses(grid.size() - 1, 0.0);
        for (std::size_t a = 0; a < values_.size(); ++a) {
            const Money lo = values_[a];
            const Money hi = lo + cell_width;
            auto j = static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), lo) - grid.begin());
            for (; j + 1 < grid.size() && grid[j] < hi; ++j)
                masses[j] += masses_[a] * ((grid[j + 1] - grid[j]) / (hi - lo));
        }
        return Distribution(Kind::PiecewiseUniform, std::move(grid), std::move(masses));
    }

    /// Law of pivot - X. Requires pivot >= every value so the result stays non-negative.
    Distribution reflect(Money pivot) const {
        if (pivot < values_.back()) throw DomainError("reflect: pivot below the largest value");
        std::vector<Money> values(values_.rbegin(), values_.rend());
        for (auto& v : values) v = pivot - v;
        std::vector<Probability> masses(masses_.rbegin(), masses_.rend());
        return Distribution(kind_, std::move(values), std::move(masses));
    }

    /// k i.i.d. draws by inverse-transform sampling.
    std::vector<Money> sample(RngStream& stream, std::size_t k) const {
        std::vector<Money> out(k);
        for (auto& x : out) x = quantile(stream.uniform());
        return out;
    }

    friend bool operator==(const Distribution&, const Distribution&) = default;

private:
    static constexpr double kLevelTolerance = 1e-12;

    Distribution(Kind kind, std::vector<Money> values, std::vector<Probability> masses)
        : kind_(kind), values_(std::move(values)), masses_(std::move(masses)) {
        validate();
        build_tables();
    }

    void validate() const {
        double total = 0;
        for (const double m : masses_) {
            if (!std::isfinite(m) || m < 0) throw DomainError("masses must be finite and non-negative");
            total += m;
        }
        if (std::abs(total - 1.0) > kMassTolerance)
            throw DomainError("masses must sum to 1 (got " + std::to_string(total) + ")");
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!std::isfinite(values_[i]) || values_[i] < 0)
                throw DomainError("values must be finite and non-negative");
            if (i > 0 && !(values_[i - 1] < values_[i])) throw DomainError("values must be strictly increasing");
        }
    }

    void build_tables() {
        const std::size_t n = masses_.size();
        below_.assign(n + 1, 0.0);
        above_.assign(n + 1, 0.0);
        moment_below_.assign(n + 1, 0.0);
        moment_above_.assign(n + 1, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            below_[i + 1] = below_[i] + masses_[i];
            moment_below_[i + 1] = moment_below_[i] + masses_[i] * entry_mean(i);
        }
        for (std::size_t i = n; i-- > 0;) {
            above_[i] = above_[i + 1] + masses_[i];
            moment_above_[i] = moment_above_[i + 1] + masses_[i] * entry_mean(i);
        }
    }

    Money entry_mean(std::size_t i) const {
        return kind_ == Kind::Discrete ? values_[i] : (values_[i] + values_[i + 1]) / 2;
    }

    Money width(std::size_t cell) const { return values_[cell + 1] - values_[cell]; }

    // Number of values <= t.
    std::size_t upper_index(Money t) const {
        return static_cast<std::size_t>(std::upper_bound(values_.begin(), values_.end(), t) - values_.begin());
    }
    // Number of values < t.
    std::size_t lower_index(Money t) const {
        return static_cast<std::size_t>(std::lower_bound(values_.begin(), values_.end(), t) - values_.begin());
    }
    // Cell i with b_i <= t < b_{i+1}; requires b_0 <= t < b_k.
    std::size_t cell_of(Money t) const { return upper_index(t) - 1; }

    static void check_level(Probability u) {
        if (!(u > 0 && u <= 1)) throw DomainError("probability level must lie in (0, 1]");
    }

    Kind kind_;
    std::vector<Money> values_;
    std::vector<Probability> masses_;
    // Prefix/suffix tables; suffixes are summed from the top so tiny tail masses
    // keep full relative precision.
    std::vector<double> below_, above_, moment_below_, moment_above_;
};

} // namespace fixprice
