#pragma once

// Cost-matrix computation for the most matching policy. Interfaces that are
// down, unsubscribed or fail the requirement condition cost INFINITE; the
// rest start at MAX and are then priced by the evaluation item.

#include <compare>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "conman/context.hpp"
#include "conman/policy.hpp"

namespace conman {

class Cost {
public:
    static constexpr double kMax = 1'000'000.0;

    /// Throws std::out_of_range outside [0, kMax].
    static Cost finite(double v);
    static Cost max() { return Cost(kMax, false); }
    static Cost infinite() { return Cost(0.0, true); }

    bool is_finite() const { return !infinite_; }
    bool is_infinite() const { return infinite_; }
    /// +inf for INFINITE.
    double value() const { return infinite_ ? std::numeric_limits<double>::infinity() : value_; }

    friend bool operator==(const Cost& a, const Cost& b) {
        return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
    }
    friend std::partial_ordering operator<=>(const Cost& a, const Cost& b) {
        return a.value() <=> b.value();
    }

private:
    Cost(double v, bool inf) : value_(v), infinite_(inf) {}
    double value_;
    bool infinite_;
};

enum class CostShape { MATRIX, VECTOR };

/// Row-major m x n costs; a VECTOR has a single column.
class CostMatrix {
public:
    CostMatrix() : CostMatrix(1, 1, CostShape::VECTOR) {}
    CostMatrix(std::size_t rows, std::size_t cols, CostShape shape, Cost fill = Cost::infinite());

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    CostShape shape() const { return shape_; }

    const Cost& at(std::size_t r, std::size_t c) const { return entries_.at(r * cols_ + c); }
    Cost& at(std::size_t r, std::size_t c) { return entries_.at(r * cols_ + c); }

    /// Expands a VECTOR to `cols` identical columns; a MATRIX is returned unchanged.
    CostMatrix broadcast(std::size_t cols) const;

    friend bool operator==(const CostMatrix&, const CostMatrix&) = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    CostShape shape_;
    std::vector<Cost> entries_;
};

enum class Better { LOWER, HIGHER };

struct FactorSpec {
    FactorName name = FactorName::CHARGE_RATE;
    double lo = 0.0;
    double hi = 1.0;
    Better direction = Better::LOWER;
    bool end_to_end = false;

    friend bool operator==(const FactorSpec&, const FactorSpec&) = default;
};

/// Whether a factor is read from a path measurement rather than a local interface.
constexpr bool is_end_to_end(FactorName f) {
    return f == FactorName::RTT_MS || f == FactorName::PACKET_LOSS ||
           f == FactorName::BANDWIDTH_KBPS;
}

/// Fixed normalization ranges, one per factor.
class FactorCatalog {
public:
    /// Throws SchemaError on lo >= hi, duplicates, or a wrong end_to_end flag.
    explicit FactorCatalog(std::vector<FactorSpec> specs);
    /// Built-in ranges for all seven factors.
    static FactorCatalog defaults();
    /// Defaults with the given specs replacing matching entries.
    static FactorCatalog with_overrides(std::vector<FactorSpec> overrides);

    const FactorSpec* find(FactorName name) const;
    const std::vector<FactorSpec>& specs() const { return specs_; }

private:
    std::vector<FactorSpec> specs_;
};

/// True iff every predicate holds. Throws MissingContext when a path metric
/// is referenced and `path` is null.
bool requirement_satisfied(const RequirementCondition& rc, const InterfaceSnapshot& local,
                           const EndToEndQoS* path);

/// Cost in [0,1]: 0 is the best reading within [lo, hi].
double normalize_factor(const FactorSpec& spec, double raw);

/// Weighted sum of normalized readings. Throws MissingReading.
double weight_cost(std::span<const WeightEntry> entries,
                   const std::map<FactorName, double>& readings, const FactorCatalog& catalog);

/// Raw value of a factor for interface `local` over `path` (may be null).
std::optional<double> factor_reading(FactorName f, const InterfaceSnapshot& local,
                                     const EndToEndQoS* path);

/// Whether the policy's requirement or weights need path measurements.
bool references_end_to_end(const Policy& policy, const FactorCatalog& catalog);

/// m x n matrix when the policy references path factors, otherwise an m-vector.
/// `remote` lists the peer's interface indices in column order; required for
/// the matrix case (ShapeError otherwise). A pair with no path measurement is
/// disqualified whenever path factors are in play.
CostMatrix compute_cost_matrix(const Policy& mmp, const HostContextView& local,
                               std::optional<std::span<const InterfaceIndex>> remote,
                               const FactorCatalog& catalog);

}  // namespace conman
