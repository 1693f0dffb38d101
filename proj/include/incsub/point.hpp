#pragma once

#include <Eigen/Dense>

#include <initializer_list>

#include "incsub/errors.hpp"

namespace incsub {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A point of the decision space. Coordinates are always finite.
class DecisionPoint {
public:
    DecisionPoint() = default;
    explicit DecisionPoint(Vector coords);
    DecisionPoint(std::initializer_list<double> coords);

    /// Non-throwing constructor check.
    static bool is_finite(const Vector& v) { return v.allFinite(); }

    const Vector& coords() const { return coords_; }
    std::size_t dim() const { return static_cast<std::size_t>(coords_.size()); }
    double operator[](std::size_t i) const { return coords_[static_cast<Eigen::Index>(i)]; }

    void require_dim(std::size_t n) const {
        if (dim() != n) throw DimensionMismatch(n, dim());
    }

    friend bool operator==(const DecisionPoint& a, const DecisionPoint& b) {
        return a.coords_.size() == b.coords_.size() && a.coords_ == b.coords_;
    }

private:
    Vector coords_;
};

inline void require_same_dim(const Vector& a, const Vector& b) {
    if (a.size() != b.size())
        throw DimensionMismatch(static_cast<std::size_t>(a.size()), static_cast<std::size_t>(b.size()));
}

Vector make_vector(std::initializer_list<double> values);

}  // namespace incsub
