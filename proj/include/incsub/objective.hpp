#pragma once

#include <functional>
#include <string>

#include "incsub/point.hpp"

namespace incsub {

/// One agent's convex component f_i with an exact subgradient oracle and a
/// bound C_i on subgradient norms over the feasible set.
struct ComponentObjective {
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> subgradient;
    double bound = 0.0;
    std::string label;

    double operator()(const Vector& x) const { return value(x); }
};

}  // namespace incsub
