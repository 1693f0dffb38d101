#include "incsub/point.hpp"

namespace incsub {

DecisionPoint::DecisionPoint(Vector coords) : coords_(std::move(coords)) {
    if (!coords_.allFinite()) throw InvalidArgument("decision point has non-finite coordinates");
}

DecisionPoint::DecisionPoint(std::initializer_list<double> coords)
    : DecisionPoint(make_vector(coords)) {}

Vector make_vector(std::initializer_list<double> values) {
    Vector v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v[i++] = x;
    return v;
}

}  // namespace incsub
