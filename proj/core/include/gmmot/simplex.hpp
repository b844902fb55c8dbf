#pragma once

#include <string_view>

#include "gmmot/spd.hpp"

namespace gmmot {

/// Validates a probability vector (non-negative entries, sum within `tol` of
/// one) and returns it renormalized to sum exactly to one.
Vector checked_simplex(const Vector& weights, double tol, std::string_view what);

/// Euclidean projection onto the probability simplex (sort-based, O(n log n)).
Vector project_to_simplex(const Vector& v);

}  // namespace gmmot
