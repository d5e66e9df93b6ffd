#pragma once

#include <optional>

// Dimension-matching maps used by the split/merge moves. A level bounded by
// (lo, hi) is split with an auxiliary u > 0 in the logit ("matching") space;
// when one bound is the reflection of the level's neighbour about the level
// itself, the map reduces to a spread around the level's midpoint. Every split
// map has an exact inverse and an analytic log |Jacobian| of
// (level, u) -> (low, high).
namespace icbt::split {

// y = logit((x - lo) / (hi - lo)) on the open interval (lo, hi); throws
// std::invalid_argument outside it.
double matching_transform(double x, double lo, double hi);
double matching_inverse(double y, double lo, double hi);
// log |d matching_inverse / dy| at y.
double log_matching_inverse_derivative(double y, double lo, double hi);

struct SplitLevels {
  double low = 0.0;
  double high = 0.0;
  double log_jacobian = 0.0;
};

struct MergedLevel {
  double level = 0.0;
  double u = 0.0;
  double log_jacobian = 0.0;  // of the corresponding split
};

// Both bounds are fixed neighbours.
SplitLevels split_interior(double level, double u, double lo, double hi);
MergedLevel merge_interior(double low, double high, double lo, double hi);

// Upper bound reflected: hi = 2 * level - lo.
SplitLevels split_reflected_upper(double level, double u, double lo);
MergedLevel merge_reflected_upper(double low, double high, double lo);

// Lower bound reflected: lo = 2 * level - hi.
SplitLevels split_reflected_lower(double level, double u, double hi);
MergedLevel merge_reflected_lower(double low, double high, double hi);

// Splitting the pinned zero level: the zero copy stays, the new level is
// neighbour * tanh(u / 2) (the matching inverse on (-neighbour, neighbour) at
// u), or direction * u when no neighbour exists on that side.
struct NewLevel {
  double level = 0.0;
  double log_jacobian = 0.0;
};
NewLevel split_zero(double u, std::optional<double> neighbour, int direction);
// Inverse of split_zero: the merged level is 0; recovers u and the log Jacobian.
MergedLevel merge_zero(double level, std::optional<double> neighbour);

// Log density of u ~ sigma * chi^2_1.
double log_scaled_chi2_1(double u, double sigma);

}  // namespace icbt::split
