#include "icbt/split_transform.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "icbt/math.h"

namespace icbt::split {

namespace {

inline double log_sig_pair(double u) { return log_sigmoid(u) + log_sigmoid(-u); }

}  // namespace

double matching_transform(double x, double lo, double hi) {
  if (!(lo < x && x < hi)) throw std::invalid_argument("matching_transform: x outside (lo, hi)");
  return logit((x - lo) / (hi - lo));
}

double matching_inverse(double y, double lo, double hi) {
  return lo + (hi - lo) * sigmoid(y);
}

double log_matching_inverse_derivative(double y, double lo, double hi) {
  return std::log(hi - lo) + log_sig_pair(y);
}

SplitLevels split_interior(double level, double u, double lo, double hi) {
  const double y = matching_transform(level, lo, hi);
  SplitLevels out;
  out.low = matching_inverse(y - u, lo, hi);
  out.high = matching_inverse(y + u, lo, hi);
  // det [[D(y-u)/D(y), -D(y-u)], [D(y+u)/D(y), D(y+u)]] = 2 D(y-u) D(y+u) / D(y)
  out.log_jacobian = std::log(2.0) + log_matching_inverse_derivative(y - u, lo, hi) +
                     log_matching_inverse_derivative(y + u, lo, hi) -
                     log_matching_inverse_derivative(y, lo, hi);
  return out;
}

MergedLevel merge_interior(double low, double high, double lo, double hi) {
  const double ya = matching_transform(low, lo, hi);
  const double yb = matching_transform(high, lo, hi);
  MergedLevel out;
  const double y = 0.5 * (ya + yb);
  out.u = 0.5 * (yb - ya);
  out.level = matching_inverse(y, lo, hi);
  out.log_jacobian = std::log(2.0) + log_matching_inverse_derivative(ya, lo, hi) +
                     log_matching_inverse_derivative(yb, lo, hi) -
                     log_matching_inverse_derivative(y, lo, hi);
  return out;
}

SplitLevels split_reflected_upper(double level, double u, double lo) {
  const double g = level - lo;
  SplitLevels out;
  out.low = lo + 2.0 * g * sigmoid(-u);
  out.high = lo + 2.0 * g * sigmoid(u);
  out.log_jacobian = std::log(4.0 * g) + log_sig_pair(u);
  return out;
}

MergedLevel merge_reflected_upper(double low, double high, double lo) {
  MergedLevel out;
  out.level = 0.5 * (low + high);
  const double g = out.level - lo;
  out.u = logit((high - lo) / (2.0 * g));
  out.log_jacobian = std::log(4.0 * g) + log_sig_pair(out.u);
  return out;
}

SplitLevels split_reflected_lower(double level, double u, double hi) {
  const double g = hi - level;
  SplitLevels out;
  out.low = hi - 2.0 * g * sigmoid(u);
  out.high = hi - 2.0 * g * sigmoid(-u);
  out.log_jacobian = std::log(4.0 * g) + log_sig_pair(u);
  return out;
}

MergedLevel merge_reflected_lower(double low, double high, double hi) {
  MergedLevel out;
  out.level = 0.5 * (low + high);
  const double g = hi - out.level;
  out.u = logit((hi - low) / (2.0 * g));
  out.log_jacobian = std::log(4.0 * g) + log_sig_pair(out.u);
  return out;
}

NewLevel split_zero(double u, std::optional<double> neighbour, int direction) {
  NewLevel out;
  if (neighbour) {
    const double t = *neighbour;
    out.level = t * (2.0 * sigmoid(u) - 1.0);
    out.log_jacobian = std::log(2.0 * std::abs(t)) + log_sig_pair(u);
  } else {
    out.level = direction >= 0 ? u : -u;
    out.log_jacobian = 0.0;
  }
  return out;
}

MergedLevel merge_zero(double level, std::optional<double> neighbour) {
  MergedLevel out;
  if (neighbour) {
    const double t = *neighbour;
    out.u = logit(0.5 * (level / t + 1.0));
    out.log_jacobian = std::log(2.0 * std::abs(t)) + log_sig_pair(out.u);
  } else {
    out.u = std::abs(level);
  }
  return out;
}

double log_scaled_chi2_1(double u, double sigma) {
  if (!(u > 0.0)) return -INFINITY;
  const double x = u / sigma;
  return -std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi * x) - 0.5 * x;
}

}  // namespace icbt::split
