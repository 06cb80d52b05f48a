#include "rudder/penalty.hpp"

#include "rudder/error.hpp"

#include <algorithm>
#include <cmath>

namespace rudder {

void PenaltyParams::validate() const {
    if (!(eps > 0.0)) throw ConfigError("penalty eps must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("penalty alpha must lie in (0, 1)");
    if (!(P >= 0.0)) throw ConfigError("penalty exponent P must be non-negative");
    if (!(t_min > 0.0)) throw ConfigError("penalty t_min must be positive");
}

ValueAndSlope heaviside(double x, const PenaltyParams& params) {
    const double eps = params.eps;
    const double alpha = params.alpha;
    if (x > eps) return {1.0, 0.0};
    if (x < -eps) return {alpha, 0.0};
    const double r = x / eps;
    // The clamp only absorbs rounding at r = +-1.
    const double value =
        std::clamp(0.75 * (1.0 - alpha) * (r - r * r * r / 3.0) + 0.5 * (1.0 + alpha), alpha, 1.0);
    const double slope = 0.75 * (1.0 - alpha) * (1.0 - r * r) / eps;
    return {value, slope};
}

ValueAndSlope penalized_thickness(double t, const PenaltyParams& params) {
    const auto h = heaviside(t - params.t_min, params);
    return {h.value * t, h.slope * t + h.value};
}

ValueAndSlope penalized_density(double t, double rho, const PenaltyParams& params) {
    if (params.P == 0.0) return {rho, 0.0};
    const auto h = heaviside(t - params.t_min, params);
    const double hp = std::pow(h.value, params.P);
    const double dhp = params.P * std::pow(h.value, params.P - 1.0) * h.slope;
    return {hp * rho, dhp * rho};
}

}  // namespace rudder
