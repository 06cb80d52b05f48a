#pragma once

// Regularized Heaviside projection of stiffener thickness and density.

namespace rudder {

struct PenaltyParams {
    double eps = 0.1;      // half-width of the smoothing band
    double alpha = 0.001;  // lower plateau
    double P = 2.0;        // density exponent; 0 disables the density penalty
    double t_min = 4.0;    // manufacturable thickness threshold

    /// Throws ConfigError unless eps > 0, 0 < alpha < 1 and P >= 0.
    void validate() const;
};

struct ValueAndSlope {
    double value = 0.0;
    double slope = 0.0;
};

/// 1 above eps, alpha below -eps, cubic blend in between. At x = +-eps the
/// slope of the polynomial branch (zero) is returned.
ValueAndSlope heaviside(double x, const PenaltyParams& params);

/// t_eps = H(t - t_min) * t and dt_eps/dt.
ValueAndSlope penalized_thickness(double t, const PenaltyParams& params);

/// rho_eps = H(t - t_min)^P * rho and drho_eps/dt.
ValueAndSlope penalized_density(double t, double rho, const PenaltyParams& params);

}  // namespace rudder
