#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "errors.hpp"

namespace orbit_imager {

using Point = Eigen::Vector3d;
using Vec3 = Eigen::Vector3d;

// Minimum admissible distance between an observation point and the trajectory.
inline constexpr double kGeometryEpsilon = 1e-8;

// Homogeneous background medium.
class Medium
{
public:
    explicit Medium(double wave_speed = 1.0) : c_(wave_speed)
    {
        if (!(wave_speed > 0.0) || !std::isfinite(wave_speed))
            throw DomainError("wave speed must be positive and finite");
    }

    double c() const noexcept { return c_; }

private:
    double c_;
};

// (R, theta, phi) -> (R sin(phi) cos(theta), R sin(phi) sin(theta), R cos(phi)).
inline Point from_spherical(double radius, double theta, double phi)
{
    return {radius * std::sin(phi) * std::cos(theta),
            radius * std::sin(phi) * std::sin(theta),
            radius * std::cos(phi)};
}

} // namespace orbit_imager
