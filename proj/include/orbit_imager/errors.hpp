#pragma once

#include <stdexcept>
#include <string>

namespace orbit_imager {

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Argument outside the domain of an operation (t out of range, bad slice coordinate, ...).
class DomainError : public Error
{
public:
    using Error::Error;
};

// Observation point coincides with the trajectory; the forward integrand is singular there.
class SingularGeometryError : public Error
{
public:
    using Error::Error;
};

class QuadratureError : public Error
{
public:
    using Error::Error;
};

class AssemblyError : public Error
{
public:
    using Error::Error;
};

class SpectralError : public Error
{
public:
    using Error::Error;
};

class IoError : public Error
{
public:
    using Error::Error;
};

// Scenario validation failure. `pointer()` is the JSON pointer of the offending key.
class ConfigError : public Error
{
public:
    ConfigError(std::string pointer, const std::string& what)
        : Error(pointer + ": " + what), pointer_(std::move(pointer))
    {
    }

    const std::string& pointer() const noexcept { return pointer_; }

private:
    std::string pointer_;
};

} // namespace orbit_imager
