#pragma once

#include <stdexcept>
#include <string>

namespace partopt {

/// Base class for every error raised by the library. `kind()` is a stable
/// machine-readable name used by the CLI when mapping failures to exit codes.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define PARTOPT_DEFINE_ERROR(Name)                                             \
    class Name : public Error {                                                \
    public:                                                                    \
        explicit Name(const std::string& what) : Error(#Name, what) {}         \
    }

PARTOPT_DEFINE_ERROR(DegeneratePolygon);
PARTOPT_DEFINE_ERROR(NonConvexClip);
PARTOPT_DEFINE_ERROR(CollinearPoints);
PARTOPT_DEFINE_ERROR(DuplicatePoints);
PARTOPT_DEFINE_ERROR(NonSmoothConfiguration);
PARTOPT_DEFINE_ERROR(NonPositiveRadius);
PARTOPT_DEFINE_ERROR(MeshTooFine);
PARTOPT_DEFINE_ERROR(SingularSystem);
PARTOPT_DEFINE_ERROR(InfeasibleAtPureNodes);
PARTOPT_DEFINE_ERROR(DimensionMismatch);
PARTOPT_DEFINE_ERROR(ValidationError);

#undef PARTOPT_DEFINE_ERROR

/// Raised when an iterative solver stops without meeting its tolerance.
class NotConverged : public Error {
public:
    NotConverged(const std::string& what, int iterations, double residual)
        : Error("NotConverged", what), iterations_(iterations), residual_(residual) {}

    int iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    int iterations_;
    double residual_;
};

} // namespace partopt
