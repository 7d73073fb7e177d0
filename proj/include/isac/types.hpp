#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace isac {

using cd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 299792458.0;

/// Error categories shared by the C++ core and the C API.
enum class ErrorCode : int {
    Ok = 0,
    InvalidArgument = 1,
    Config = 2,
    OutOfRange = 3,
    DimensionMismatch = 4,
    DegenerateSymbols = 5,
    Singular = 6,
    Infeasible = 7,
    Parse = 8,
    Validation = 9,
    Io = 10,
    Internal = 11,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline cd cis(double phase) { return {std::cos(phase), std::sin(phase)}; }

}  // namespace isac
