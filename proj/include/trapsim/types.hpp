#pragma once

#include <complex>
#include <cstdio>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace trapsim {

inline constexpr const char* kVersion = "0.1.0";

template <typename Scalar>
using Complex = std::complex<Scalar>;

template <typename Scalar>
using VectorX = Eigen::Vector<Scalar, Eigen::Dynamic>;

template <typename Scalar>
using VectorXc = Eigen::Vector<Complex<Scalar>, Eigen::Dynamic>;

template <typename Scalar>
using MatrixXc = Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

/// Thrown when a numerical consistency check fails mid-computation
/// (Hermiticity defect, norm loss, a fidelity trace outside [0,1] beyond
/// tolerance). Distinct from std::invalid_argument, which covers caller
/// mistakes detectable up front.
class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

/// Scientific-notation formatting for diagnostics; std::to_string would
/// render small defects as 0.000000.
inline std::string format_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

}  // namespace detail

}  // namespace trapsim
