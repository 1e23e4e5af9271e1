#pragma once
// Runtime-precision real type for ill-conditioned modular computations.

#include <boost/multiprecision/mpfr.hpp>
#include <Eigen/Core>
#include <cmath>
#include <limits>

namespace qftlab {

using mpreal = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                             boost::multiprecision::et_off>;

// Sets the default mpfr precision (decimal digits) for the lifetime of the object.
class PrecisionScope {
 public:
  explicit PrecisionScope(unsigned digits) : saved_(mpreal::default_precision()) {
    mpreal::default_precision(digits);
  }
  ~PrecisionScope() { mpreal::default_precision(saved_); }
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  unsigned saved_;
};

template <class Real>
inline double to_double(const Real& x) {
  return static_cast<double>(x);
}

}  // namespace qftlab

namespace Eigen {
// boost's own eigen.hpp traits lack infinity()/quiet_NaN(), which the 3.4
// eigensolvers need.
template <>
struct NumTraits<qftlab::mpreal> : GenericNumTraits<qftlab::mpreal> {
  using Real = qftlab::mpreal;
  using NonInteger = qftlab::mpreal;
  using Nested = qftlab::mpreal;
  using Literal = qftlab::mpreal;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 10,
    AddCost = 10,
    MulCost = 40
  };
  static Real epsilon() { return std::numeric_limits<Real>::epsilon(); }
  static Real dummy_precision() { return 1000 * epsilon(); }
  static Real highest() { return (std::numeric_limits<Real>::max)(); }
  static Real lowest() { return (std::numeric_limits<Real>::lowest)(); }
  static Real infinity() { return std::numeric_limits<Real>::infinity(); }
  static Real quiet_NaN() { return std::numeric_limits<Real>::quiet_NaN(); }
  static int digits10() { return static_cast<int>(Real::default_precision()); }
};
}  // namespace Eigen
