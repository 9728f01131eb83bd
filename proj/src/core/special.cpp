#include "special.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "errors.hpp"

namespace attacklab {
namespace {

// Error-free transforms (Knuth two-sum, FMA two-product).
void two_sum(double a, double b, double& s, double& e) {
  s = a + b;
  const double bv = s - a;
  e = (a - (s - bv)) + (b - bv);
}

void two_prod(double a, double b, double& p, double& e) {
  p = a * b;
  e = std::fma(a, b, -p);
}

// Unevaluated (hi + lo) accumulator.
struct DD {
  double hi = 0.0, lo = 0.0;
  void add(double d) {
    double s, e;
    two_sum(hi, d, s, e);
    hi = s;
    lo += e;
  }
  double value() const { return hi + lo; }
};

// 0.5 * ln(2*pi) split into hi + lo.
constexpr double kHalfLn2PiHi = 0x1.d67f1c864beb5p-1;
constexpr double kHalfLn2PiLo = -0x1.65b5a1b7ff5dfp-55;

// Asymptotic correction series S(y) with ln Gamma(y) = (y - 1/2) ln y - y
// + 0.5 ln(2 pi) + S(y); truncation below 1e-19 for y >= 32.
double stirling_series(double y) {
  const double w = 1.0 / (y * y);
  double s = 1.0 / 1188.0;
  s = s * w - 1.0 / 1680.0;
  s = s * w + 1.0 / 1260.0;
  s = s * w - 1.0 / 360.0;
  s = s * w + 1.0 / 12.0;
  return s / y;
}

// ln(y) as hi + lo: one Newton refinement of the libm log through exp.
std::pair<double, double> log_dd(double y) {
  const double hi = std::log(y);
  const double e = std::exp(hi);
  // Same magnitudes, so the subtraction is exact; lo ~ 1e-16 relative.
  const double lo = (y - e) / e;
  return {hi, lo};
}

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x))
    fail(ErrorKind::invalid_argument, "log_gamma: argument must be positive and finite, got " +
                                          std::to_string(x));
  // Shift into the Stirling regime, collecting ln x + ln(x+1) + ... exactly
  // enough (compensated) to subtract back out.
  DD shift;
  double y = x;
  while (y < 32.0) {
    shift.add(std::log(y));
    y += 1.0;
  }

  const auto [lhi, llo] = log_dd(y);
  const double a = y - 0.5;  // exact for y >= 32
  double p, pe;
  two_prod(a, lhi, p, pe);

  DD acc;
  acc.hi = p;
  acc.lo = pe + a * llo;
  acc.add(-y);
  acc.add(kHalfLn2PiHi);
  acc.lo += kHalfLn2PiLo;
  acc.add(stirling_series(y));
  acc.add(-shift.hi);
  acc.lo -= shift.lo;
  return acc.value();
}

double log_beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
    fail(ErrorKind::invalid_argument, "log_beta: arguments must be positive and finite");
  if (a < b) std::swap(a, b);
  if (a < 32.0) return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
  // For a >= 32 expand ln Gamma(a) - ln Gamma(a+b) by Stirling so the two
  // large terms cancel analytically instead of numerically:
  //   ln B(a, b) = ln Gamma(b) - (a - 1/2) log1p(b/a) - b ln(a+b) + b
  //                + S(a) - S(a+b).
  DD acc;
  acc.add(log_gamma(b));
  acc.add(-(a - 0.5) * std::log1p(b / a));
  acc.add(-b * std::log(a + b));
  acc.add(b);
  acc.add(stirling_series(a) - stirling_series(a + b));
  return acc.value();
}

}  // namespace attacklab
