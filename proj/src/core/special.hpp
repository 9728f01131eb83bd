#ifndef ATTACKLAB_SPECIAL_HPP
#define ATTACKLAB_SPECIAL_HPP

namespace attacklab {

// ln Gamma(x) for x > 0.  Accuracy is pushed well below 1e-13 absolute across
// [0.5, 500] by evaluating the Stirling core in paired (hi, lo) arithmetic;
// plain double evaluation cannot meet that target once ln Gamma grows past
// ~1e3 because a single rounding already costs more.
double log_gamma(double x);

// ln Beta(a, b) for a, b > 0.  Large-argument cancellation between the three
// ln Gamma terms is avoided analytically, keeping the result accurate in a
// relative sense even when the naive difference of ~1e4-sized terms would
// lose digits.
double log_beta(double a, double b);

}  // namespace attacklab

#endif
