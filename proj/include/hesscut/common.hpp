#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace hesscut {

using Complex = std::complex<double>;

// Input/usage problems: bad files, bad arguments, inconsistent requests.
// The CLI maps these to exit code 2.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A computation refused because it would exceed a stated resource cap
// (node budgets, frequency caps, power budgets). CLI exit code 3.
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A computation that ran but could not reach its accuracy/consistency target.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Compensated (Kahan-Babuska-Neumaier) summation over a fixed-order
// sequence. Unlike plain Kahan it survives summands larger than the running
// sum; the fixed order keeps reductions bit-identical across serial and
// parallel runs.
inline double kahan_sum(const std::vector<double>& xs) {
  double sum = 0.0, comp = 0.0;
  for (double x : xs) {
    double t = sum + x;
    comp += (std::abs(sum) >= std::abs(x)) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

inline Complex kahan_sum(const std::vector<Complex>& xs) {
  double sr = 0.0, cr = 0.0, si = 0.0, ci = 0.0;
  for (const Complex& z : xs) {
    double x = z.real(), t = sr + x;
    cr += (std::abs(sr) >= std::abs(x)) ? (sr - t) + x : (x - t) + sr;
    sr = t;
    double y = z.imag(), u = si + y;
    ci += (std::abs(si) >= std::abs(y)) ? (si - u) + y : (y - u) + si;
    si = u;
  }
  return Complex(sr + cr, si + ci);
}

}  // namespace hesscut
