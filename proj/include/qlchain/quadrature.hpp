#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <queue>
#include <sstream>
#include <type_traits>
#include <vector>

#include "qlchain/errors.hpp"

namespace qlchain {

// Globally adaptive 21-point Gauss-Kronrod quadrature for scalar, complex
// or Eigen-vector valued integrands.
struct QuadratureOptions {
  double rel_tol = 1e-11;
  double abs_tol = 1e-13;
  int max_intervals = 4000;
  bool throw_on_failure = true;
  std::vector<double> breakpoints;  // interior points to split at initially
};

template <typename T>
struct QuadratureResult {
  T value;
  double error = 0.0;
  int intervals = 0;
  int evaluations = 0;
  bool converged = false;
};

namespace detail {

inline constexpr std::array<double, 11> kGkNodes = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr std::array<double, 11> kKronrodWeights = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> kGaussWeights = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

template <typename T>
double magnitude(const T& v) {
  if constexpr (std::is_arithmetic_v<T>) {
    return std::abs(v);
  } else if constexpr (std::is_same_v<T, std::complex<double>>) {
    return std::abs(v);
  } else {
    return v.cwiseAbs().maxCoeff();
  }
}

template <typename T>
struct Segment {
  double a, b;
  T value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <typename T, typename F>
Segment<T> kronrod21(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  T fc = f(c);
  T kron = fc * kKronrodWeights[10];
  T gauss = fc * 0.0;
  for (int j = 0; j < 10; ++j) {
    const double dx = h * kGkNodes[static_cast<std::size_t>(j)];
    T sum = f(c - dx) + f(c + dx);
    kron = kron + sum * kKronrodWeights[static_cast<std::size_t>(j)];
    if (j % 2 == 1) gauss = gauss + sum * kGaussWeights[static_cast<std::size_t>(j / 2)];
  }
  T k = kron * h;
  T g = gauss * h;
  return {a, b, k, magnitude<T>(k - g)};
}

}  // namespace detail

template <typename F>
auto integrate(F f, double a, double b, const QuadratureOptions& opt = {})
    -> QuadratureResult<std::decay_t<decltype(f(a))>> {
  using T = std::decay_t<decltype(f(a))>;
  std::vector<double> cuts{a};
  for (double p : opt.breakpoints) {
    if (p > a && p < b) cuts.push_back(p);
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());

  std::priority_queue<detail::Segment<T>> heap;
  QuadratureResult<T> res;
  bool init = false;
  T total{};
  double err = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    auto s = detail::kronrod21<T>(f, cuts[i], cuts[i + 1]);
    res.evaluations += 21;
    total = init ? T(total + s.value) : s.value;
    init = true;
    err += s.error;
    heap.push(std::move(s));
  }
  if (!init) {
    res.value = f(a) * 0.0;
    res.converged = true;
    return res;
  }
  while (err > std::max(opt.abs_tol, opt.rel_tol * detail::magnitude<T>(total)) &&
         static_cast<int>(heap.size()) < opt.max_intervals) {
    auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push(std::move(worst));
      break;
    }
    auto left = detail::kronrod21<T>(f, worst.a, mid);
    auto right = detail::kronrod21<T>(f, mid, worst.b);
    res.evaluations += 42;
    total = total + (left.value + right.value - worst.value);
    err += left.error + right.error - worst.error;
    heap.push(std::move(left));
    heap.push(std::move(right));
  }
  // Re-sum to shed accumulated update rounding.
  T sum = heap.top().value * 0.0;
  double esum = 0.0;
  res.intervals = static_cast<int>(heap.size());
  while (!heap.empty()) {
    sum = sum + heap.top().value;
    esum += heap.top().error;
    heap.pop();
  }
  res.value = sum;
  res.error = esum;
  res.converged = esum <= std::max(opt.abs_tol, opt.rel_tol * detail::magnitude<T>(sum)) * 1.0001;
  if (!res.converged && opt.throw_on_failure) {
    std::ostringstream os;
    os << "adaptive quadrature did not converge on [" << a << ", " << b << "]: error estimate "
       << esum << " after " << res.intervals << " intervals, |value| " << detail::magnitude<T>(sum);
    throw NumericError(os.str());
  }
  return res;
}

// Integral over [a, inf) via x = a + scale * u / (1 - u).
template <typename F>
auto integrate_to_infinity(F f, double a, double scale, QuadratureOptions opt = {})
    -> QuadratureResult<std::decay_t<decltype(f(a))>> {
  using R = std::decay_t<decltype(f(a))>;
  auto g = [&](double u) -> R {
    const double om = 1.0 - u;
    const double x = a + scale * u / om;
    const double jac = scale / (om * om);
    if (!(om > 0.0) || !std::isfinite(x)) return f(a) * 0.0;
    return f(x) * jac;
  };
  std::vector<double> mapped;
  for (double p : opt.breakpoints) {
    if (p > a && std::isfinite(p)) mapped.push_back((p - a) / (p - a + scale));
  }
  opt.breakpoints = std::move(mapped);
  return integrate(g, 0.0, 1.0, opt);
}

}  // namespace qlchain
