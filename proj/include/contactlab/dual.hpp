#ifndef CONTACTLAB_DUAL_HPP
#define CONTACTLAB_DUAL_HPP

#include <cmath>
#include <type_traits>

#include "contactlab/errors.hpp"

namespace contactlab {

/// Dual number a + b*eps with eps^2 = 0.  Arithmetic on the b-slot carries
/// an exact first derivative through any composite evaluation.  Nesting
/// Dual<Dual<double>> carries second derivatives the same way.
template <class T>
struct Dual {
  T a{};  // value
  T b{};  // derivative

  constexpr Dual() = default;
  constexpr Dual(T value, T deriv) : a(std::move(value)), b(std::move(deriv)) {}

  template <class U>
    requires std::is_convertible_v<U, T>
  constexpr Dual(U value) : a(static_cast<T>(value)), b{} {}  // NOLINT(google-explicit-constructor)

  constexpr Dual operator-() const { return {-a, -b}; }
  constexpr Dual operator+() const { return *this; }

  Dual& operator+=(const Dual& o) {
    a += o.a;
    b += o.b;
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    a -= o.a;
    b -= o.b;
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    b = a * o.b + b * o.a;
    a = a * o.a;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    b = (b * o.a - a * o.b) / (o.a * o.a);
    a = a / o.a;
    return *this;
  }
};

using Dual1 = Dual<double>;
using Dual2 = Dual<Dual1>;

template <class T>
constexpr Dual<T> operator+(Dual<T> x, const Dual<T>& y) {
  return x += y;
}
template <class T>
constexpr Dual<T> operator-(Dual<T> x, const Dual<T>& y) {
  return x -= y;
}
template <class T>
constexpr Dual<T> operator*(Dual<T> x, const Dual<T>& y) {
  return x *= y;
}
template <class T>
constexpr Dual<T> operator/(Dual<T> x, const Dual<T>& y) {
  return x /= y;
}

// Mixed scalar forms so that `2.0 * x` works at any nesting depth.
template <class T, class U>
  requires std::is_arithmetic_v<U>
constexpr Dual<T> operator+(Dual<T> x, U s) {
  return x += Dual<T>(s);
}
template <class T, class U>
  requires std::is_arithmetic_v<U>
constexpr Dual<T> operator+(U s, Dual<T> x) {
  return x += Dual<T>(s);
}
template <class T, class U>
  requires std::is_arithmetic_v<U>
constexpr Dual<T> operator-(Dual<T> x, U s) {
  return x -= Dual<T>(s);
}
template <class T, class U>
  requires std::is_arithmetic_v<U>
constexpr Dual<T> operator-(U s, const Dual<T>& x) {
  return Dual<T>(s) - x;
}
template <class T, class U>
  requires std::is_arithmetic_v<U>
constexpr Dual<T> operator*(Dual<T> x, U s) {
  return x *= Dual<T>(s);
}
template <class T, class U>
  requires std::is_arithmetic_v<U>
constexpr Dual<T> operator*(U s, Dual<T> x) {
  return x *= Dual<T>(s);
}
template <class T, class U>
  requires std::is_arithmetic_v<U>
constexpr Dual<T> operator/(Dual<T> x, U s) {
  return x /= Dual<T>(s);
}
template <class T, class U>
  requires std::is_arithmetic_v<U>
constexpr Dual<T> operator/(U s, const Dual<T>& x) {
  return Dual<T>(s) / x;
}

/// Innermost value of a possibly nested dual.
inline double scalar_value(double x) { return x; }
template <class T>
double scalar_value(const Dual<T>& x) {
  return scalar_value(x.a);
}

using std::abs;
using std::cos;
using std::cosh;
using std::exp;
using std::sin;
using std::sinh;
using std::tan;

inline double sqrt_checked(double x) {
  if (x < 0.0) throw DomainError("sqrt of negative value");
  return std::sqrt(x);
}
inline double log_checked(double x) {
  if (x <= 0.0) throw DomainError("ln of non-positive value");
  return std::log(x);
}
inline double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

template <class T>
Dual<T> sin(const Dual<T>& x) {
  return {sin(x.a), x.b * cos(x.a)};
}
template <class T>
Dual<T> cos(const Dual<T>& x) {
  return {cos(x.a), -x.b * sin(x.a)};
}
template <class T>
Dual<T> tan(const Dual<T>& x) {
  T t = tan(x.a);
  return {t, x.b * (t * t + 1.0)};
}
template <class T>
Dual<T> sinh(const Dual<T>& x) {
  return {sinh(x.a), x.b * cosh(x.a)};
}
template <class T>
Dual<T> cosh(const Dual<T>& x) {
  return {cosh(x.a), x.b * sinh(x.a)};
}
template <class T>
Dual<T> exp(const Dual<T>& x) {
  T v = exp(x.a);
  return {v, x.b * v};
}
template <class T>
Dual<T> sqrt_checked(const Dual<T>& x) {
  T v = sqrt_checked(x.a);
  return {v, x.b / (2.0 * v)};
}
template <class T>
Dual<T> log_checked(const Dual<T>& x) {
  return {log_checked(x.a), x.b / x.a};
}
template <class T>
Dual<T> abs(const Dual<T>& x) {
  double s = sign_of(scalar_value(x.a));
  return {abs(x.a), x.b * s};
}

/// Integer power by repeated multiplication; negative exponents divide.
template <class S>
S ipow(const S& x, long long k) {
  if (k < 0) {
    if (scalar_value(x) == 0.0) throw DomainError("zero raised to a negative power");
    return S(1.0) / ipow(x, -k);
  }
  S r(1.0);
  S base = x;
  while (k > 0) {
    if (k & 1) r = r * base;
    base = base * base;
    k >>= 1;
  }
  return r;
}

template <class S>
S checked_div(const S& num, const S& den) {
  if (scalar_value(den) == 0.0) throw DomainError("division by zero");
  return num / den;
}

}  // namespace contactlab

#endif
