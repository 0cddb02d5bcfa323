#pragma once

#include <stdexcept>

#include "types.hpp"

namespace zcmsep {

// Which scalar factor multiplies conj(shat[n])*x[n] in the zero-constant-
// modulus gradient. Paper: 2(u-1)(2u+1) with u = |shat[n]|^2, which never
// reverses sign below the unit circle and so always pushes nonzero moduli
// toward 1. Analytic: 2(u-1)(3u-1), twice the conjugate-coordinate
// derivative of the mean ZCM penalty, which descends toward 0 for u < 1/3.
// Both are kept; they genuinely differ (see grad_j0_* tests).
enum class GradientVariant { Paper, Analytic };

template <class T = double>
struct ObjectiveValue {
  T j0 = T(0);
  T j1 = T(0);
  T j01 = T(0);
  T lambda = T(0);
};

// shat[n] = w^H x[n], the beamformed symbol stream (column vector of
// length N). Defined up to a global phase the detector never sees.
template <class WDer, class XDer>
auto apply_beamformer(const Eigen::MatrixBase<WDer>& w, const Eigen::MatrixBase<XDer>& x)
    -> Eigen::Vector<typename XDer::Scalar, Eigen::Dynamic> {
  if (w.size() != x.rows())
    throw std::invalid_argument("apply_beamformer: beamformer length != antenna count");
  return (w.adjoint() * x).transpose();
}

// Mean ZCM penalty (1/N) sum |s[n]|^2 (|s[n]|^2 - 1)^2 of the beamformed
// stream; zero exactly on streams whose moduli are all in {0, 1}.
template <class WDer, class XDer>
auto eval_j0(const Eigen::MatrixBase<WDer>& w, const Eigen::MatrixBase<XDer>& x) ->
    typename Eigen::NumTraits<typename XDer::Scalar>::Real {
  using Real = typename Eigen::NumTraits<typename XDer::Scalar>::Real;
  const auto shat = apply_beamformer(w, x);
  const auto u = shat.array().abs2();
  return (u * (u - Real(1)).square()).mean();
}

// Sliding three-sample products s[n-1] s*[n] s[n+1]; identically zero on
// any Manchester-coded stream (every three consecutive chips hold a zero)
// but generically nonzero on mixtures of two or three such streams.
template <class SDer>
auto pi_product(const Eigen::MatrixBase<SDer>& shat)
    -> Eigen::Vector<typename SDer::Scalar, Eigen::Dynamic> {
  const Index n = shat.size();
  if (n < 3) throw std::invalid_argument("pi_product: need at least 3 samples");
  Eigen::Vector<typename SDer::Scalar, Eigen::Dynamic> out(n - 2);
  for (Index k = 1; k + 1 < n; ++k)
    out[k - 1] = shat[k - 1] * std::conj(shat[k]) * shat[k + 1];
  return out;
}

// Mean squared three-sample product, (1/(N-2)) sum |s[n-1]|^2 |s[n]|^2
// |s[n+1]|^2 over the N-2 interior windows.
template <class WDer, class XDer>
auto eval_j1(const Eigen::MatrixBase<WDer>& w, const Eigen::MatrixBase<XDer>& x) ->
    typename Eigen::NumTraits<typename XDer::Scalar>::Real {
  if (x.cols() < 3) throw std::invalid_argument("eval_j1: need at least 3 samples");
  const auto shat = apply_beamformer(w, x);
  const auto u = shat.array().abs2().eval();
  const Index n = u.size();
  return (u.head(n - 2) * u.segment(1, n - 2) * u.tail(n - 2)).sum() / static_cast<double>(n - 2);
}

// Coefficient sequences the gradients are assembled from:
//   c[n]  = 2(u[n]-1)(2u[n]+1) shat[n]                    for the ZCM part,
//   c-[n] = 2 u[n] u[n+1] shat[n-1]
//   c0[n] = 2 u[n-1] u[n+1] shat[n]
//   c+[n] = 2 u[n-1] u[n] shat[n+1]                       for the product part,
// with u[n] = |shat[n]|^2; c spans all N samples, the window coefficients
// span the N-2 interior positions.
template <class T = double>
struct GradientTerms {
  CVec<T> c;
  CVec<T> c_minus;
  CVec<T> c_zero;
  CVec<T> c_plus;
};

template <class WDer, class XDer>
auto gradient_terms(const Eigen::MatrixBase<WDer>& w, const Eigen::MatrixBase<XDer>& x)
    -> GradientTerms<typename Eigen::NumTraits<typename XDer::Scalar>::Real> {
  using Real = typename Eigen::NumTraits<typename XDer::Scalar>::Real;
  if (x.cols() < 3) throw std::invalid_argument("gradient_terms: need at least 3 samples");
  const auto shat = apply_beamformer(w, x).eval();
  const auto u = shat.array().abs2().eval();
  const Index n = shat.size();
  GradientTerms<Real> terms;
  terms.c.resize(n);
  for (Index k = 0; k < n; ++k)
    terms.c[k] = Real(2) * (u[k] - Real(1)) * (Real(2) * u[k] + Real(1)) * shat[k];
  terms.c_minus.resize(n - 2);
  terms.c_zero.resize(n - 2);
  terms.c_plus.resize(n - 2);
  for (Index k = 1; k + 1 < n; ++k) {
    terms.c_minus[k - 1] = Real(2) * u[k] * u[k + 1] * shat[k - 1];
    terms.c_zero[k - 1] = Real(2) * u[k - 1] * u[k + 1] * shat[k];
    terms.c_plus[k - 1] = Real(2) * u[k - 1] * u[k] * shat[k + 1];
  }
  return terms;
}

namespace detail {

// Shared assembly for both ZCM gradient variants: (1/N) sum f(u[n]) *
// conj(shat[n]) * x[n], with f per variant.
template <class WDer, class XDer>
auto grad_j0_impl(const Eigen::MatrixBase<WDer>& w, const Eigen::MatrixBase<XDer>& x,
                  GradientVariant variant)
    -> Eigen::Vector<typename XDer::Scalar, Eigen::Dynamic> {
  using Scalar = typename XDer::Scalar;
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  const auto shat = apply_beamformer(w, x).eval();
  const auto u = shat.array().abs2().eval();
  const Index n = shat.size();
  Eigen::Vector<Scalar, Eigen::Dynamic> q(n);
  for (Index k = 0; k < n; ++k) {
    const Real f = variant == GradientVariant::Paper
                       ? Real(2) * (u[k] - Real(1)) * (Real(2) * u[k] + Real(1))
                       : Real(2) * (u[k] - Real(1)) * (Real(3) * u[k] - Real(1));
    q[k] = f * std::conj(shat[k]);
  }
  return (x * q) / static_cast<Real>(n);
}

}  // namespace detail

// ZCM gradient with the printed scalar factor 2(u-1)(2u+1).
template <class WDer, class XDer>
auto grad_j0_paper(const Eigen::MatrixBase<WDer>& w, const Eigen::MatrixBase<XDer>& x) {
  return detail::grad_j0_impl(w, x, GradientVariant::Paper);
}

// ZCM gradient as twice the conjugate-coordinate derivative of eval_j0,
// scalar factor 2(u-1)(3u-1); matches central finite differences.
template <class WDer, class XDer>
auto grad_j0_analytic(const Eigen::MatrixBase<WDer>& w, const Eigen::MatrixBase<XDer>& x) {
  return detail::grad_j0_impl(w, x, GradientVariant::Analytic);
}

template <class WDer, class XDer>
auto grad_j0(const Eigen::MatrixBase<WDer>& w, const Eigen::MatrixBase<XDer>& x,
             GradientVariant variant) {
  return detail::grad_j0_impl(w, x, variant);
}

// Gradient of the windowed product penalty: (1/(N-2)) sum over interior n
// of c-[n]* x[n-1] + c0[n]* x[n] + c+[n]* x[n+1]. Assembled as one
// matrix-vector product by accumulating, per sample t, the window terms in
// which x[t] appears.
template <class WDer, class XDer>
auto grad_j1(const Eigen::MatrixBase<WDer>& w, const Eigen::MatrixBase<XDer>& x)
    -> Eigen::Vector<typename XDer::Scalar, Eigen::Dynamic> {
  using Scalar = typename XDer::Scalar;
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  if (x.cols() < 3) throw std::invalid_argument("grad_j1: need at least 3 samples");
  const auto shat = apply_beamformer(w, x).eval();
  const auto u = shat.array().abs2().eval();
  const Index n = shat.size();
  Eigen::Vector<Scalar, Eigen::Dynamic> q(n);
  for (Index t = 0; t < n; ++t) {
    Real g = Real(0);
    if (t + 2 < n) g += u[t + 1] * u[t + 2];          // x[t] left of window t+1
    if (t >= 1 && t + 1 < n) g += u[t - 1] * u[t + 1];  // x[t] at window center
    if (t >= 2) g += u[t - 2] * u[t - 1];             // x[t] right of window t-1
    q[t] = Real(2) * g * std::conj(shat[t]);
  }
  return (x * q) / static_cast<Real>(n - 2);
}

// Hybrid objective lambda*J0 + (1-lambda)*J1 and its gradient, as the
// exact affine combinations of the parts.
template <class WDer, class XDer>
auto eval_j01(const Eigen::MatrixBase<WDer>& w, const Eigen::MatrixBase<XDer>& x, double lambda)
    -> ObjectiveValue<typename Eigen::NumTraits<typename XDer::Scalar>::Real> {
  using Real = typename Eigen::NumTraits<typename XDer::Scalar>::Real;
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw std::invalid_argument("eval_j01: lambda must lie in [0, 1]");
  ObjectiveValue<Real> v;
  v.lambda = static_cast<Real>(lambda);
  v.j0 = eval_j0(w, x);
  v.j1 = eval_j1(w, x);
  v.j01 = v.lambda * v.j0 + (Real(1) - v.lambda) * v.j1;
  return v;
}

template <class WDer, class XDer>
auto grad_j01(const Eigen::MatrixBase<WDer>& w, const Eigen::MatrixBase<XDer>& x, double lambda,
              GradientVariant variant = GradientVariant::Paper)
    -> Eigen::Vector<typename XDer::Scalar, Eigen::Dynamic> {
  using Real = typename Eigen::NumTraits<typename XDer::Scalar>::Real;
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw std::invalid_argument("grad_j01: lambda must lie in [0, 1]");
  const Real l = static_cast<Real>(lambda);
  return l * detail::grad_j0_impl(w, x, variant) + (Real(1) - l) * grad_j1(w, x);
}

}  // namespace zcmsep
