#pragma once

#include <utility>

#include "types.hpp"

namespace zcmsep {

// Central finite differences of a real functional over the real and
// imaginary coordinates of w, packed as re + j*im. Under the convention
// that a "gradient" is twice the conjugate-coordinate derivative, this is
// directly comparable to the gradient functions.
template <class T, class F>
CVec<T> fd_gradient(F&& f, const CVec<T>& w, T step = T(1e-6)) {
  CVec<T> g(w.size());
  CVec<T> probe = w;
  for (Index m = 0; m < w.size(); ++m) {
    const std::complex<T> orig = probe[m];
    probe[m] = orig + std::complex<T>(step, 0);
    const T fp_re = f(probe);
    probe[m] = orig - std::complex<T>(step, 0);
    const T fm_re = f(probe);
    probe[m] = orig + std::complex<T>(0, step);
    const T fp_im = f(probe);
    probe[m] = orig - std::complex<T>(0, step);
    const T fm_im = f(probe);
    probe[m] = orig;
    g[m] = {(fp_re - fm_re) / (2 * step), (fp_im - fm_im) / (2 * step)};
  }
  return g;
}

}  // namespace zcmsep
