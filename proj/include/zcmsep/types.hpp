#pragma once

#include <complex>
#include <Eigen/Dense>

namespace zcmsep {

using Index = Eigen::Index;

// Dense complex containers used throughout; templated on the real scalar.
template <class T = double>
using CVec = Eigen::Vector<std::complex<T>, Eigen::Dynamic>;

template <class T = double>
using CMat = Eigen::Matrix<std::complex<T>, Eigen::Dynamic, Eigen::Dynamic>;

template <class T = double>
using RVec = Eigen::Vector<T, Eigen::Dynamic>;

// A beamformer is an antenna-count complex weight vector, applied as w^H X.
template <class T = double>
using Beamformer = CVec<T>;

}  // namespace zcmsep
