#pragma once

#include <cmath>
#include <complex>

// Independent Dirichlet Green's function of -lap on a disk of radius R (conformal map form).
namespace oracle {

inline double disk_green(double x1, double x2, double y1, double y2, double R = 1.0) {
  const std::complex<double> z(x1 / R, x2 / R), w(y1 / R, y2 / R);
  return -std::log(std::abs((z - w) / (1.0 - std::conj(w) * z))) / (2.0 * M_PI);
}

// S(y, y) = G - Gamma at the diagonal.
inline double disk_robin(double y1, double y2, double R = 1.0) {
  return std::log((R * R - y1 * y1 - y2 * y2) / R) / (2.0 * M_PI);
}

}  // namespace oracle
