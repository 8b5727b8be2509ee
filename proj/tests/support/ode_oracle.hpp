#pragma once

// Test-only adaptive ODE integrator (Cash-Karp embedded Runge-Kutta 4(5)),
// independent of the library's Heun stepping so it can serve as an oracle.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace testsupport {

using OdeRhs =
    std::function<void(double t, const std::vector<double>& y, std::vector<double>& dy)>;

inline std::vector<double> integrate_ode(const OdeRhs& f, std::vector<double> y,
                                         double t0, double t1, double rtol = 1e-10,
                                         double atol = 1e-12) {
  static const double a[6] = {0, 1.0 / 5, 3.0 / 10, 3.0 / 5, 1.0, 7.0 / 8};
  static const double b[6][5] = {
      {},
      {1.0 / 5},
      {3.0 / 40, 9.0 / 40},
      {3.0 / 10, -9.0 / 10, 6.0 / 5},
      {-11.0 / 54, 5.0 / 2, -70.0 / 27, 35.0 / 27},
      {1631.0 / 55296, 175.0 / 512, 575.0 / 13824, 44275.0 / 110592, 253.0 / 4096}};
  static const double c5[6] = {37.0 / 378, 0, 250.0 / 621, 125.0 / 594, 0, 512.0 / 1771};
  static const double c4[6] = {2825.0 / 27648, 0,           18575.0 / 48384,
                               13525.0 / 55296, 277.0 / 14336, 1.0 / 4};

  const std::size_t d = y.size();
  std::vector<std::vector<double>> k(6, std::vector<double>(d));
  std::vector<double> ytmp(d), y5(d), y4(d);
  double t = t0;
  double h = (t1 - t0) / 100.0;
  int safety_counter = 0;
  while (t < t1) {
    if (++safety_counter > 2000000) throw std::runtime_error("ode oracle: too many steps");
    h = std::min(h, t1 - t);
    for (int s = 0; s < 6; ++s) {
      for (std::size_t i = 0; i < d; ++i) {
        double acc = y[i];
        for (int q = 0; q < s; ++q) acc += h * b[s][q] * k[q][i];
        ytmp[i] = acc;
      }
      f(t + a[s] * h, ytmp, k[s]);
    }
    double err = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      double s5 = y[i], s4 = y[i];
      for (int s = 0; s < 6; ++s) {
        s5 += h * c5[s] * k[s][i];
        s4 += h * c4[s] * k[s][i];
      }
      y5[i] = s5;
      y4[i] = s4;
      double scale = atol + rtol * std::max(std::abs(y[i]), std::abs(s5));
      err = std::max(err, std::abs(s5 - s4) / scale);
    }
    if (err <= 1.0) {
      t += h;
      y = y5;
    }
    double factor = err > 0 ? 0.9 * std::pow(err, -0.2) : 5.0;
    h *= std::clamp(factor, 0.2, 5.0);
    if (!(h > 0)) throw std::runtime_error("ode oracle: step size underflow");
  }
  return y;
}

}  // namespace testsupport
