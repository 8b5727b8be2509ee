#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "granule/freeboundary.hpp"
#include "granule/model.hpp"

namespace granule {

/// Sampled functions of (t0, t) on the uniform triangular grid
/// {0 <= t0 <= t <= T} with N points per axis. Entry (k, l) holds the value
/// at t0 = k*T/(N-1), t = l*T/(N-1); only k <= l is meaningful.
struct FieldBundle {
  std::size_t N = 0;
  double T = 0.0;
  std::size_t n = 0, m = 0;
  std::vector<double> c;    // N*N
  std::vector<double> q;    // N*N, dc/dt0
  std::vector<double> x;    // N*N*n
  std::vector<double> s;    // N*N*m
  std::vector<double> psi;  // N*N*n

  double grid_time(std::size_t idx) const { return T * double(idx) / double(N - 1); }
  std::size_t at(std::size_t k, std::size_t l) const { return l * N + k; }
  double radius(std::size_t l) const { return c[at(l, l)]; }
};

/// Box of Theorem-style deviation constants h around the reference functions
/// (X_0, S*, Psi*, Sigma, sigma_a), plus the lower position cutoff used when
/// sampling the 1/c^2 kernels.
struct HBox {
  std::vector<double> h_x;    // size n
  std::vector<double> h_s;    // size m
  std::vector<double> h_psi;  // size n
  double h_c1 = 0.0;
  double h_c2 = 0.0;
  double c_floor = 0.0;
};

/// Default box: each h is 50% of the corresponding reference scale over
/// [0, T1]; c_floor is 5% of the c-range upper end.
HBox default_hbox(const ModelParameters& p, const BulkEnvironment& bulk, double T1);

struct ContractionReport {
  std::vector<double> lambda_x, lambda_s, lambda_psi;
  double lambda_c1 = 0, lambda_c2 = 0, lambda_c3 = 0;
  std::vector<double> M_x, M_s, M_psi;
  double M_c1 = 0, M_c2 = 0;
  HBox hbox;
  double a = 0, b = 0;       // a T^2 + b T < 1 condition coefficients
  double T1 = 0;
  double T_guaranteed = 0;   // min of the horizon list and the root constraint
  double Lambda = 0;         // a T_guaranteed^2 + b T_guaranteed
  bool certified = false;    // Lambda < 1 and T_guaranteed > 0
  std::size_t samples = 0;

  double lambda_at(double T) const { return a * T * T + b * T; }
};

struct PicardOptions {
  std::size_t grid_points = 129;
  double tol = 1e-10;           // sup-norm successive difference
  int max_iter = 60;
  Regime regime = Regime::AttachmentOnly;
  bool check_hbox = false;
  HBox hbox;                    // used when check_hbox
};

struct PicardHistory {
  std::vector<double> errors;  // per-iteration sup-norm differences
  int iterations = 0;
  bool converged = false;
};

/// Bundle built from the reference functions: c = Sigma(t0), q = sigma_a(t0),
/// x = X_0(t0), s = S*(t), psi = Psi*(t).
FieldBundle initial_bundle(std::size_t grid_points, double T, const ModelParameters& p,
                           const BulkEnvironment& bulk);

/// One application of the fixed-point operator: evaluates the right-hand
/// sides of the compact integral system on the triangular grid by trapezoid
/// quadrature, with the characteristic kernels in the cubic (c^3) form.
/// When `check` is non-null, throws StateError if the output escapes the
/// h-box (horizon too large).
FieldBundle apply_operator_A(const FieldBundle& in, const ModelParameters& p,
                             const KineticsModel& kin, const BulkEnvironment& bulk,
                             Regime regime = Regime::AttachmentOnly,
                             const HBox* check = nullptr);

/// Sup-norm distance in the theorem's product norm (sum of per-component
/// max-norms over the triangle).
double bundle_distance(const FieldBundle& a, const FieldBundle& b);

/// Picard iteration of the operator until the successive difference drops
/// below tol. Throws NonConvergenceError (with the error history) past max_iter.
FieldBundle picard_solve(FieldBundle init, const ModelParameters& p,
                         const KineticsModel& kin, const BulkEnvironment& bulk,
                         const PicardOptions& opt, PicardHistory& history);

struct ContractionOptions {
  std::size_t samples = 4096;
  unsigned seed = 20240817;
};

/// Empirical bounds M and Lipschitz constants lambda for the operator kernels
/// by Latin-hypercube sampling over the h-box, assembled into the a, b
/// coefficients and the guaranteed horizon.
ContractionReport estimate_contraction(const ModelParameters& p, const KineticsModel& kin,
                                       const BulkEnvironment& bulk, const HBox& box,
                                       double T1, const ContractionOptions& opt = {});

}  // namespace granule
