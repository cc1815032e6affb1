#pragma once

#include <vector>

#include "cmq/wick.hpp"

namespace cmq {

/// Solved abelian-connection data over one frame. The series r is stored in
/// a working algebra whose cutoff carries two guard degrees above the public
/// nu_cutoff so the formal (i/nu) divisions stay exact through the public top
/// degree; r is converged through nu-degree nu_cutoff + 1, anything above is
/// workspace.
struct FedosovState {
  GeometryFrame frame;
  int nu_cutoff = 0;
  int working_cutoff = 0;
  WickElement r;
  WickElement torsion_el;
  WickElement curvature_el;
  /// Max-norm change of r per pass; ends on an exact zero (fixed point).
  std::vector<double> iteration_deltas;
};

/// Solves delta r = T + R + d_nabla r + (i/nu) r o r with delta_inv r = 0 by
/// a fixed count of degree-raising passes (one per converged nu-degree, never
/// a numeric convergence test). Requires frame.order >= nu_cutoff + 3.
FedosovState solve_r(const GeometryFrame& frame, int nu_cutoff);

/// Fedosov derivative D a = d_nabla a - delta a + (i/nu)[r, a]; `a` must
/// live in the state's working algebra.
WickElement connection_D(const FedosovState& st, const WickElement& a);

/// Weyl-curvature defect Omega - omega = -delta r + T + R + d_nabla r +
/// (i/nu) r o r, truncated to the public cutoff.
WickElement flatness_residual(const FedosovState& st);

/// Unique fixed point of b = a0 + delta_inv(d_nabla b + (i/nu)[r, b]), the
/// flat extension of a0 with projection a0. degree_cap limits the stored
/// nu-degrees (default: the working cutoff); capping saves jet orders when
/// only low nu-orders of a product are needed.
WickElement quantum_lift(const FedosovState& st, const Jet& a0, int degree_cap = -1);

/// nu^p coefficients (x-jets) of Delta a0 = i_xi Pi D Q a0, valid for
/// 2p <= nu_cutoff and sized nu_cutoff/2 + 1. Entry 0 is the Reeb derivative
/// of a0.
std::vector<Jet> delta_series(const FedosovState& st, const Jet& a0);

/// nu^p coefficients of a0 * b0 = Pi(Q a0 o Q b0), sized nu_cutoff/2 + 1.
std::vector<Jet> star_series(const FedosovState& st, const Jet& a0, const Jet& b0);

/// Star product extended C[[nu]]-bilinearly to nu-series operands (entry p
/// holds the nu^p coefficient).
std::vector<Jet> star_nu(const FedosovState& st, const std::vector<Jet>& a,
                         const std::vector<Jet>& b);

/// Delta extended C[[nu]]-linearly to a nu-series operand.
std::vector<Jet> delta_nu(const FedosovState& st, const std::vector<Jet>& a);

double series_max_abs(const std::vector<Jet>& s);
double series_max_abs_diff(const std::vector<Jet>& a, const std::vector<Jet>& b);

/// Residual of the Wick-pairing kernel condition on da: max over the free
/// index of h^{ji} d_i a (holomorphic side) or h^{ij} d_i a (conjugate side).
double wick_kernel_residual(const GeometryFrame& f, const Jet& a, bool conjugate_side = false);

/// Linear functions spanning the pointwise kernel of the chosen pairing side
/// at the base point: candidates for (anti)holomorphic test functions, to be
/// validated with wick_kernel_residual before use.
std::vector<Jet> wick_kernel_candidates(const GeometryFrame& f, bool conjugate_side = false);

/// Max over nu-orders of c * a - c a (kernel element a as the right factor),
/// or of a * c - a c when a_on_left.
double check_wick_property(const FedosovState& st, const Jet& a, const Jet& c,
                           bool a_on_left = false);

}  // namespace cmq
