#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cmq/chart.hpp"
#include "cmq/common.hpp"
#include "cmq/jet.hpp"

namespace cmq {

/// Named residual magnitudes of a family of tensor identities. Checks always
/// report every row; callers decide what counts as a failure.
struct ResidualReport {
  std::vector<std::pair<std::string, double>> items;

  void add(std::string name, double value) {
    items.emplace_back(std::move(name), value);
  }
  double max_residual() const;
  double at(std::string_view name) const;  // throws Error when the row is absent
  bool all_below(double tol) const { return max_residual() <= tol; }
};

/// Pointwise jet frame of a contact metric structure and its derived tensors.
///
/// Index layouts are row-major with upper indices first: two-index tensors at
/// [i*n + j], connection coefficients C^i_{jk} at [(i*n + j)*n + k] with k the
/// differentiation slot, curvature R^i_{jkl} at [((i*n + j)*n + k)*n + l] with
/// (k,l) the antisymmetric direction pair. Lowered tensors keep the slot order
/// of their defining contraction: torsion_low[k][i][j] = omega_kn T^n_{ij},
/// curv_low[k][l][i][j] = omega_kn R^n_{lij}, tanno[k][i][j] = Q^k_{ij}.
///
/// Jet orders decay with each differentiation: lambda, xi, g, g_inv, phi, pi,
/// h, proj live at the build order J; omega, gamma_g, S, gamma, torsion,
/// torsion_low, lie_g, lie_g_inv, tanno, volume at J-1; curvatures at J-2.
struct GeometryFrame {
  int n = 0;      // 2m+1 coordinates
  int m = 0;
  int order = 0;  // jet order of the undifferentiated tensors
  std::vector<double> base;

  std::vector<Jet> lambda;       // lambda_i
  std::vector<Jet> xi;           // xi^i
  std::vector<Jet> g;            // g_ij
  std::vector<Jet> g_inv;        // gbar^ij
  std::vector<Jet> phi;          // phi^i_j
  std::vector<Jet> omega;        // omega_ij = d_i lambda_j - d_j lambda_i
  std::vector<Jet> pi;           // pi^ij = gbar^ik phi^j_k
  std::vector<Jet> h;            // h^ij = gbar^ij + i pi^ij
  std::vector<Jet> proj;         // P^i_j = delta^i_j - xi^i lambda_j
  std::vector<Jet> gamma_g;      // Levi-Civita coefficients of g
  std::vector<Jet> S;            // connection potential S^i_{jk}
  std::vector<Jet> gamma;        // gamma_g + S, parallelizes the structure
  std::vector<Jet> torsion;      // T^i_{jk} = S^i_{jk} - S^i_{kj}
  std::vector<Jet> torsion_low;  // T_kij
  std::vector<Jet> curv;         // R^i_{jkl} of gamma
  std::vector<Jet> curv_low;     // R_klij
  std::vector<Jet> curv_g;       // Levi-Civita curvature of g
  std::vector<Jet> tanno;        // Q^k_{ij}, obstruction to CR integrability
  std::vector<Jet> lie_g;        // (L_xi g)_ij
  std::vector<Jet> lie_g_inv;    // (L_xi gbar)^ij = -gbar gbar (L_xi g)
  Jet volume;                    // density of lambda ^ (d lambda)^m vs dx^1..dx^n
};

/// Evaluates every frame tensor at the base point. `order` is the jet order
/// of the chart tensors and must be >= 3 so that curvature retains order >= 0.
/// Throws DomainError when the metric is singular or the contact volume
/// density vanishes at the point.
GeometryFrame build_frame(const ChartStructure& chart, std::span<const double> base_point,
                          int order, const Tolerances& tol = {});

/// Recomputes torsion, curvature and their lowered forms from the current
/// `gamma` field (negative controls corrupt gamma and call this).
void refresh_connection_tensors(GeometryFrame& f);

/// Pointwise algebraic relations tying lambda, xi, g, phi, omega together,
/// plus the derived projector and kernel identities of pi and h.
ResidualReport check_compatibility(const GeometryFrame& f);

/// Parallelism of the five structure tensors under gamma, the lowered-torsion
/// pairing with omega, and the potential-torsion reconstruction identity.
ResidualReport check_connection(const GeometryFrame& f);

/// Curvature/torsion symmetries of the lowered tensors, the curvature-metric
/// pairing, and the differential Bianchi set evaluated through the fiberwise
/// form calculus.
ResidualReport check_symmetries(const GeometryFrame& f);

/// Bianchi rows of check_symmetries; lives with the form-calculus operators.
ResidualReport bianchi_residuals(const GeometryFrame& f);

struct Classification {
  bool is_contact = false;
  bool is_kcontact = false;
  bool is_cr = false;
  bool is_sasakian = false;
  bool levi_positive = false;
  ResidualReport residuals;
};

/// Boolean classification with the residuals that justify it. Booleans use
/// tol.geometry relative to the magnitude of the tensors involved.
Classification classify(const GeometryFrame& f, const Tolerances& tol = {});

/// Jacobi bracket {a,b} = pi(da, db) + a (xi b) - b (xi a) of scalar jets at
/// the frame's base point; consumes one jet order.
Jet jacobi_bracket(const GeometryFrame& f, const Jet& a, const Jet& b);

}  // namespace cmq
