#pragma once

#include <functional>
#include <span>
#include <vector>

#include "cmq/common.hpp"
#include "cmq/geometry.hpp"
#include "cmq/jet.hpp"

namespace cmq {

/// Closed forms of the first-order obstruction operator acting on a scalar
/// observable: the raw torsion-contraction form, the form organized around
/// the Reeb derivative of the inverse metric, and the laplacian-commutator
/// form. They agree on Reeb-invariant observables; the raw form is the only
/// one derived without assuming invariance.
enum class Delta1Form { kRaw, kConnection, kLaplacian };

/// Order-nu coefficient of the scalar obstruction applied to a0, predicted by
/// the chosen closed form. The laplacian form needs three derivatives of a0,
/// hence jet order >= 4.
Jet delta1(const GeometryFrame& f, const Jet& a0, Delta1Form form);

/// Scalar Laplace operator of the metric connection.
Jet laplacian(const GeometryFrame& f, const Jet& a);

struct ZetaChi {
  std::vector<Jet> zeta;  // obstruction vector field, one jet per component
  Jet chi;                // metric divergence of zeta
};

/// The vector field whose flow-line integrals obstruct quantization, and its
/// divergence. Both vanish identically on K-contact structures.
ZetaChi zeta_chi(const GeometryFrame& f);

/// Sampled closed integral curve of the Reeb field: strictly increasing
/// sample times within one period, the curve closing at `period`.
struct ReebOrbit {
  std::vector<double> times;
  std::vector<std::vector<double>> points;
  double period = 0.0;
};

/// Fiber of the circle fibration of the round 3-sphere through a chart
/// point, uniformly sampled. The flow direction is chosen to integrate the
/// chart's own Reeb field.
ReebOrbit hopf_fiber_orbit(std::span<const double> start, int n_samples = 256);

using FrameFactory = std::function<GeometryFrame(std::span<const double>)>;
using ObservableFn = std::function<Jet(const GeometryFrame&)>;

struct QuadratureResult {
  Cplx value = 0.0;
  double error_estimate = 0.0;  // Richardson comparison with the halved grid
};

/// Trapezoid rule over one period of a sampled closed curve. Spectrally
/// accurate for smooth periodic integrands; the estimate is only computed
/// for even sample counts.
QuadratureResult periodic_trapezoid(std::span<const Cplx> values,
                                    std::span<const double> times,
                                    double period);

struct PsiResult {
  Cplx value = 0.0;            // trapezoid value of the orbit functional
  double quad_error = 0.0;     // Richardson estimate from halving the grid
  double orbit_residual = 0.0; // worst |gamma' - xi(gamma)| over the samples
};

/// Orbit functional of an invariant observable: the integral of (zeta a0)
/// along a closed characteristic. Throws DomainError when the sampled
/// tangent strays from the Reeb field by more than orbit_tol.
PsiResult psi_gamma(const FrameFactory& factory, const ReebOrbit& orbit,
                    const ObservableFn& a0, double orbit_tol = 1e-3);

struct QuadGrid {
  std::vector<std::vector<double>> points;
  std::vector<double> weights;
};

struct PhiResult {
  Cplx direct = 0.0;    // integral of v * (zeta f(a0))
  Cplx by_parts = 0.0;  // minus the integral of v * chi * f(a0)
  double discrepancy = 0.0;
};

/// f-character of an observable over a caller-supplied quadrature grid,
/// reported from both sides of the integration-by-parts identity. The two
/// sides agree to quadrature accuracy when the grid covers a closed or
/// periodic region with invariant volume.
PhiResult phi_character(const FrameFactory& factory, const QuadGrid& grid,
                        const ObservableFn& a0,
                        const std::function<Jet(const Jet&)>& f);

}  // namespace cmq
