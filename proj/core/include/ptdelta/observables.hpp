#pragma once

#include <span>

#include "ptdelta/complex_field.hpp"

namespace ptdelta {

/// Riemann-sum norm, sum |psi_i|^2 dx. No normalization is imposed anywhere
/// in this library; g and the amplitudes carry the physical scale.
double norm_squared(const ComplexField& field);

/// Overlap <a|b> = sum conj(a_i) b_i dx.
Complex inner_product(const ComplexField& a, const ComplexField& b);

/// Probability current j = -i (psi* psi' - psi psi'*) = 2 Im(psi* psi'),
/// central differences at the bin nearest to x. Convention: a right-moving
/// plane wave exp(ikx), k > 0, carries j = 2k (kinetic operator -Laplace,
/// hbar = 1, 2m = 1). The derivative is discontinuous at delta spikes, so x
/// must stay at least two bins away from every position in `deltas`.
double probability_current(const ComplexField& field, double x,
                           std::span<const double> delta_positions = {});

/// arg psi(x) in (-pi, pi], with linear interpolation of real and imaginary
/// parts before taking the argument. Requires |psi(x)| > 1e-12.
double phase_at(const ComplexField& field, double x);

/// The PT operation on states, psi(x) -> conj(psi(-x)). Requires a grid
/// symmetric about the origin (up to one bin; bin 0 is its own mirror).
ComplexField pt_reflect(const ComplexField& field);

}  // namespace ptdelta
