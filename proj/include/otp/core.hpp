#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "otp/errors.hpp"
#include "otp/matrix.hpp"
#include "otp/potential.hpp"
#include "otp/relation.hpp"
#include "otp/space.hpp"

namespace otp {

// Conjugation engine. The transform of a potential f on X is
//
//   f^c(y) = max_x [ c(x,y) - f(x) ],
//
// the generalized Fenchel conjugate with the coupling in place of the
// bilinear pairing. With the coupling finite and f proper, the transform is
// finite everywhere, hence proper. Points where f is +inf drop out of the
// max. Potentials on Y conjugate over the transposed instance.
inline ExtendedPotential c_transform(const ExtendedPotential& f,
                                     const CouplingInstance& inst) {
  if (f.size() != inst.nx())
    throw Error(ErrorKind::SpaceMismatch, "potential does not live on space X");
  std::vector<double> out(inst.ny());
  for (std::size_t j = 0; j < inst.ny(); ++j) {
    double best = -kPlusInfinity;
    for (std::size_t i = 0; i < inst.nx(); ++i) {
      if (!f.is_finite_at(i)) continue;
      best = std::max(best, inst.coupling(i, j) - f[i]);
    }
    out[j] = best;
  }
  return ExtendedPotential(inst.space_y, std::move(out));
}

// Double conjugate f^{cc}: the largest c-convex minorant of f.
inline ExtendedPotential c_convexify(const ExtendedPotential& f,
                                     const CouplingInstance& inst) {
  return c_transform(c_transform(f, inst), inst.transposed());
}

// A potential is c-convex exactly when it is a fixed point of double
// conjugation.
inline bool is_c_convex(const ExtendedPotential& f, const CouplingInstance& inst,
                        const Tolerance& tol = {}) {
  return f.approx_equal(c_convexify(f, inst), tol.eps_eq);
}

// gap(i,j) = f(i) + f^c(j) - c(i,j); nonnegative everywhere (up to rounding),
// +inf where f is +inf. Zeros mark the subdifferential.
inline Matrix young_fenchel_gap(const ExtendedPotential& f,
                                const CouplingInstance& inst) {
  ExtendedPotential conj = c_transform(f, inst);
  Matrix gap(inst.nx(), inst.ny());
  for (std::size_t i = 0; i < inst.nx(); ++i)
    for (std::size_t j = 0; j < inst.ny(); ++j)
      gap(i, j) = f.is_finite_at(i) ? f[i] + conj[j] - inst.coupling(i, j)
                                    : kPlusInfinity;
  return gap;
}

// All pairs where the conjugation inequality is tight: f(x) + f^c(y) = c(x,y)
// within tolerance. Ties are kept; every pair within the band is returned.
inline Relation c_subdifferential(const ExtendedPotential& f,
                                  const CouplingInstance& inst,
                                  const Tolerance& tol = {}) {
  ExtendedPotential conj = c_transform(f, inst);
  std::vector<IndexPair> pairs;
  for (std::size_t i = 0; i < inst.nx(); ++i) {
    if (!f.is_finite_at(i)) continue;
    for (std::size_t j = 0; j < inst.ny(); ++j)
      if (std::abs(f[i] + conj[j] - inst.coupling(i, j)) <= tol.eps_eq)
        pairs.emplace_back(i, j);
  }
  return Relation(std::move(pairs), inst.nx(), inst.ny());
}

// Membership of a single pair in the subdifferential, given a precomputed
// conjugate.
inline bool in_subdifferential(const ExtendedPotential& f,
                               const ExtendedPotential& conj,
                               const CouplingInstance& inst, std::size_t i,
                               std::size_t j, double eps) {
  if (!f.is_finite_at(i)) return false;
  return std::abs(f[i] + conj[j] - inst.coupling(i, j)) <= eps;
}

}  // namespace otp
