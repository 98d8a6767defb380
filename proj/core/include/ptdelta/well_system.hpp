#pragma once

#include <complex>
#include <vector>

#include "ptdelta/errors.hpp"

namespace ptdelta {

/// A point potential of complex strength: strength * delta(x - position).
struct DeltaSpike {
  double position;
  std::complex<double> strength;
};

/// Parameter set of the double-delta trap,
///   V(x) = (V + i*Gamma) delta(x-a) + (V - i*Gamma) delta(x+a),
/// i.e. a particle source in the right well and a drain in the left one.
struct WellSystem {
  double half_separation = 1.1;   ///< a
  double well_strength = -1.0;    ///< V (attractive for V < 0)
  double non_hermiticity = 0.1;   ///< Gamma
  double nonlinearity = 1.0;      ///< g (attractive interaction for g > 0)

  void validate() const {
    if (!(half_separation > 0.0)) {
      throw DomainError("well system: half separation must be positive");
    }
  }

  /// The two spikes, ordered left to right.
  std::vector<DeltaSpike> delta_spikes() const {
    validate();
    const std::complex<double> i(0.0, 1.0);
    return {{-half_separation, well_strength - i * non_hermiticity},
            {+half_separation, well_strength + i * non_hermiticity}};
  }

  /// Same trap with the spike positions moved to the nearest grid bins.
  /// Used by the propagation pipeline so that the solved state and the
  /// binned delta potential agree on where the kinks sit.
  template <typename GridT>
  WellSystem snapped_to(const GridT& grid) const {
    WellSystem s = *this;
    s.half_separation = grid.x(grid.nearest_bin(half_separation));
    return s;
  }
};

}  // namespace ptdelta
