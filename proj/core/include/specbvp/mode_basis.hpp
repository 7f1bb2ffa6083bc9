#pragma once
// Mode bookkeeping for the two model boundaries: a single point (one mode)
// and the circle S^1 with Fourier basis e^{ik theta}, k = -K..K, fiber C^N.

#include <stdexcept>

namespace specbvp {

enum class Geometry { Point, Circle };

struct ModeBasis {
  Geometry geometry = Geometry::Point;
  int fiber_dim = 1;   // N
  int cutoff = 0;      // K; ignored for Point

  int k_min() const { return geometry == Geometry::Point ? 0 : -cutoff; }
  int k_max() const { return geometry == Geometry::Point ? 0 : cutoff; }
  int n_modes() const { return k_max() - k_min() + 1; }
  int index_of(int k) const {
    if (k < k_min() || k > k_max())
      throw std::out_of_range("mode index outside basis range");
    return k - k_min();
  }
  bool operator==(const ModeBasis& o) const {
    return geometry == o.geometry && fiber_dim == o.fiber_dim && cutoff == o.cutoff;
  }
};

}  // namespace specbvp
