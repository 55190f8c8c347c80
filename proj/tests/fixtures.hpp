#pragma once

#include "hym/lattice.hpp"

namespace fx {

inline hym::BundleSpec line(int m1, int m2) {
  hym::BundleSpec b;
  b.r = 1;
  b.flux = {{m1, m2}};
  return b;
}

inline hym::BundleSpec t4x() {
  hym::BundleSpec b;
  b.r = 2;
  b.flux = {{1, -1}, {-1, 1}};
  b.ext = {{false, true}, {false, false}};
  return b;
}

inline hym::BundleSpec flat(int r) {
  hym::BundleSpec b;
  b.r = r;
  b.flux.assign(r, {0, 0});
  return b;
}

}  // namespace fx
