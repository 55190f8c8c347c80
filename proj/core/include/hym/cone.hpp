#pragma once
// Exact slope-stability cones over a polytope of metric classes.

#include <gmpxx.h>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hym::cone {

using Q = mpq_class;
using QVec = std::vector<Q>;

struct StructuralError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

Q parse_rational(const std::string& s);
std::string to_string(const Q& q);

struct ThetaClass {
  QVec coords;
};

struct SlopeDatum {
  QVec c1;
  int rank = 1;
};

struct WallFunctional {
  QVec coeffs;
  SlopeDatum source;
  std::size_t source_index = 0;  // index into the candidate list
  bool zero = false;
};

struct Region {
  std::vector<ThetaClass> vertices;
  std::size_t dim() const;  // ambient dimension
};

struct StabilityCone {
  SlopeDatum total;
  std::vector<WallFunctional> walls;
  Region region;
  bool empty_stable = false;  // some wall is identically zero
};

struct Face {
  std::vector<std::size_t> active;
  int dim = 0;
  bool operator==(const Face&) const = default;
};

enum class VerdictKind { Stable, Semistable, Unstable };

struct Verdict {
  VerdictKind kind = VerdictKind::Stable;
  std::vector<std::size_t> walls;  // active (Semistable) or violated (Unstable)
  bool operator==(const Verdict&) const = default;
};

const char* verdict_name(VerdictKind k);

Q dot(const QVec& a, const QVec& b);

Q slope(const SlopeDatum& s, const ThetaClass& th);
WallFunctional wall_functional(const SlopeDatum& sub, const SlopeDatum& total);
Q evaluate(const WallFunctional& w, const ThetaClass& th);

// a = min over K of max over D of slope
Q min_max_slope(const std::vector<SlopeDatum>& D, const Region& K);
std::vector<std::size_t> finite_reduction(const std::vector<SlopeDatum>& D,
                                          const Region& K);

StabilityCone build_cones(const SlopeDatum& total,
                          const std::vector<SlopeDatum>& D, const Region& K);

bool in_region(const ThetaClass& th, const Region& K);
// membership in the cone R_{>0} * K
bool in_region_cone(const ThetaClass& th, const Region& K);

Verdict classify(const ThetaClass& th, const StabilityCone& cone);
Face face_of(const ThetaClass& th, const StabilityCone& cone);
bool graded_refines(const Face& f1, const Face& f2);

// all faces of {walls >= 0} intersected with K that carry a relative
// interior point with exactly the listed active walls
std::vector<Face> face_lattice(const StabilityCone& cone, std::size_t max_walls = 12);

// exact rank of a rational matrix (rows)
std::size_t rank(std::vector<QVec> rows);

}  // namespace hym::cone
