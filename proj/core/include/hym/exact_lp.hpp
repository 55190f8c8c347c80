#pragma once
// Dense two-phase simplex over the rationals. Small problems only (tens of
// rows/columns); Bland's rule, so it always terminates.

#include <gmpxx.h>
#include <vector>

namespace hym::lp {

using Q = mpq_class;

enum class Status { Optimal, Infeasible, Unbounded };

struct Result {
  Status status = Status::Infeasible;
  std::vector<Q> x;
  Q value;
};

// minimize c.x  subject to  A x = b,  x >= 0
Result minimize_standard(const std::vector<std::vector<Q>>& A,
                         const std::vector<Q>& b, const std::vector<Q>& c);

// Convenience builder with free variables and inequality rows.
class Problem {
 public:
  // returns the index of a new variable
  int add_var(bool nonneg = true, Q upper = Q(-1), bool has_upper = false);
  void add_le(const std::vector<std::pair<int, Q>>& row, Q rhs);
  void add_ge(const std::vector<std::pair<int, Q>>& row, Q rhs);
  void add_eq(const std::vector<std::pair<int, Q>>& row, Q rhs);
  Result minimize(const std::vector<std::pair<int, Q>>& obj) const;
  Result maximize(const std::vector<std::pair<int, Q>>& obj) const;
  int num_vars() const { return static_cast<int>(vars_.size()); }

 private:
  struct Var {
    bool nonneg;
    bool has_upper;
    Q upper;
  };
  struct Row {
    std::vector<std::pair<int, Q>> coef;
    int sense;  // -1: <=, 0: =, +1: >=
    Q rhs;
  };
  std::vector<Var> vars_;
  std::vector<Row> rows_;
};

}  // namespace hym::lp
