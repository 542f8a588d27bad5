#pragma once

#include <gmpxx.h>

#include <utility>
#include <vector>

#include "fairmed/errors.hpp"

namespace fairmed::lp {

using Rat = mpq_class;

inline Rat make_rat(long long num, long long den = 1) {
  Rat r(mpz_class(static_cast<long>(num)), mpz_class(static_cast<long>(den)));
  r.canonicalize();
  return r;
}

struct LpSolution {
  bool feasible = false;
  std::vector<Rat> x;
  Rat value = 0;
};

namespace detail {

struct Tableau {
  int rows = 0;
  int cols = 0;  // variable columns; rhs is stored separately
  std::vector<std::vector<Rat>> a;
  std::vector<Rat> rhs;
  std::vector<Rat> cost;  // reduced cost row
  Rat objective = 0;      // objective value of the current basis
  std::vector<int> basis;

  void pivot(int r, int col) {
    Rat piv = a[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)];
    auto& prow = a[static_cast<std::size_t>(r)];
    for (auto& v : prow) v /= piv;
    rhs[static_cast<std::size_t>(r)] /= piv;
    for (int i = 0; i < rows; ++i) {
      if (i == r) continue;
      Rat f = a[static_cast<std::size_t>(i)][static_cast<std::size_t>(col)];
      if (f == 0) continue;
      auto& irow = a[static_cast<std::size_t>(i)];
      for (int j = 0; j < cols; ++j) irow[static_cast<std::size_t>(j)] -= f * prow[static_cast<std::size_t>(j)];
      rhs[static_cast<std::size_t>(i)] -= f * rhs[static_cast<std::size_t>(r)];
    }
    Rat f = cost[static_cast<std::size_t>(col)];
    if (f != 0) {
      for (int j = 0; j < cols; ++j) cost[static_cast<std::size_t>(j)] -= f * prow[static_cast<std::size_t>(j)];
      objective += f * rhs[static_cast<std::size_t>(r)];
    }
    basis[static_cast<std::size_t>(r)] = col;
  }

  // One Bland step; false when optimal.
  bool step() {
    int col = -1;
    for (int j = 0; j < cols; ++j)
      if (cost[static_cast<std::size_t>(j)] < 0) {
        col = j;
        break;
      }
    if (col < 0) return false;
    int leave = -1;
    Rat best;
    for (int r = 0; r < rows; ++r) {
      const Rat& arc = a[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)];
      if (arc <= 0) continue;
      Rat ratio = rhs[static_cast<std::size_t>(r)] / arc;
      if (leave < 0 || ratio < best ||
          (ratio == best && basis[static_cast<std::size_t>(r)] <
                                basis[static_cast<std::size_t>(leave)])) {
        leave = r;
        best = ratio;
      }
    }
    if (leave < 0) throw InternalError("LP is unbounded");
    pivot(leave, col);
    return true;
  }

  void install_cost(const std::vector<Rat>& c) {
    cost.assign(static_cast<std::size_t>(cols), 0);
    for (int j = 0; j < cols && j < static_cast<int>(c.size()); ++j)
      cost[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j)];
    objective = 0;
    for (int r = 0; r < rows; ++r) {
      Rat f = cost[static_cast<std::size_t>(basis[static_cast<std::size_t>(r)])];
      if (f == 0) continue;
      const auto& prow = a[static_cast<std::size_t>(r)];
      for (int j = 0; j < cols; ++j) cost[static_cast<std::size_t>(j)] -= f * prow[static_cast<std::size_t>(j)];
      objective += f * rhs[static_cast<std::size_t>(r)];
    }
  }
};

}  // namespace detail

// min c.x  subject to  A x = b, x >= 0, solved exactly with two-phase
// simplex under Bland's rule (no cycling). Sized for small dense systems.
inline LpSolution solve_equality_lp(std::vector<std::vector<Rat>> A,
                                    std::vector<Rat> b,
                                    const std::vector<Rat>& c) {
  const int m = static_cast<int>(A.size());
  const int n = m ? static_cast<int>(A[0].size()) : static_cast<int>(c.size());
  for (int i = 0; i < m; ++i) {
    if (static_cast<int>(A[static_cast<std::size_t>(i)].size()) != n)
      throw StructuralError("LP row length mismatch");
    if (b[static_cast<std::size_t>(i)] < 0) {
      for (auto& v : A[static_cast<std::size_t>(i)]) v = -v;
      b[static_cast<std::size_t>(i)] = -b[static_cast<std::size_t>(i)];
    }
  }

  detail::Tableau t;
  t.rows = m;
  t.cols = n + m;  // artificials appended
  t.a.assign(static_cast<std::size_t>(m),
             std::vector<Rat>(static_cast<std::size_t>(t.cols), 0));
  t.rhs = b;
  t.basis.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j)
      t.a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          A[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    t.a[static_cast<std::size_t>(i)][static_cast<std::size_t>(n + i)] = 1;
    t.basis[static_cast<std::size_t>(i)] = n + i;
  }

  std::vector<Rat> phase1(static_cast<std::size_t>(t.cols), 0);
  for (int i = 0; i < m; ++i) phase1[static_cast<std::size_t>(n + i)] = 1;
  t.install_cost(phase1);
  while (t.step()) {
  }
  LpSolution sol;
  if (t.objective != 0) return sol;  // infeasible

  // Drive leftover artificials out of the basis; rows that cannot pivot are
  // redundant and get dropped.
  for (int r = t.rows - 1; r >= 0; --r) {
    if (t.basis[static_cast<std::size_t>(r)] < n) continue;
    int col = -1;
    for (int j = 0; j < n; ++j)
      if (t.a[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] != 0) {
        col = j;
        break;
      }
    if (col >= 0) {
      t.pivot(r, col);
      continue;
    }
    t.a.erase(t.a.begin() + r);
    t.rhs.erase(t.rhs.begin() + r);
    t.basis.erase(t.basis.begin() + r);
    --t.rows;
  }
  // Forbid artificials from re-entering.
  for (auto& row : t.a) row.resize(static_cast<std::size_t>(n));
  t.cols = n;

  t.install_cost(c);
  while (t.step()) {
  }

  sol.feasible = true;
  sol.x.assign(static_cast<std::size_t>(n), 0);
  for (int r = 0; r < t.rows; ++r)
    sol.x[static_cast<std::size_t>(t.basis[static_cast<std::size_t>(r)])] =
        t.rhs[static_cast<std::size_t>(r)];
  sol.value = t.objective;
  return sol;
}

}  // namespace fairmed::lp
