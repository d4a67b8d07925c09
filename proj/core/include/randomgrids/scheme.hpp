#pragma once

#include "randomgrids/rational.hpp"
#include "randomgrids/tree.hpp"

namespace rgrids {

// Parameters of the one-step scheme family driving the correction hierarchy:
// alpha is the weak-error exponent of one corrected step (error O(h^{1+alpha})),
// beta the derivative loss per application. Euler: (1,4); Ninomiya-Victoir:
// (2,6); the jump-process scheme: (1,2). beta feeds the smoothness diagnostic
// only.
struct SchemeOrderParams {
  Rational alpha{1, 1};
  int beta = 4;
};

// Number of correction slots at refinement level l for a target order nu:
//   m(l, nu) = ceil( nu / ((1+alpha) l + alpha) ).
// A node at level l carries m(l, nu) - 1 sons.
int branching_budget(int level, int nu, const Rational& alpha);

// Order passed to the i-th son (1-based), living at level l+1:
//   q_i(l, nu) = nu + ceil( i - (1+alpha)(l+1)(i-1) ).
// q_1 = nu + 1 and the sequence is nonincreasing in i.
int child_order(int i, int level, int nu, const Rational& alpha);

// The recursively built order-nu tree rooted at refinement level `level`.
// Sons i = 1 .. m(l,nu)-1 are the trees for orders q_i(l,nu) one level down;
// nodes where m = 1 are leaves.
Tree scheme_tree(int nu, int level, const Rational& alpha);

// How many payoff derivatives the order-nu approximation consumes, following
// the recursion k(l,nu) = max(beta*m(l,nu), max_i i*k(l+1, q_i(l,nu))).
// Diagnostic: lets a caller check the payoff is smooth enough before trusting
// the asymptotic order.
int smoothness_requirement(int nu, const SchemeOrderParams& params);

}  // namespace rgrids
