#pragma once

#include <vector>

#include "fermat22n/arith.hpp"

namespace fermat22n {

// Valuation-annulus conditions on u = x + f sqrt(-B0) y at a prime.
struct StarCondition {
    enum Kind { Star, TildeStar };
    Int p = 2;
    Kind kind = Star;
    int t = 0;

    friend bool operator==(const StarCondition&, const StarCondition&) = default;
};

// sup { r <= cap : u lies in p^r O_K } for u = x + f sqrt(-B0) y.
int u_level(Int x, Int y, Int f, Int B0, Int p, int cap = 62);

// Does the witness satisfy the condition (star: p^t exactly divides u;
// tildestar: 2^{t+1} exactly divides u and 2^t exactly divides x)?
bool satisfies_star(Int x, Int y, Int f, Int B0, const StarCondition& sc);

// u outside p O_K for every prime p (the full *^0 condition), and the
// variant with the dyadic annulus refinement at 2.
bool star0_everywhere(Int x, Int y, Int f, Int B0);
bool tilde0_everywhere(Int x, Int y, Int f, Int B0);

struct SearchBound {
    Int z_max = 200;
    Int y_max = 100'000;
    std::vector<StarCondition> conditions;
    std::vector<Int> y_coprime;
    std::vector<Int> z_coprime;
};

struct Solution {
    Int x = 0, y = 0, z = 0;
    friend bool operator==(const Solution&, const Solution&) = default;
};

// All primitive solutions with |z| <= z_max and |y| <= y_max passing the
// bound's filters, in deterministic order (z asc, y asc, x >= 0 then sign).
std::vector<Solution> search_primitive(const Instance& inst,
                                       const SearchBound& bound);

// Exact verification of x^2 + B y^2 = C z^n with gcd(x,y,z) = 1.
bool verify_solution(const Instance& inst, Int x, Int y, Int z);

enum class LiftResult { Certified, Empty, Inconclusive };
const char* lift_result_name(LiftResult r);

// Exhaustive Z_p-solubility by breadth-first lifting with Hensel
// certification, quotiented by the weighted unit action. Returns
// Inconclusive only when `depth` is too small to settle every branch.
LiftResult local_solvable_exhaustive(const Instance& inst, Int p, int depth);

// 2 (v_p(B) + v_p(C)) + 4n + 8: dominates every valuation comparison the
// criterion's clauses can produce.
int default_lift_depth(const Instance& inst, Int p);

} // namespace fermat22n
