#pragma once

#include <optional>
#include <string>

#include <gmpxx.h>

#include "fermat22n/arith.hpp"

namespace fermat22n {

// Which clause of the solubility criterion was dispositive at p.
enum class LocalCase { EvenEll, KLarge, I, II, III, IV, V };

const char* local_case_name(LocalCase c);

struct LocalVerdict {
    Int p = 0;
    int k = 0;    // v_p(B)
    int ell = 0;  // v_p(C)
    bool solvable = true;
    LocalCase case_label = LocalCase::EvenEll;
};

// Decision core over the derived data (k, ell, B' mod 8, (-B'/p)); shared by
// the per-prime verdicts and the sweep fast path.
LocalVerdict local_case_eval(Int p, int k, int ell, int n, int Bp_mod8,
                             int kron_neg_Bp);

// Z_p-solubility of x^2 + B y^2 = C z^n at one prime.
LocalVerdict local_solvable_at(const Instance& inst, Int p);

// True iff the instance is soluble over Z_p for every prime p. Only primes
// with odd v_p(C) can obstruct, so those are the only ones tested. On
// failure the first failing verdict (smallest p) is returned.
std::pair<bool, std::optional<LocalVerdict>>
everywhere_locally_solvable(const Instance& inst);

// Haar density of {(B,C) in Z_p^2 : soluble at p} for odd p, exact.
// Computed by geometric-series summation over (k, ell) classes; the closed
// form evaluation is exposed separately so the two can be compared.
mpq_class local_density_factor(Int p, int n);
mpq_class local_density_closed_form(Int p, int n);

// Density at p = 2 by summation over (k, ell, B' mod 8) classes.
mpq_class density_factor_2(int n);
// Same sum truncated at ell <= depth and k <= depth (for convergence tests).
mpq_class density_factor_2_truncated(int n, int depth);

} // namespace fermat22n
