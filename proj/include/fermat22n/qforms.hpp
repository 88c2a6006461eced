#pragma once

#include <map>
#include <memory>
#include <vector>

#include <gmpxx.h>

#include "fermat22n/arith.hpp"

namespace fermat22n {

// Discriminant of a quadratic order: D != 0, D = 0 or 1 mod 4, not a square.
struct Discriminant {
    Int D;
    explicit Discriminant(Int d);
};

void validate_discriminant(Int D);

// Primitive integral binary quadratic form a x^2 + b xy + c y^2.
// For D < 0 all forms handled here are positive definite (a > 0).
struct QForm {
    Int a = 1, b = 0, c = 0;
    friend bool operator==(const QForm&, const QForm&) = default;
    friend auto operator<=>(const QForm&, const QForm&) = default;
};

Int form_disc(const QForm& f);
bool form_primitive(const QForm& f);
QForm principal_form(Int D);
QForm form_inverse(const QForm& f);

bool is_reduced(const QForm& f, Int D);
// Gauss reduction. D < 0: unique reduced representative. D > 0: some
// element of the form's cycle of reduced forms.
QForm reduce(QForm f, Int D);
// The canonical class representative: the reduced form itself (D < 0) or
// the lexicographically least element of the cycle (D > 0).
QForm canonicalize(const QForm& f, Int D);
// rho step and full cycle for indefinite reduced forms.
QForm rho_step(const QForm& f, Int D);
std::vector<QForm> form_cycle(const QForm& reduced, Int D);

// Gauss composition; result is canonical. Matches ideal-class
// multiplication under the form-ideal dictionary.
QForm compose(const QForm& x, const QForm& y, Int D);
QForm form_pow(const QForm& f, long e, Int D);

enum class SplittingType { Split, Inert, Ramified };
SplittingType splitting(Int D, Int p);
const char* splitting_name(SplittingType s);

// A form (p, b, .) whose class sits above p. Refuses inert p and p dividing
// the conductor of the order.
QForm prime_form(Int D, Int p);

// Conductor of the order of discriminant D inside the maximal order.
Int conductor_of_disc(Int D);
Int fundamental_disc(Int D);

class ClassGroup {
public:
    Int discriminant = 0;
    std::vector<Int> elementary_divisors;  // d1 | d2 | ... (empty: trivial)
    std::vector<QForm> generators;         // one per divisor, orders verified
    std::vector<QForm> reduced_forms;      // all reduced primitive forms, sorted
    std::vector<QForm> class_reps;         // canonical representatives, sorted

    Int order() const;  // class number h = prod d_i

    // Exponent vector of the class of f over `generators`, componentwise
    // modulo the elementary divisors.
    std::vector<Int> dlog(const QForm& f) const;

    QForm principal() const { return principal_rep_; }

    QForm canonical(const QForm& f) const;  // table-backed canonicalization

private:
    friend ClassGroup build_class_group(Int D);
    std::map<QForm, std::vector<Int>> dlog_;
    std::map<QForm, QForm> cycle_rep_;      // reduced form -> canonical (D > 0)
    QForm principal_rep_;
};

// Builds (no cache); prefer class_group().
ClassGroup build_class_group(Int D);

// Cached, thread-safe accessor. |D| is capped (default 10^8, override with
// FERMAT22N_MAX_DISC); exceeding the cap raises resource_error.
std::shared_ptr<const ClassGroup> class_group(Int D);

// Membership of the class of `form` in n*Cl.
bool is_nth_power_class(const QForm& form, int n, const ClassGroup& G);
// Same for an exponent vector (componentwise: gcd(n, d_i) | v_i).
bool is_nth_power_vector(const std::vector<Int>& v, int n,
                         const std::vector<Int>& divisors);

// ---------------------------------------------------------------------------
// Quadratic orders attached to an instance
// ---------------------------------------------------------------------------

struct QuadOrder {
    Int B0 = 0;         // squarefree, != -1
    Int f = 1;          // positive
    bool half_basis = false;  // ring Z[f(1+sqrt(-B0))/2] instead of Z[f sqrt(-B0)]
    Int disc = 0;
    int case_id = 0;    // 1: B0=1,2 mod 4; 2: B0=3 mod 8, C odd;
                        // 3: B0=3 mod 8, C even; 4: B0=7 mod 8
};

QuadOrder order_for(Int B0, Int f, Int C);

// Fundamental automorphism of the order of discriminant D > 0: the minimal
// (t, u), u > 0, with t^2 - D u^2 = 4, read off one trip around the
// principal cycle.
std::pair<mpz_class, mpz_class> principal_automorph(Int D);

// Verifies the relative class number formula between the orders of
// conductor cond1 and cond2 (cond1 | cond2) inside the field of fundamental
// discriminant K_disc.
bool class_number_ratio_check(Int K_disc, Int cond1, Int cond2);

// [O^x : O'^x] for the orders of conductor cond and cond*rel in the field
// of discriminant K_disc (totally positive units in the real case).
Int unit_index(Int K_disc, Int cond, Int rel);

} // namespace fermat22n
