#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "fermat22n/errors.hpp"

namespace fermat22n {

// Domain integers are 64-bit with checked 128-bit intermediates; the
// factorization entry points accept arbitrary precision (GMP) values.
using Int = long long;
using i128 = __int128;
using u128 = unsigned __int128;
using u64 = unsigned long long;

// ---------------------------------------------------------------------------
// Exact prime factorization
// ---------------------------------------------------------------------------

struct FactoredInt {
    int sign = 1;                                    // +1 or -1
    std::vector<std::pair<mpz_class, int>> factors;  // primes strictly increasing

    mpz_class reassemble() const;
};

struct Factored64 {
    int sign = 1;
    std::vector<std::pair<Int, int>> factors;

    Int reassemble() const;
};

// Exact factorization of a nonzero integer. Trial division below 10^6, then
// Brent's rho with deterministic Miller-Rabin certification on 64-bit
// cofactors (probabilistic BPSW certification beyond that range).
FactoredInt factorize(const mpz_class& m);
Factored64 factorize64(Int m);

bool is_prime_u64(u64 n);

// ---------------------------------------------------------------------------
// Squarefree splitting: B = f^2 * B0 with B0 squarefree
// ---------------------------------------------------------------------------

struct SquarefreeSplit {
    Int f = 1;   // positive
    Int B0 = 1;  // squarefree, carries the sign of B
};

SquarefreeSplit squarefree_split(Int B);

// ---------------------------------------------------------------------------
// Kronecker symbol
// ---------------------------------------------------------------------------

int kronecker(const mpz_class& a, const mpz_class& m);
int kronecker64(Int a, Int m);

// ---------------------------------------------------------------------------
// An instance of x^2 + B y^2 = C z^n
// ---------------------------------------------------------------------------

struct Instance {
    Int B = 0;
    Int C = 0;
    int n = 3;

    Instance() = default;
    Instance(Int B_, Int C_, int n_);
};

// Exact rational, small enough to live outside GMP.
struct Rational {
    Int num = 0;
    Int den = 1;
};

// Genus of the ambient curve for odd n >= 3: (n-1)/n.
Rational genus_info(int n);

// ---------------------------------------------------------------------------
// Small utilities shared across modules
// ---------------------------------------------------------------------------

// mpz_class has no long long constructor; bridge explicitly.
inline mpz_class to_mpz(Int v) {
    bool neg = v < 0;
    u64 mag = neg ? (u64)(-(v + 1)) + 1 : (u64)v;
    mpz_class r;
    mpz_set_ui(r.get_mpz_t(), (unsigned long)mag);
    if (neg) mpz_neg(r.get_mpz_t(), r.get_mpz_t());
    return r;
}

inline Int mpz_to_int(const mpz_class& v) {
    if (!v.fits_slong_p())
        throw resource_error("value exceeds 64-bit working range");
    return (Int)v.get_si();
}

// p-adic valuation; m != 0.
int valuation(Int m, Int p);
int valuation(const mpz_class& m, const mpz_class& p);

// Nonnegative residue of a mod m (m > 0).
Int mod_floor(Int a, Int m);

// Exact integer square root of a nonnegative value.
u64 isqrt_u64(u64 n);
u128 isqrt_u128(u128 n);
bool is_square(Int n);        // n >= 0 test included
bool is_square_u128(u128 n, u128* root = nullptr);

// Overflow-checked arithmetic; throws resource_error on overflow.
Int checked_mul(Int a, Int b);
Int checked_pow(Int base, int exp);

u64 mulmod_u64(u64 a, u64 b, u64 m);
u64 powmod_u64(u64 b, u64 e, u64 m);

// Primes up to 10^6, shared sieve.
const std::vector<int>& small_primes();

// Primes below bound (sieved on demand; bound may exceed 10^6).
std::vector<int> primes_below(int bound);

} // namespace fermat22n
