#include "fermat22n/arith.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace fermat22n {

// ---------------------------------------------------------------------------
// Sieve
// ---------------------------------------------------------------------------

namespace {
constexpr int kSieveBound = 1'000'000;

std::vector<int> sieve_primes(int bound) {
    std::vector<bool> comp(bound + 1, false);
    std::vector<int> primes;
    for (int i = 2; i <= bound; ++i) {
        if (!comp[i]) {
            primes.push_back(i);
            for (long long j = (long long)i * i; j <= bound; j += i)
                comp[j] = true;
        }
    }
    return primes;
}
} // namespace

const std::vector<int>& small_primes() {
    static const std::vector<int> primes = sieve_primes(kSieveBound);
    return primes;
}

std::vector<int> primes_below(int bound) {
    if (bound <= kSieveBound + 1) {
        const auto& ps = small_primes();
        auto it = std::lower_bound(ps.begin(), ps.end(), bound);
        return std::vector<int>(ps.begin(), it);
    }
    auto ps = sieve_primes(bound - 1);
    return ps;
}

// ---------------------------------------------------------------------------
// Modular arithmetic and primality (64-bit)
// ---------------------------------------------------------------------------

u64 mulmod_u64(u64 a, u64 b, u64 m) {
    return (u64)((u128)a * b % m);
}

u64 powmod_u64(u64 b, u64 e, u64 m) {
    u64 r = m == 1 ? 0 : 1;
    b %= m;
    while (e) {
        if (e & 1) r = mulmod_u64(r, b, m);
        b = mulmod_u64(b, b, m);
        e >>= 1;
    }
    return r;
}

bool is_prime_u64(u64 n) {
    if (n < 2) return false;
    for (u64 p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull,
                  29ull, 31ull, 37ull}) {
        if (n % p == 0) return n == p;
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) { d >>= 1; ++s; }
    // Deterministic witness set for the full 64-bit range.
    for (u64 a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull,
                  29ull, 31ull, 37ull}) {
        u64 x = powmod_u64(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int i = 1; i < s; ++i) {
            x = mulmod_u64(x, x, n);
            if (x == n - 1) { composite = false; break; }
        }
        if (composite) return false;
    }
    return true;
}

namespace {

u64 gcd_u64(u64 a, u64 b) {
    while (b) { u64 t = a % b; a = b; b = t; }
    return a;
}

// Brent's variant of Pollard rho. Deterministic: fixed sequence of
// polynomial increments.
u64 brent_rho(u64 n) {
    if ((n & 1) == 0) return 2;
    for (u64 c = 1;; ++c) {
        u64 x = 2, y = 2, d = 1;
        u64 q = 1;
        int m = 128;
        u64 ys = y;
        for (u64 r = 1; d == 1; r <<= 1) {
            x = y;
            for (u64 i = 0; i < r; ++i) y = (mulmod_u64(y, y, n) + c) % n;
            for (u64 k = 0; k < r && d == 1; k += m) {
                ys = y;
                u64 lim = std::min<u64>(m, r - k);
                for (u64 i = 0; i < lim; ++i) {
                    y = (mulmod_u64(y, y, n) + c) % n;
                    q = mulmod_u64(q, x > y ? x - y : y - x, n);
                }
                d = gcd_u64(q, n);
            }
        }
        if (d == n) {
            // backtrack
            do {
                ys = (mulmod_u64(ys, ys, n) + c) % n;
                d = gcd_u64(x > ys ? x - ys : ys - x, n);
            } while (d == 1);
        }
        if (d != n) return d;
    }
}

void factor_u64_into(u64 n, std::map<u64, int>& out) {
    if (n == 1) return;
    if (is_prime_u64(n)) { out[n]++; return; }
    u64 d = brent_rho(n);
    factor_u64_into(d, out);
    factor_u64_into(n / d, out);
}

} // namespace

// ---------------------------------------------------------------------------
// factorize
// ---------------------------------------------------------------------------

mpz_class FactoredInt::reassemble() const {
    mpz_class r = sign;
    for (const auto& [p, e] : factors) {
        mpz_class pe;
        mpz_pow_ui(pe.get_mpz_t(), p.get_mpz_t(), e);
        r *= pe;
    }
    return r;
}

Int Factored64::reassemble() const {
    Int r = sign;
    for (const auto& [p, e] : factors)
        for (int i = 0; i < e; ++i) r = checked_mul(r, p);
    return r;
}

FactoredInt factorize(const mpz_class& m) {
    if (m == 0) throw precondition_error("factorize: zero input");
    FactoredInt out;
    mpz_class n = m;
    if (n < 0) { out.sign = -1; n = -n; }

    std::map<u64, int> small;
    for (int p : small_primes()) {
        if (mpz_cmp_ui(n.get_mpz_t(), (unsigned long)p * p) < 0) break;
        while (mpz_divisible_ui_p(n.get_mpz_t(), p)) {
            mpz_divexact_ui(n.get_mpz_t(), n.get_mpz_t(), p);
            small[p]++;
        }
    }
    std::vector<std::pair<mpz_class, int>> big;
    if (n > 1) {
        if (mpz_sizeinbase(n.get_mpz_t(), 2) <= 64) {
            u64 rest = (u64)mpz_get_ui(n.get_mpz_t());
            factor_u64_into(rest, small);
        } else {
            if (mpz_sizeinbase(n.get_mpz_t(), 10) > 40)
                throw resource_error("factorize: input exceeds working range");
            // Large cofactor: rho on mpz with BPSW certification.
            std::vector<mpz_class> stack{n};
            while (!stack.empty()) {
                mpz_class c = stack.back();
                stack.pop_back();
                if (mpz_probab_prime_p(c.get_mpz_t(), 40)) {
                    big.emplace_back(c, 1);
                    continue;
                }
                // rho with Floyd cycle detection
                mpz_class x = 2, y = 2, d = 1, diff;
                unsigned long add = 1;
                long iters = 0;
                while (d == 1) {
                    x = (x * x + add) % c;
                    y = (y * y + add) % c;
                    y = (y * y + add) % c;
                    diff = x - y;
                    mpz_gcd(d.get_mpz_t(), diff.get_mpz_t(), c.get_mpz_t());
                    if (++iters > 50'000'000)
                        throw resource_error("factorize: rho iteration cap");
                    if (d == c) { d = 1; x = 2; y = 2; ++add; }
                }
                stack.push_back(d);
                stack.push_back(c / d);
            }
        }
    }
    for (const auto& [p, e] : small) out.factors.emplace_back(mpz_class((unsigned long)p), e);
    std::sort(big.begin(), big.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [p, e] : big) {
        if (!out.factors.empty() && out.factors.back().first == p)
            out.factors.back().second += e;
        else
            out.factors.emplace_back(p, e);
    }
    return out;
}

Factored64 factorize64(Int m) {
    if (m == 0) throw precondition_error("factorize64: zero input");
    Factored64 out;
    u64 n;
    if (m < 0) { out.sign = -1; n = (u64)(-(m + 1)) + 1; } else { n = (u64)m; }
    std::map<u64, int> fs;
    for (int p : small_primes()) {
        if ((u64)p * p > n) break;
        while (n % p == 0) { n /= p; fs[p]++; }
    }
    if (n > 1) factor_u64_into(n, fs);
    for (const auto& [p, e] : fs) {
        if (p > (u64)std::numeric_limits<Int>::max())
            throw resource_error("factorize64: prime exceeds 64-bit range");
        out.factors.emplace_back((Int)p, e);
    }
    return out;
}

// ---------------------------------------------------------------------------
// squarefree_split
// ---------------------------------------------------------------------------

SquarefreeSplit squarefree_split(Int B) {
    if (B == 0) throw precondition_error("squarefree_split: zero input");
    auto fac = factorize64(B);
    SquarefreeSplit s;
    s.f = 1;
    s.B0 = fac.sign;
    for (const auto& [p, e] : fac.factors) {
        for (int i = 0; i < e / 2; ++i) s.f = checked_mul(s.f, p);
        if (e % 2) s.B0 = checked_mul(s.B0, p);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Kronecker symbol
// ---------------------------------------------------------------------------

int kronecker(const mpz_class& a, const mpz_class& m) {
    if (m == 0) throw precondition_error("kronecker: zero modulus");
    return mpz_kronecker(a.get_mpz_t(), m.get_mpz_t());
}

int kronecker64(Int a, Int m) {
    if (m == 0) throw precondition_error("kronecker64: zero modulus");
    int result = 1;
    if (m < 0) {
        m = -m;
        if (a < 0) result = -result;  // (a/-1) = sign(a)
    }
    if (m == 1) return result;
    int v2 = 0;
    while ((m & 1) == 0) { m >>= 1; ++v2; }
    if (v2) {
        if ((a & 1) == 0) return 0;
        // (a/2) = (-1)^((a^2-1)/8)
        Int am8 = mod_floor(a, 8);
        if (v2 & 1 && (am8 == 3 || am8 == 5)) result = -result;
    }
    // Jacobi(a, m) for the odd part m > 0; reducing a mod m first is valid
    // there, negative a included.
    u64 um = (u64)m;
    u64 ua = (u64)mod_floor(a, m);
    while (ua != 0) {
        int t = 0;
        while ((ua & 1) == 0) { ua >>= 1; ++t; }
        if (t & 1) {
            u64 r = um & 7;
            if (r == 3 || r == 5) result = -result;
        }
        if ((ua & 3) == 3 && (um & 3) == 3) result = -result;
        u64 tmp = ua; ua = um % tmp; um = tmp;
    }
    if (um != 1) return 0;
    return result;
}

// ---------------------------------------------------------------------------
// Instance / genus
// ---------------------------------------------------------------------------

Instance::Instance(Int B_, Int C_, int n_) : B(B_), C(C_), n(n_) {
    if (B == 0) throw precondition_error("instance: B must be nonzero");
    if (C == 0) throw precondition_error("instance: C must be nonzero");
    if (n < 3 || n % 2 == 0)
        throw precondition_error("instance: n must be odd and >= 3");
}

Rational genus_info(int n) {
    if (n < 3 || n % 2 == 0)
        throw precondition_error("genus_info: n must be odd and >= 3");
    return Rational{n - 1, n};
}

// ---------------------------------------------------------------------------
// Utilities
// ---------------------------------------------------------------------------

int valuation(Int m, Int p) {
    if (m == 0) throw precondition_error("valuation: zero input");
    if (p < 2) throw precondition_error("valuation: p must be >= 2");
    int v = 0;
    while (m % p == 0) { m /= p; ++v; }
    return v;
}

int valuation(const mpz_class& m, const mpz_class& p) {
    if (m == 0) throw precondition_error("valuation: zero input");
    mpz_class q, r = m;
    int v = 0;
    while (mpz_divisible_p(r.get_mpz_t(), p.get_mpz_t())) {
        mpz_divexact(r.get_mpz_t(), r.get_mpz_t(), p.get_mpz_t());
        ++v;
    }
    return v;
}

Int mod_floor(Int a, Int m) {
    Int r = a % m;
    return r < 0 ? r + m : r;
}

u64 isqrt_u64(u64 n) {
    if (n == 0) return 0;
    constexpr u64 kMaxRoot = 4294967295ull;
    u64 r = (u64)std::sqrt((double)n);
    if (r > kMaxRoot) r = kMaxRoot;
    while (r > 0 && r * r > n) --r;
    while (r < kMaxRoot && (r + 1) * (r + 1) <= n) ++r;
    return r;
}

u128 isqrt_u128(u128 n) {
    if (n == 0) return 0;
    if (n <= (u128)std::numeric_limits<u64>::max()) return isqrt_u64((u64)n);
    int bits = 0;
    for (u128 t = n; t; t >>= 1) ++bits;
    u128 r = (u128)1 << (bits / 2 + 1);  // starts above the true root
    while (true) {
        u128 next = (r + n / r) >> 1;
        if (next >= r) break;
        r = next;
    }
    while (r * r > n) --r;
    constexpr u128 kMaxRoot128 = ~(u64)0;
    while (r < kMaxRoot128 && (r + 1) * (r + 1) <= n) ++r;
    return r;
}

bool is_square(Int n) {
    if (n < 0) return false;
    u64 r = isqrt_u64((u64)n);
    return (Int)(r * r) == n;
}

bool is_square_u128(u128 n, u128* root) {
    // quick residue filters mod 64, 63, 65
    static const auto mk = [](int m) {
        std::vector<bool> t(m, false);
        for (int i = 0; i < m; ++i) t[(i * i) % m] = true;
        return t;
    };
    static const std::vector<bool> q64 = mk(64), q63 = mk(63), q65 = mk(65);
    if (!q64[(int)(n & 63)]) return false;
    if (!q63[(int)(n % 63)]) return false;
    if (!q65[(int)(n % 65)]) return false;
    u128 r = isqrt_u128(n);
    if (r * r != n) return false;
    if (root) *root = r;
    return true;
}

Int checked_mul(Int a, Int b) {
    Int r;
    if (__builtin_mul_overflow(a, b, &r))
        throw resource_error("integer overflow in checked_mul");
    return r;
}

Int checked_pow(Int base, int exp) {
    Int r = 1;
    for (int i = 0; i < exp; ++i) r = checked_mul(r, base);
    return r;
}

} // namespace fermat22n
