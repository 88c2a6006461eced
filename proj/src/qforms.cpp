#include "fermat22n/qforms.hpp"

#include <algorithm>
#include <cstdlib>
#include <mutex>
#include <numeric>
#include <set>

namespace fermat22n {

// ---------------------------------------------------------------------------
// Discriminants
// ---------------------------------------------------------------------------

void validate_discriminant(Int D) {
    if (D == 0) throw precondition_error("discriminant: zero");
    Int r = mod_floor(D, 4);
    if (r != 0 && r != 1)
        throw precondition_error("discriminant: not 0 or 1 mod 4");
    if (D > 0 && is_square(D))
        throw precondition_error("discriminant: perfect square");
}

Discriminant::Discriminant(Int d) : D(d) { validate_discriminant(d); }

Int form_disc(const QForm& f) {
    i128 d = (i128)f.b * f.b - (i128)4 * f.a * f.c;
    if (d > (i128)std::numeric_limits<Int>::max() ||
        d < (i128)std::numeric_limits<Int>::min())
        throw resource_error("form discriminant exceeds 64-bit range");
    return (Int)d;
}

bool form_primitive(const QForm& f) {
    return std::gcd(std::gcd(std::abs(f.a), std::abs(f.b)), std::abs(f.c)) == 1;
}

QForm principal_form(Int D) {
    validate_discriminant(D);
    if (mod_floor(D, 2) == 0) return {1, 0, -D / 4};
    return {1, 1, (1 - D) / 4};
}

QForm form_inverse(const QForm& f) { return {f.a, -f.b, f.c}; }

// ---------------------------------------------------------------------------
// Reduction
// ---------------------------------------------------------------------------

bool is_reduced(const QForm& f, Int D) {
    if (D < 0) {
        if (f.a <= 0) return false;
        Int ab = std::abs(f.b);
        if (!(ab <= f.a && f.a <= f.c)) return false;
        if ((ab == f.a || f.a == f.c) && f.b < 0) return false;
        return true;
    }
    Int s = (Int)isqrt_u64((u64)D);
    Int aa2 = 2 * std::abs(f.a);
    return f.b > 0 && f.b <= s && f.b >= s + 1 - aa2 && f.b >= aa2 - s;
}

namespace {

template <class T>
T tmod_floor(const T& a, const T& m) {
    T r = a % m;
    if (r < 0) r += m;
    return r;
}

// One reduction step for indefinite forms (also normalizes |c| > sqrt(D)).
template <class T>
void rho_indef(T& a, T& b, T& c, const T& D, const T& s) {
    T ac = c < 0 ? -c : c;
    T bp;
    if (ac > s) {
        bp = tmod_floor(T(-b), T(2 * ac));
        if (bp > ac) bp -= 2 * ac;
    } else {
        bp = s - tmod_floor(T(s + b), T(2 * ac));
    }
    T cp = (bp * bp - D) / (4 * c);
    a = c;
    b = bp;
    c = cp;
}

template <class T>
void reduce_t(T& a, T& b, T& c, const T& D) {
    if (D < 0) {
        if (a < 0) throw precondition_error("reduce: negative definite form");
        while (true) {
            T r = tmod_floor(T(b + a), T(2 * a)) - a;  // in (-a, a]
            c = c - (b - r) / (2 * a) * ((b + r) / 2);
            b = r;
            if (a > c) {
                std::swap(a, c);
                b = -b;
                continue;
            }
            break;
        }
        if (b < 0 && (-b == a || a == c)) b = -b;
        return;
    }
    T s;
    {
        mpz_class sd;  // exact floor sqrt works for both Int and mpz paths
        mpz_class Dz;
        if constexpr (std::is_same_v<T, mpz_class>) Dz = D;
        else Dz = to_mpz(D);
        mpz_sqrt(sd.get_mpz_t(), Dz.get_mpz_t());
        if constexpr (std::is_same_v<T, mpz_class>) s = sd;
        else s = mpz_to_int(sd);
    }
    int guard = 0;
    while (true) {
        // reduced test inline
        T aa2 = 2 * (a < 0 ? -a : a);
        if (b > 0 && b <= s && b >= s + 1 - aa2 && b >= aa2 - s) break;
        rho_indef(a, b, c, D, s);
        if (++guard > 1'000'000)
            throw resource_error("reduce: indefinite reduction did not settle");
    }
}

} // namespace

QForm reduce(QForm f, Int D) {
    if (form_disc(f) != D)
        throw precondition_error("reduce: discriminant mismatch");
    if (!form_primitive(f)) throw precondition_error("reduce: form not primitive");
    validate_discriminant(D);
    Int big = std::max({std::abs(f.a), std::abs(f.b), std::abs(f.c)});
    if (big > (Int(1) << 28)) {
        mpz_class a = to_mpz(f.a), b = to_mpz(f.b), c = to_mpz(f.c);
        mpz_class Dz = to_mpz(D);
        reduce_t<mpz_class>(a, b, c, Dz);
        return {mpz_to_int(a), mpz_to_int(b), mpz_to_int(c)};
    }
    Int a = f.a, b = f.b, c = f.c;
    reduce_t<Int>(a, b, c, D);
    return {a, b, c};
}

QForm rho_step(const QForm& f, Int D) {
    Int s = (Int)isqrt_u64((u64)D);
    Int a = f.a, b = f.b, c = f.c;
    rho_indef<Int>(a, b, c, D, s);
    return {a, b, c};
}

std::vector<QForm> form_cycle(const QForm& reduced, Int D) {
    if (D < 0) throw precondition_error("form_cycle: definite discriminant");
    if (!is_reduced(reduced, D))
        throw precondition_error("form_cycle: form not reduced");
    std::vector<QForm> cycle{reduced};
    QForm g = rho_step(reduced, D);
    while (!(g == reduced)) {
        cycle.push_back(g);
        g = rho_step(g, D);
        if (cycle.size() > 10'000'000)
            throw resource_error("form_cycle: cycle cap exceeded");
    }
    return cycle;
}

QForm canonicalize(const QForm& f, Int D) {
    QForm r = reduce(f, D);
    if (D < 0) return r;
    auto cyc = form_cycle(r, D);
    return *std::min_element(cyc.begin(), cyc.end());
}

// ---------------------------------------------------------------------------
// Composition
// ---------------------------------------------------------------------------

namespace {

// A coprime pair (x0, y0) with gcd(f(x0, y0), m) = 1. Exists for any
// primitive form; built prime-by-prime and cleaned of common factors
// (homogeneity keeps the represented value coprime to m).
std::pair<Int, Int> represent_coprime(const QForm& f, Int m) {
    m = std::abs(m);
    if (m <= 1) return {1, 0};
    auto fac = factorize64(m);
    Int x0 = 0, y0 = 0, M = 1;
    for (const auto& [p, e] : fac.factors) {
        Int xp, yp;
        if (mod_floor(f.a, p) != 0) { xp = 1; yp = 0; }
        else if (mod_floor(f.c, p) != 0) { xp = 0; yp = 1; }
        else { xp = 1; yp = 1; }  // p | a, p | c forces p coprime to b
        // CRT with previous
        if (M == 1) { x0 = xp; y0 = yp; M = p; continue; }
        Int u;
        // extended gcd of M and p (coprime); only M's cofactor is needed
        {
            Int a0 = M, b0 = p, u0 = 1, u1 = 0;
            while (b0) {
                Int q = a0 / b0;
                Int t = a0 - q * b0; a0 = b0; b0 = t;
                t = u0 - q * u1; u0 = u1; u1 = t;
            }
            u = u0;
        }
        i128 newmod = (i128)M * p;
        auto crt = [&](Int r1, Int r2) {
            // x = r1 + M * ((r2 - r1) * u mod p)
            Int diff = mod_floor(r2 - r1, p);
            Int mult = mod_floor((i128)diff * mod_floor(u, p) % p, p);
            i128 x = (i128)r1 + (i128)M * mult;
            return (Int)tmod_floor((i128)x, newmod);
        };
        x0 = crt(x0, xp);
        y0 = crt(y0, yp);
        M = (Int)newmod;
    }
    Int g = std::gcd(x0, y0);
    if (g > 1) { x0 /= g; y0 /= g; }
    if (x0 == 0 && y0 == 0) { x0 = 1; y0 = 0; }  // unreachable guard
    return {x0, y0};
}

QForm compose_raw(const QForm& x, const QForm& y, Int D) {
    QForm f1 = reduce(x, D), f2 = reduce(y, D);
    // represent a value of f2 coprime to a1
    auto [x0, y0] = represent_coprime(f2, f1.a);
    mpz_class A2 = to_mpz(f2.a), B2 = to_mpz(f2.b), C2 = to_mpz(f2.c);
    mpz_class X0 = to_mpz(x0), Y0 = to_mpz(y0);
    mpz_class v = A2 * X0 * X0 + B2 * X0 * Y0 + C2 * Y0 * Y0;
    if (v == 0) throw precondition_error("compose: degenerate representation");
    // complete (x0, y0) to an SL2 matrix [[x0, r], [y0, s]]
    Int r, s;
    {
        Int a0 = x0, b0 = y0, u0 = 1, v0 = 0, u1 = 0, v1 = 1;
        while (b0) {
            Int q = a0 / b0, t;
            t = a0 - q * b0; a0 = b0; b0 = t;
            t = u0 - q * u1; u0 = u1; u1 = t;
            t = v0 - q * v1; v0 = v1; v1 = t;
        }
        // a0 = gcd = x0*u0 + y0*v0 = 1 or -1
        if (a0 == 1) { s = u0; r = -v0; }
        else { s = -u0; r = v0; }
        // now x0*s - y0*r = 1
    }
    mpz_class R = to_mpz(r), S = to_mpz(s);
    mpz_class b2p = 2 * (A2 * X0 * R + C2 * Y0 * S) + B2 * (X0 * S + Y0 * R);
    mpz_class a1 = to_mpz(f1.a), b1 = to_mpz(f1.b);
    // b3 = b1 (mod 2 a1), b3 = b2p (mod 2 v)
    mpz_class vm = abs(v);
    mpz_class t = (b2p - b1) / 2;
    mpz_class a1inv;
    if (mpz_invert(a1inv.get_mpz_t(), mpz_class(a1 % vm).get_mpz_t(),
                   vm.get_mpz_t()) == 0)
        throw precondition_error("compose: representation not coprime");
    mpz_class tt = ((t % vm) * a1inv) % vm;
    if (tt < 0) tt += vm;
    mpz_class b3 = b1 + 2 * a1 * tt;
    mpz_class a3 = a1 * v;
    mpz_class Dz = to_mpz(D);
    mpz_class num = b3 * b3 - Dz;
    mpz_class den = 4 * a3;
    if (!mpz_divisible_p(num.get_mpz_t(), den.get_mpz_t()))
        throw precondition_error("compose: internal congruence failure");
    mpz_class c3 = num / den;
    reduce_t<mpz_class>(a3, b3, c3, Dz);
    return {mpz_to_int(a3), mpz_to_int(b3), mpz_to_int(c3)};
}

} // namespace

QForm compose(const QForm& x, const QForm& y, Int D) {
    if (form_disc(x) != D || form_disc(y) != D)
        throw precondition_error("compose: discriminant mismatch");
    return canonicalize(compose_raw(x, y, D), D);
}

QForm form_pow(const QForm& f, long e, Int D) {
    QForm base = e < 0 ? form_inverse(f) : f;
    unsigned long k = e < 0 ? (unsigned long)(-(e + 1)) + 1 : (unsigned long)e;
    QForm acc = principal_form(D);
    while (k) {
        if (k & 1) acc = compose_raw(acc, base, D);
        base = compose_raw(base, base, D);
        k >>= 1;
    }
    return canonicalize(acc, D);
}

// ---------------------------------------------------------------------------
// Splitting and prime forms
// ---------------------------------------------------------------------------

SplittingType splitting(Int D, Int p) {
    validate_discriminant(D);
    int k = kronecker64(D, p);
    if (k > 0) return SplittingType::Split;
    if (k < 0) return SplittingType::Inert;
    return SplittingType::Ramified;
}

const char* splitting_name(SplittingType s) {
    switch (s) {
        case SplittingType::Split: return "split";
        case SplittingType::Inert: return "inert";
        case SplittingType::Ramified: return "ramified";
    }
    return "?";
}

Int fundamental_disc(Int D) {
    validate_discriminant(D);
    auto sp = squarefree_split(D);
    if (mod_floor(sp.B0, 4) == 1) return sp.B0;
    return 4 * sp.B0;
}

Int conductor_of_disc(Int D) {
    auto sp = squarefree_split(D);
    if (mod_floor(sp.B0, 4) == 1) return sp.f;
    // D = f^2 B0 with B0 = 2,3 mod 4 and D = 0 mod 4 forces f even
    return sp.f / 2;
}

namespace {

// Tonelli-Shanks square root mod an odd prime.
u64 sqrt_mod_p(u64 a, u64 p) {
    a %= p;
    if (a == 0) return 0;
    if (p % 4 == 3) return powmod_u64(a, (p + 1) / 4, p);
    // write p - 1 = q 2^s
    u64 q = p - 1;
    int s = 0;
    while ((q & 1) == 0) { q >>= 1; ++s; }
    // find a non-residue
    u64 z = 2;
    while (powmod_u64(z, (p - 1) / 2, p) != p - 1) ++z;
    u64 m = s, c = powmod_u64(z, q, p), t = powmod_u64(a, q, p),
        r = powmod_u64(a, (q + 1) / 2, p);
    while (t != 1) {
        u64 t2 = t;
        u64 i = 0;
        while (t2 != 1) { t2 = mulmod_u64(t2, t2, p); ++i; }
        u64 b = c;
        for (u64 j = 0; j < m - i - 1; ++j) b = mulmod_u64(b, b, p);
        m = i;
        c = mulmod_u64(b, b, p);
        t = mulmod_u64(t, c, p);
        r = mulmod_u64(r, b, p);
    }
    return r;
}

} // namespace

QForm prime_form(Int D, Int p) {
    validate_discriminant(D);
    if (p < 2 || !is_prime_u64((u64)p))
        throw precondition_error("prime_form: p must be prime");
    SplittingType st = splitting(D, p);
    if (st == SplittingType::Inert)
        throw precondition_error("prime_form: p is inert");
    if (mod_floor(conductor_of_disc(D), p) == 0)
        throw precondition_error("prime_form: p divides the conductor");
    QForm f;
    if (p == 2) {
        Int d8 = mod_floor(D, 8);
        if (d8 == 1) f = {2, 1, (1 - D) / 8};
        else if (d8 == 0) f = {2, 0, -D / 8};
        else if (d8 == 4) f = {2, 2, (4 - D) / 8};
        else throw precondition_error("prime_form: 2 is inert");  // d8 == 5
    } else {
        Int b;
        Int Dp = mod_floor(D, p);
        if (Dp == 0) {
            b = (mod_floor(D, 2) == 0) ? 0 : p;
        } else {
            b = (Int)sqrt_mod_p((u64)Dp, (u64)p);
            if (mod_floor(b, 2) != mod_floor(D, 2)) b = p - b;
        }
        i128 num = (i128)b * b - D;
        i128 den = (i128)4 * p;
        if (num % den != 0)
            throw precondition_error("prime_form: internal congruence failure");
        i128 c = num / den;
        if (c > std::numeric_limits<Int>::max())
            throw resource_error("prime_form: coefficient overflow");
        f = {p, b, (Int)c};
    }
    if (!form_primitive(f))
        throw precondition_error("prime_form: produced imprimitive form");
    return f;
}

// ---------------------------------------------------------------------------
// Class group construction
// ---------------------------------------------------------------------------

namespace {

Int max_disc_cap() {
    if (const char* e = std::getenv("FERMAT22N_MAX_DISC")) {
        Int v = std::atoll(e);
        if (v > 0) return v;
    }
    return 100'000'000;
}

std::vector<QForm> enumerate_reduced(Int D) {
    std::vector<QForm> out;
    if (D < 0) {
        Int A = std::abs(D);
        for (Int a = 1; 3 * a * a <= A; ++a) {
            for (Int b = -a + 1; b <= a; ++b) {
                if (mod_floor(b, 2) != mod_floor(D, 2)) continue;
                i128 num = (i128)b * b - D;
                if (num % (4 * a) != 0) continue;
                Int c = (Int)(num / (4 * a));
                if (c < a) continue;
                if (b < 0 && (-b == a || a == c)) continue;
                QForm f{a, b, c};
                if (!form_primitive(f)) continue;
                out.push_back(f);
            }
        }
    } else {
        Int s = (Int)isqrt_u64((u64)D);
        for (Int b = (mod_floor(D, 2) == 0) ? 2 : 1; b <= s; b += 2) {
            i128 num = (i128)b * b - D;  // negative
            Int v = s + 1 - b;
            Int lo = v <= 0 ? 1 : (v + 1) / 2;  // ceil((s+1-b)/2)
            if (lo < 1) lo = 1;
            Int hi = (s + b) / 2;
            for (Int aa = lo; aa <= hi; ++aa) {
                for (Int sign : {1, -1}) {
                    Int a = sign * aa;
                    if (num % ((i128)4 * a) != 0) continue;
                    Int c = (Int)(num / ((i128)4 * a));
                    QForm f{a, b, c};
                    if (!form_primitive(f)) continue;
                    if (!is_reduced(f, D)) continue;
                    out.push_back(f);
                }
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Smith normal form of a square integer matrix. Returns diagonal entries and
// the column transform V plus its inverse (A_new = U A V with Lambda mapped
// through x -> x V).
void smith_normal_form(std::vector<std::vector<mpz_class>>& A,
                       std::vector<std::vector<mpz_class>>& V,
                       std::vector<std::vector<mpz_class>>& Vinv) {
    size_t k = A.size();
    V.assign(k, std::vector<mpz_class>(k, 0));
    Vinv.assign(k, std::vector<mpz_class>(k, 0));
    for (size_t i = 0; i < k; ++i) V[i][i] = Vinv[i][i] = 1;

    auto col_swap = [&](size_t i, size_t j) {
        for (size_t r = 0; r < k; ++r) std::swap(A[r][i], A[r][j]);
        for (size_t r = 0; r < k; ++r) std::swap(V[r][i], V[r][j]);
        std::swap(Vinv[i], Vinv[j]);
    };
    auto col_add = [&](size_t dst, size_t src, const mpz_class& q) {
        // col_dst += q * col_src ; Vinv row_src -= q * row_dst
        for (size_t r = 0; r < k; ++r) A[r][dst] += q * A[r][src];
        for (size_t r = 0; r < k; ++r) V[r][dst] += q * V[r][src];
        for (size_t c = 0; c < k; ++c) Vinv[src][c] -= q * Vinv[dst][c];
    };
    auto col_neg = [&](size_t i) {
        for (size_t r = 0; r < k; ++r) A[r][i] = -A[r][i];
        for (size_t r = 0; r < k; ++r) V[r][i] = -V[r][i];
        for (size_t c = 0; c < k; ++c) Vinv[i][c] = -Vinv[i][c];
    };
    auto row_swap = [&](size_t i, size_t j) { std::swap(A[i], A[j]); };
    auto row_add = [&](size_t dst, size_t src, const mpz_class& q) {
        for (size_t c = 0; c < k; ++c) A[dst][c] += q * A[src][c];
    };

    auto eliminate = [&](size_t t0) {
        for (size_t t = t0; t < k; ++t) {
            while (true) {
                // minimal nonzero entry of the trailing block into (t,t)
                size_t bi = k, bj = k;
                for (size_t i = t; i < k; ++i)
                    for (size_t j = t; j < k; ++j)
                        if (A[i][j] != 0 &&
                            (bi == k || abs(A[i][j]) < abs(A[bi][bj]))) {
                            bi = i;
                            bj = j;
                        }
                if (bi == k) return;  // trailing block all zero
                if (bi != t) row_swap(bi, t);
                if (bj != t) col_swap(bj, t);
                bool again = false;
                for (size_t i = t + 1; i < k; ++i) {
                    if (A[i][t] == 0) continue;
                    mpz_class q = A[i][t] / A[t][t];
                    row_add(i, t, -q);
                    if (A[i][t] != 0) again = true;
                }
                for (size_t j = t + 1; j < k; ++j) {
                    if (A[t][j] == 0) continue;
                    mpz_class q = A[t][j] / A[t][t];
                    col_add(j, t, -q);
                    if (A[t][j] != 0) again = true;
                }
                if (!again) break;
            }
        }
    };
    eliminate(0);
    for (size_t t = 0; t < k; ++t)
        if (A[t][t] < 0) col_neg(t);
    // enforce d_t | d_{t+1}
    while (true) {
        size_t bad = k;
        for (size_t t = 0; t + 1 < k; ++t)
            if (A[t][t] != 0 && A[t + 1][t + 1] % A[t][t] != 0) {
                bad = t;
                break;
            }
        if (bad == k) break;
        col_add(bad, bad + 1, 1);
        eliminate(bad);
        for (size_t t = 0; t < k; ++t)
            if (A[t][t] < 0) col_neg(t);
    }
}

} // namespace

Int ClassGroup::order() const {
    Int h = 1;
    for (Int d : elementary_divisors) h = checked_mul(h, d);
    return h;
}

QForm ClassGroup::canonical(const QForm& f) const {
    QForm r = reduce(f, discriminant);
    if (discriminant < 0) return r;
    auto it = cycle_rep_.find(r);
    if (it != cycle_rep_.end()) return it->second;
    return canonicalize(r, discriminant);
}

std::vector<Int> ClassGroup::dlog(const QForm& f) const {
    auto it = dlog_.find(canonical(f));
    if (it == dlog_.end())
        throw precondition_error("dlog: form not in this class group");
    return it->second;
}

ClassGroup build_class_group(Int D) {
    validate_discriminant(D);
    if (std::abs(D) > max_disc_cap())
        throw resource_error("class_group: |D| exceeds configured cap");

    ClassGroup G;
    G.discriminant = D;
    G.reduced_forms = enumerate_reduced(D);

    std::map<QForm, QForm> rep_of;  // reduced form -> canonical rep
    if (D < 0) {
        G.class_reps = G.reduced_forms;
        for (const auto& f : G.reduced_forms) rep_of[f] = f;
    } else {
        std::set<QForm> seen;
        for (const auto& f : G.reduced_forms) {
            if (seen.count(f)) continue;
            auto cyc = form_cycle(f, D);
            QForm rep = *std::min_element(cyc.begin(), cyc.end());
            for (const auto& g : cyc) {
                rep_of[g] = rep;
                seen.insert(g);
            }
            G.class_reps.push_back(rep);
        }
        std::sort(G.class_reps.begin(), G.class_reps.end());
        G.cycle_rep_ = rep_of;
    }

    auto canon = [&](const QForm& f) {
        auto it = rep_of.find(f);
        if (it != rep_of.end()) return it->second;
        QForm r = reduce(f, D);
        auto it2 = rep_of.find(r);
        if (it2 == rep_of.end())
            throw precondition_error("class_group: unexpected form");
        return it2->second;
    };

    G.principal_rep_ = canon(principal_form(D));
    size_t h = G.class_reps.size();

    // Polycyclic closure: coordinates of every class over a growing list of
    // generators, one relation per generator.
    std::map<QForm, std::vector<long>> coords;
    coords[G.principal_rep_] = {};
    std::vector<QForm> pc_gens;
    std::vector<long> rel_order;                 // m_i
    std::vector<std::vector<long>> rel_power;    // coords of g_i^{m_i}

    for (const auto& rep : G.class_reps) {
        if (coords.count(rep)) continue;
        // order of rep relative to the current subgroup
        long m = 0;
        QForm pw = rep;
        std::vector<QForm> powers{rep};  // rep^1 .. rep^m
        while (!coords.count(pw)) {
            pw = canon(compose_raw(pw, rep, D));
            powers.push_back(pw);
            if (powers.size() > h + 1)
                throw resource_error("class_group: closure failure");
        }
        m = (long)powers.size();  // smallest m with rep^m in subgroup
        std::vector<long> landing = coords[pw];

        size_t idx = pc_gens.size();
        pc_gens.push_back(rep);
        rel_order.push_back(m);
        landing.resize(idx, 0);
        rel_power.push_back(landing);

        // extend every known element by rep^j, j = 1..m-1
        std::vector<std::pair<QForm, std::vector<long>>> base(coords.begin(),
                                                              coords.end());
        QForm repj = principal_form(D);
        for (long j = 1; j < m; ++j) {
            repj = canon(compose_raw(repj, rep, D));
            for (auto& [e, vec] : base) {
                QForm ne = canon(compose_raw(e, repj, D));
                std::vector<long> nv = vec;
                nv.resize(idx, 0);
                nv.push_back(j);
                coords[ne] = nv;
            }
        }
    }
    if (coords.size() != h)
        throw resource_error("class_group: closure size mismatch");

    size_t k = pc_gens.size();
    if (k == 0) {
        // trivial group
        for (const auto& [e, vec] : coords)
            G.dlog_[e] = {};
        return G;
    }

    // Relation matrix rows: m_i e_i - rel_power_i
    std::vector<std::vector<mpz_class>> A(k, std::vector<mpz_class>(k, 0));
    for (size_t i = 0; i < k; ++i) {
        A[i][i] = rel_order[i];
        for (size_t j = 0; j < rel_power[i].size(); ++j)
            A[i][j] -= rel_power[i][j];
    }
    std::vector<std::vector<mpz_class>> V, Vinv;
    smith_normal_form(A, V, Vinv);

    std::vector<Int> divisors(k);
    for (size_t i = 0; i < k; ++i) divisors[i] = mpz_to_int(A[i][i]);

    std::vector<size_t> kept;
    for (size_t i = 0; i < k; ++i)
        if (divisors[i] > 1) kept.push_back(i);

    for (size_t i : kept) G.elementary_divisors.push_back(divisors[i]);

    // dlog of every element: pad polycyclic coords to length k, apply V,
    // reduce mod divisors, keep the nontrivial coordinates.
    for (const auto& [e, vec] : coords) {
        std::vector<Int> w;
        for (size_t i : kept) {
            mpz_class acc = 0;
            for (size_t j = 0; j < k; ++j) {
                long xj = j < vec.size() ? vec[j] : 0;
                acc += xj * V[j][i];
            }
            mpz_class m = to_mpz(divisors[i]);
            mpz_class r = ((acc % m) + m) % m;
            w.push_back(mpz_to_int(r));
        }
        G.dlog_[e] = w;
    }

    // generators: row i of Vinv expressed in the polycyclic generators
    for (size_t i : kept) {
        QForm g = principal_form(D);
        for (size_t j = 0; j < k; ++j) {
            if (Vinv[i][j] == 0) continue;
            QForm piece = form_pow(pc_gens[j], (long)mpz_to_int(Vinv[i][j]), D);
            g = compose_raw(g, piece, D);
        }
        g = canon(g);
        G.generators.push_back(g);
        // verify claimed order
        Int d = divisors[i];
        if (!(canon(form_pow(g, d, D)) == G.principal_rep_))
            throw resource_error("class_group: generator order check failed");
        for (const auto& [q, e] : factorize64(d).factors) {
            (void)e;
            if (canon(form_pow(g, d / q, D)) == G.principal_rep_)
                throw resource_error("class_group: generator order too small");
        }
        // dlog consistency
        auto v = G.dlog_[g];
        for (size_t t = 0; t < kept.size(); ++t) {
            Int expect = (kept[t] == i) ? 1 % divisors[i] : 0;
            if (v[t] != expect)
                throw resource_error("class_group: generator dlog mismatch");
        }
    }
    return G;
}

std::shared_ptr<const ClassGroup> class_group(Int D) {
    static std::mutex mu;
    static std::map<Int, std::shared_ptr<const ClassGroup>> cache;
    static size_t cap = [] {
        if (const char* e = std::getenv("FERMAT22N_CACHE_SIZE")) {
            long v = std::atol(e);
            if (v > 0) return (size_t)v;
        }
        return (size_t)4096;
    }();
    {
        std::lock_guard<std::mutex> lk(mu);
        auto it = cache.find(D);
        if (it != cache.end()) return it->second;
    }
    auto built = std::make_shared<const ClassGroup>(build_class_group(D));
    std::lock_guard<std::mutex> lk(mu);
    auto it = cache.find(D);
    if (it != cache.end()) return it->second;
    if (cache.size() < cap) cache.emplace(D, built);
    return built;
}

bool is_nth_power_vector(const std::vector<Int>& v, int n,
                         const std::vector<Int>& divisors) {
    for (size_t i = 0; i < divisors.size(); ++i) {
        Int g = std::gcd((Int)n, divisors[i]);
        if (mod_floor(v[i], g) != 0) return false;
    }
    return true;
}

bool is_nth_power_class(const QForm& form, int n, const ClassGroup& G) {
    return is_nth_power_vector(G.dlog(form), n, G.elementary_divisors);
}

// ---------------------------------------------------------------------------
// Orders attached to an instance
// ---------------------------------------------------------------------------

QuadOrder order_for(Int B0, Int f, Int C) {
    if (B0 == 0 || C == 0) throw precondition_error("order_for: zero input");
    if (B0 == -1)
        throw precondition_error("order_for: B0 = -1 (square -B) unsupported");
    if (f < 1) throw precondition_error("order_for: f must be positive");
    if (squarefree_split(B0).f != 1)
        throw precondition_error("order_for: B0 not squarefree");
    if (std::gcd(f, std::abs(C)) != 1)
        throw precondition_error("order_for: gcd(f, C) != 1");
    QuadOrder O;
    O.B0 = B0;
    O.f = f;
    Int r8 = mod_floor(B0, 8);
    Int r4 = mod_floor(B0, 4);
    bool c_even = (mod_floor(C, 2) == 0);
    if (r4 == 1 || r4 == 2) {
        O.half_basis = false;
        O.case_id = 1;
    } else if (r8 == 3) {
        O.half_basis = c_even;
        O.case_id = c_even ? 3 : 2;
    } else {  // B0 = 7 mod 8
        O.half_basis = true;
        O.case_id = 4;
    }
    Int ff = checked_mul(f, f);
    O.disc = O.half_basis ? checked_mul(-ff, B0) : checked_mul(-4 * ff, B0);
    validate_discriminant(O.disc);
    return O;
}

// ---------------------------------------------------------------------------
// Units and the class number formula
// ---------------------------------------------------------------------------

std::pair<mpz_class, mpz_class> principal_automorph(Int D) {
    validate_discriminant(D);
    if (D < 0) throw precondition_error("principal_automorph: needs D > 0");
    QForm f0 = reduce(principal_form(D), D);
    Int s = (Int)isqrt_u64((u64)D);
    mpz_class M00 = 1, M01 = 0, M10 = 0, M11 = 1;
    QForm f = f0;
    long guard = 0;
    do {
        QForm g = rho_step(f, D);
        // step matrix S = [[0,-1],[1,m]] with m = (b + b') / (2c);
        // M * S = [[M01, -M00 + M01 m], [M11, -M10 + M11 m]]
        mpz_class m = to_mpz(f.b + g.b) / to_mpz(2 * f.c);
        mpz_class a = M00, b = M01, c = M10, d = M11;
        M00 = b;
        M01 = -a + b * m;
        M10 = d;
        M11 = -c + d * m;
        f = g;
        if (++guard > 10'000'000)
            throw resource_error("principal_automorph: cycle cap");
    } while (!(f == f0));
    (void)s;
    mpz_class t = M00 + M11;
    mpz_class u = M10;
    if (!mpz_divisible_p(u.get_mpz_t(), to_mpz(f0.a).get_mpz_t()))
        throw resource_error("principal_automorph: matrix not an automorph");
    u /= to_mpz(f0.a);
    if (t < 0) t = -t;
    if (u < 0) u = -u;
    mpz_class check = t * t - to_mpz(D) * u * u;
    if (check != 4 || u == 0)
        throw resource_error("principal_automorph: Pell check failed");
    return {t, u};
}

Int unit_index(Int K_disc, Int cond, Int rel) {
    if (rel == 1) return 1;
    Int D1 = checked_mul(checked_mul(cond, cond), K_disc);
    if (D1 < 0) {
        if (D1 == -3) return 3;
        if (D1 == -4) return 2;
        return 1;
    }
    auto [t, u] = principal_automorph(D1);
    // epsilon = x + y w with w = (D1 + sqrt(D1))/2; powers mod rel
    mpz_class R = to_mpz(rel);
    mpz_class x1z = (t - u * to_mpz(D1)) / 2;
    Int x1 = mpz_to_int(mpz_class(((x1z % R) + R) % R));
    Int y1 = mpz_to_int(mpz_class(((u % R) + R) % R));
    mpz_class Nz = to_mpz(D1) * (to_mpz(D1) - 1) / 4;
    Int N = mpz_to_int(mpz_class(((Nz % R) + R) % R));
    Int Dm = mod_floor(D1, rel);
    Int xj = x1, yj = y1;
    for (Int j = 1; j <= 8 * rel + 16; ++j) {
        if (yj == 0) return j;
        i128 nx = ((i128)x1 * xj - (i128)N * y1 % rel * yj) % rel;
        i128 ny = ((i128)x1 * yj + (i128)y1 * xj + (i128)Dm * y1 % rel * yj) % rel;
        xj = (Int)tmod_floor(nx, (i128)rel);
        yj = (Int)tmod_floor(ny, (i128)rel);
    }
    throw resource_error("unit_index: index not found within bound");
}

bool class_number_ratio_check(Int K_disc, Int cond1, Int cond2) {
    validate_discriminant(K_disc);
    if (conductor_of_disc(K_disc) != 1)
        throw precondition_error("class_number_ratio_check: K_disc not fundamental");
    if (cond1 < 1 || cond2 < 1 || cond2 % cond1 != 0)
        throw precondition_error("class_number_ratio_check: cond1 must divide cond2");
    Int rel = cond2 / cond1;
    Int D1 = checked_mul(checked_mul(cond1, cond1), K_disc);
    Int D2 = checked_mul(checked_mul(cond2, cond2), K_disc);
    Int h1 = class_group(D1)->order();
    Int h2 = class_group(D2)->order();
    Int ui = unit_index(K_disc, cond1, rel);
    mpq_class lhs(to_mpz(h2) * to_mpz(ui), to_mpz(h1));
    lhs.canonicalize();
    mpq_class rhs(to_mpz(rel), 1);
    for (const auto& [p, e] : factorize64(rel).factors) {
        (void)e;
        rhs *= mpq_class(to_mpz(p - kronecker64(D1, p)), to_mpz(p));
    }
    rhs.canonicalize();
    return lhs == rhs;
}

} // namespace fermat22n
