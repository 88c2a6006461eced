#include "fermat22n/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fermat22n {

// ---------------------------------------------------------------------------
// Star-condition evaluation on witnesses
// ---------------------------------------------------------------------------

int u_level(Int x, Int y, Int f, Int B0, Int p, int cap) {
    if (x == 0 && y == 0) return cap;
    if (p == 2) {
        // coordinates of u in a Z-basis of O_K
        Int a, b;
        if (mod_floor(B0, 4) == 3) {
            a = x - checked_mul(f, y);  // u = (x - f y) + 2 f y * (1+sqrt)/2
            b = 2 * checked_mul(f, y);
        } else {
            a = x;
            b = checked_mul(f, y);
        }
        int r = 0;
        while (r < cap && a % 2 == 0 && b % 2 == 0) {
            a /= 2;
            b /= 2;
            ++r;
        }
        return r;
    }
    Int fy = checked_mul(f, y);
    int vx = (x == 0) ? cap : valuation(x, p);
    int vf = (fy == 0) ? cap : valuation(fy, p);
    return std::min(cap, std::min(vx, vf));
}

bool satisfies_star(Int x, Int y, Int f, Int B0, const StarCondition& sc) {
    int lvl = u_level(x, y, f, B0, sc.p);
    if (sc.kind == StarCondition::Star) return lvl == sc.t;
    // tildestar: only meaningful at p = 2
    if (sc.p != 2) throw precondition_error("tildestar requires p = 2");
    if (lvl != sc.t + 1) return false;
    int vx = (x == 0) ? 62 : valuation(x, 2);
    return vx == sc.t;
}

namespace {
// u lies in p O_K for an odd p exactly when p divides gcd(x, f y).
Int odd_part_of_u_gcd(Int x, Int y, Int f) {
    Int g = std::gcd(std::abs(x), std::abs(checked_mul(f, y)));
    while (g != 0 && g % 2 == 0) g /= 2;
    return g;
}
} // namespace

bool star0_everywhere(Int x, Int y, Int f, Int B0) {
    if (x == 0 && y == 0) return false;
    if (u_level(x, y, f, B0, 2) != 0) return false;
    return odd_part_of_u_gcd(x, y, f) == 1;
}

bool tilde0_everywhere(Int x, Int y, Int f, Int B0) {
    if (x == 0 && y == 0) return false;
    StarCondition t2{2, StarCondition::TildeStar, 0};
    if (!satisfies_star(x, y, f, B0, t2)) return false;
    return odd_part_of_u_gcd(x, y, f) == 1;
}

// ---------------------------------------------------------------------------
// Primitive solution search
// ---------------------------------------------------------------------------

namespace {

i128 ipow_checked(Int base, int exp) {
    i128 r = 1;
    constexpr i128 kLimit = (i128)1 << 120;
    for (int i = 0; i < exp; ++i) {
        r *= base;
        if (r > kLimit || r < -kLimit)
            throw resource_error("search: z^n exceeds the working range");
    }
    return r;
}

Int gcd3(Int a, Int b, Int c) {
    return std::gcd(std::gcd(std::abs(a), std::abs(b)), std::abs(c));
}

} // namespace

bool verify_solution(const Instance& inst, Int x, Int y, Int z) {
    if (gcd3(x, y, z) != 1) return false;
    mpz_class lhs = to_mpz(x) * to_mpz(x) + to_mpz(inst.B) * to_mpz(y) * to_mpz(y);
    mpz_class zn;
    mpz_pow_ui(zn.get_mpz_t(), to_mpz(z).get_mpz_t(), inst.n);
    return lhs == to_mpz(inst.C) * zn;
}

std::vector<Solution> search_primitive(const Instance& inst,
                                       const SearchBound& bound) {
    if (bound.z_max < 1 || bound.y_max < 1)
        throw precondition_error("search: bounds must be positive");
    auto sp = squarefree_split(inst.B);
    std::vector<Solution> hits;

    auto passes = [&](Int x, Int y, Int z) {
        for (Int p : bound.y_coprime)
            if (mod_floor(y, p) == 0) return false;
        for (Int p : bound.z_coprime)
            if (mod_floor(z, p) == 0) return false;
        for (const auto& sc : bound.conditions)
            if (!satisfies_star(x, y, sp.f, sp.B0, sc)) return false;
        return true;
    };
    auto emit = [&](Int x, Int y, Int z) {
        if (gcd3(x, y, z) != 1) return;
        if (!passes(x, y, z)) return;
        hits.push_back({x, y, z});
    };

    for (Int z = -bound.z_max; z <= bound.z_max; ++z) {
        i128 czn = (i128)inst.C * ipow_checked(z, inst.n);
        Int y_hi = bound.y_max;
        if (inst.B > 0) {
            if (czn < 0) continue;
            u128 cap = (u128)czn / (u64)inst.B;
            Int root = (Int)isqrt_u128(cap);
            y_hi = std::min(y_hi, root);
        }
        for (Int y = 0; y <= y_hi; ++y) {
            i128 rhs = czn - (i128)inst.B * y * y;
            if (rhs < 0) continue;
            u128 root;
            if (!is_square_u128((u128)rhs, &root)) continue;
            if (root > (u128)std::numeric_limits<Int>::max())
                throw resource_error("search: x exceeds the working range");
            Int x = (Int)root;
            emit(x, y, z);
            if (x > 0 && y > 0) emit(-x, y, z);
        }
    }
    return hits;
}

// ---------------------------------------------------------------------------
// Exhaustive p-adic solubility by lifting
// ---------------------------------------------------------------------------

namespace {

// Representatives of Z_p^x / (Z_p^x)^2 (for the weight-2 coordinate) and of
// Z_p^x / (Z_p^x)^n (for the weight-n coordinates), as integer constants.
std::vector<Int> square_class_reps(Int p) {
    if (p == 2) return {1, 3, 5, 7};
    Int g = 2;
    while (kronecker64(g, p) != -1) ++g;
    return {1, g};
}

std::vector<Int> nth_class_reps(Int p, int n) {
    if (p == 2) return {1};  // odd powers are bijective on Z_2^x
    Int g = 2;
    while (kronecker64(g, p) != -1) ++g;
    Int gnp = std::gcd((Int)n, p - 1);
    int vpn = 0;
    for (Int t = n; t % p == 0; t /= p) ++vpn;
    Int pe = checked_pow(p, vpn);
    std::vector<Int> reps;
    for (Int i = 0; i < gnp; ++i)
        for (Int j = 0; j < pe; ++j) {
            Int v = 1;
            for (Int t = 0; t < i; ++t) v = checked_mul(v, g);
            for (Int t = 0; t < j; ++t) v = checked_mul(v, 1 + p);
            reps.push_back(v);
        }
    return reps;
}

struct LiftSearch {
    Int p;
    int n;
    Int B, C;
    int fixed;          // 0 = x, 1 = y, 2 = z
    u128 fixed_val;
    bool a_div = false, b_div = false;  // root divisibility for the split
    int maxdepth;

    u128 reduce_mod(Int v, u128 m) const {
        i128 r = (i128)v % (i128)m;
        if (r < 0) r += (i128)m;
        return (u128)r;
    }
    u128 powm(u128 b, int e, u128 m) const {
        u128 r = 1 % m;
        b %= m;
        for (int i = 0; i < e; ++i) r = r * b % m;
        return r;
    }
    void coords(u128 a, u128 b, u128& x, u128& y, u128& z) const {
        if (fixed == 0) { x = fixed_val; y = a; z = b; }
        else if (fixed == 1) { x = a; y = fixed_val; z = b; }
        else { x = a; y = b; z = fixed_val; }
    }
    u128 f_eval(u128 a, u128 b, u128 m) const {
        u128 x, y, z;
        coords(a, b, x, y, z);
        u128 r = powm(x, 2, m) + reduce_mod(B, m) * powm(y, 2, m) % m;
        r %= m;
        u128 s = reduce_mod(C, m) * powm(z, n, m) % m;
        return (r + m - s) % m;
    }
    int val_or_cap(u128 v, int cap) const {
        if (v == 0) return cap;
        int r = 0;
        while (v % (u128)p == 0) { v /= (u128)p; ++r; }
        return r;
    }
    // minimal visible valuation across the gradient, capped at m
    int grad_val(u128 a, u128 b, u128 pm, int m) const {
        u128 x, y, z;
        coords(a, b, x, y, z);
        u128 gx = 2 * x % pm;
        u128 gy = 2 * reduce_mod(B, pm) % pm * y % pm;
        u128 gz = reduce_mod((Int)n, pm) * reduce_mod(C, pm) % pm *
                  powm(z, n - 1, pm) % pm;
        int g = m;
        g = std::min(g, val_or_cap(gx, m));
        g = std::min(g, val_or_cap(gy, m));
        g = std::min(g, val_or_cap(gz, m));
        return g;
    }

    // signed partial derivatives of f with respect to the two free
    // coordinates, mod p
    void partials(u128 a, u128 b, u128& fa, u128& fb) const {
        u128 P = (u128)p;
        u128 x, y, z;
        coords(a, b, x, y, z);
        u128 dx = 2 * (x % P) % P;
        u128 dy = 2 * reduce_mod(B, P) % P * (y % P) % P;
        u128 dz = (P - reduce_mod((Int)n, P) * reduce_mod(C, P) % P *
                           powm(z, n - 1, P) % P) %
                  P;
        if (fixed == 0) { fa = dy; fb = dz; }
        else if (fixed == 1) { fa = dx; fb = dz; }
        else { fa = dx; fb = dy; }
    }

    LiftResult run() const {
        std::vector<std::pair<u128, u128>> cur;
        u128 pm = (u128)p;
        // Root level: f is quadratic in the first free coordinate with no
        // linear term, so solve coeff * a^2 = -f(0, b) by table lookup
        // (a prime modulus leaves at most two roots per residue).
        std::vector<Int> root1((size_t)p, -1), root2((size_t)p, -1);
        for (Int a = 0; a < p; ++a) {
            size_t r = (size_t)((u128)a * a % (u128)p);
            (root1[r] < 0 ? root1[r] : root2[r]) = a;
        }
        u128 coeff = (fixed == 0) ? reduce_mod(B, pm) : 1;
        u128 coeff_inv = coeff ? powm(coeff, (int)(p - 2), pm) : 0;
        for (Int b = 0; b < p; ++b) {
            if (b_div && b != 0) continue;
            u128 f0 = f_eval(0, (u128)b, pm);
            if (coeff == 0) {
                if (f0 != 0) continue;
                for (Int a = 0; a < p; ++a) {
                    if (a_div && a != 0) continue;
                    cur.emplace_back((u128)a, (u128)b);
                }
                continue;
            }
            u128 target = (pm - f0) % pm * coeff_inv % pm;
            for (Int a : {root1[(size_t)target], root2[(size_t)target]}) {
                if (a < 0) continue;
                if (a_div && a != 0) continue;
                cur.emplace_back((u128)a, (u128)b);
            }
        }
        // moduli stay below 2^63 so that products of residues fit in 128
        // bits; live trees settle long before this in practice
        constexpr u128 kModCap = (u128)1 << 62;
        for (int m = 1; m <= maxdepth; ++m) {
            if (cur.empty()) return LiftResult::Empty;
            if (pm > kModCap / (u128)p) return LiftResult::Inconclusive;
            u128 pm1 = pm * (u128)p;
            u128 P = (u128)p;
            std::vector<std::pair<u128, u128>> next;
            for (const auto& [a, b] : cur) {
                int g = grad_val(a, b, pm, m);
                if (m > 2 * g) return LiftResult::Certified;
                // f(a + pm da, b + pm db) = f(a,b) + pm (fa da + fb db)
                // mod pm1, so children solve a linear congruence mod p.
                u128 c0 = (f_eval(a, b, pm1) / pm) % P;
                u128 fa, fb;
                partials(a, b, fa, fb);
                if (fa == 0 && fb == 0) {
                    if (c0 != 0) continue;
                    for (Int da = 0; da < p; ++da)
                        for (Int db = 0; db < p; ++db)
                            next.emplace_back(a + pm * (u128)da,
                                              b + pm * (u128)db);
                } else if (fa != 0) {
                    u128 inv = powm(fa, (int)(p - 2), P);
                    for (Int db = 0; db < p; ++db) {
                        u128 rhs = (2 * P - c0 - fb * (u128)db % P) % P;
                        u128 da = rhs * inv % P;
                        next.emplace_back(a + pm * da, b + pm * (u128)db);
                    }
                } else {
                    u128 inv = powm(fb, (int)(p - 2), P);
                    for (Int da = 0; da < p; ++da) {
                        u128 db = (P - c0) % P * inv % P;
                        next.emplace_back(a + pm * (u128)da, b + pm * db);
                    }
                }
            }
            if (next.empty()) return LiftResult::Empty;
            cur.swap(next);
            pm = pm1;
            if (cur.size() > 5'000'000)
                throw resource_error("lifting: width cap exceeded");
        }
        return LiftResult::Inconclusive;
    }
};

} // namespace

const char* lift_result_name(LiftResult r) {
    switch (r) {
        case LiftResult::Certified: return "certified";
        case LiftResult::Empty: return "empty";
        case LiftResult::Inconclusive: return "inconclusive";
    }
    return "?";
}

int default_lift_depth(const Instance& inst, Int p) {
    return 2 * (valuation(inst.B, p) + valuation(inst.C, p)) + 4 * inst.n + 8;
}

LiftResult local_solvable_exhaustive(const Instance& inst, Int p, int depth) {
    if (p < 2 || !is_prime_u64((u64)p))
        throw precondition_error("lifting: p must be prime");
    if (depth < 2) throw precondition_error("lifting: depth too small");
    bool sawInconclusive = false;
    // branch 1: z a unit (weight-2 coordinate, square-class reps)
    for (Int zr : square_class_reps(p)) {
        LiftSearch L{p, inst.n, inst.B, inst.C, 2, (u128)zr,
                     false, false, depth};
        LiftResult r = L.run();
        if (r == LiftResult::Certified) return r;
        if (r == LiftResult::Inconclusive) sawInconclusive = true;
    }
    // branch 2: p | z, y a unit (weight-n coordinate)
    for (Int yr : nth_class_reps(p, inst.n)) {
        LiftSearch L{p, inst.n, inst.B, inst.C, 1, (u128)yr,
                     false, true, depth};
        LiftResult r = L.run();
        if (r == LiftResult::Certified) return r;
        if (r == LiftResult::Inconclusive) sawInconclusive = true;
    }
    // branch 3: p | y, p | z, x a unit
    for (Int xr : nth_class_reps(p, inst.n)) {
        LiftSearch L{p, inst.n, inst.B, inst.C, 0, (u128)xr,
                     true, true, depth};
        LiftResult r = L.run();
        if (r == LiftResult::Certified) return r;
        if (r == LiftResult::Inconclusive) sawInconclusive = true;
    }
    return sawInconclusive ? LiftResult::Inconclusive : LiftResult::Empty;
}

} // namespace fermat22n
