#include "fermat22n/cascade.hpp"

#include <algorithm>
#include <deque>
#include <numeric>

namespace fermat22n {

const char* two_adic_mode_name(TwoAdicMode m) {
    switch (m) {
        case TwoAdicMode::Unconstrained: return "unconstrained";
        case TwoAdicMode::Star0: return "star0";
        case TwoAdicMode::Tilde0: return "tilde0";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Step 1: strip common squares
// ---------------------------------------------------------------------------

std::pair<std::pair<Int, Int>, int> strip_common_squares(Int B, Int C) {
    if (B == 0 || C == 0)
        throw precondition_error("strip_common_squares: zero input");
    int strips = 0;
    auto fac = factorize64(std::gcd(std::abs(B), std::abs(C)));
    for (const auto& [p, e] : fac.factors) {
        (void)e;
        while (B % (p * p) == 0 && C % (p * p) == 0) {
            B /= p * p;
            C /= p * p;
            ++strips;
        }
    }
    return {{B, C}, strips};
}

// ---------------------------------------------------------------------------
// The excluded coefficient set
// ---------------------------------------------------------------------------

std::pair<bool, Int> in_excluded_set(Int B, Int C, int n) {
    auto sp = squarefree_split(B);
    for (const auto& [p, e] : factorize64(n).factors) {
        (void)e;
        int vf = valuation(sp.f, p);
        int vc = valuation(C, p);
        if (2 * vf <= vc) continue;
        bool deep = (vc % 2 == 0) ? (2 * vf - vc >= 2 * n)
                                  : (2 * vf - vc >= n + 1);
        if (deep) return {true, p};
    }
    return {false, 0};
}

// ---------------------------------------------------------------------------
// Admissible star levels
// ---------------------------------------------------------------------------

std::vector<StarLevel> enumerate_star_levels(Int B, Int C, int n, Int p) {
    auto sp = squarefree_split(B);
    int r = valuation(sp.f, p);
    int ell = valuation(C, p);
    if (r == 0 && ell == 0)
        throw precondition_error("enumerate_star_levels: p does not divide fC");
    std::vector<StarLevel> out;
    if (r > 0 && ell == 0) {
        // p divides f only
        if (p != 2) {
            out.push_back({0, false});
            for (int t = n; t <= r; t += n) out.push_back({t, false});
            if (r % n != 0) out.push_back({r, false});
        } else {
            out.push_back({0, false});
            for (int t = n; t <= r; t += n) out.push_back({t, false});
            if (r % n != 0) out.push_back({r, false});
            out.push_back({r + 1, true});
        }
        return out;
    }
    if (r == 0 && ell > 0) {
        // p divides C only
        out.push_back({0, false});
        for (int t = 1; t <= ell / 2; ++t) {
            if (p == 2) out.push_back({t, true});
            out.push_back({t, false});
        }
        if (p == 2) out.push_back({ell / 2 + 1, true});
        return out;
    }
    // p | gcd(f, C); after square stripping necessarily p || C
    if (ell != 1)
        throw precondition_error(
            "enumerate_star_levels: common square part not stripped");
    if (p != 2) {
        for (int t = 1; t <= r; ++t)
            if ((2 * t - 1) % n == 0) out.push_back({t, false});
        if ((2 * r - 1) % n != 0) out.push_back({r, false});
        std::sort(out.begin(), out.end(),
                  [](const StarLevel& a, const StarLevel& b) { return a.t < b.t; });
        out.erase(std::unique(out.begin(), out.end()), out.end());
    } else {
        for (int t = 1; t < r; ++t)
            if ((2 * t - 1) % n == 0) out.push_back({t, false});
        out.push_back({r, false});
        out.push_back({r + 1, true});
    }
    return out;
}

// ---------------------------------------------------------------------------
// One cascade step
// ---------------------------------------------------------------------------

namespace {

Int pow_int(Int p, int e) { return checked_pow(p, e); }

int ceil_div(int a, int b) { return (a + b - 1) / b; }

} // namespace

CascadeNode apply_cascade_step(const CascadeNode& node, int n, Int p,
                               StarLevel lvl) {
    auto levels = enumerate_star_levels(node.B, node.C, n, p);
    if (std::find(levels.begin(), levels.end(), lvl) == levels.end())
        throw precondition_error("apply_cascade_step: inadmissible level");
    auto sp = squarefree_split(node.B);
    int r = valuation(sp.f, p);
    int ell = valuation(node.C, p);
    int t = lvl.t;

    CascadeNode child = node;
    child.status = Status::Undecided;
    child.note.clear();
    TrailStep step;
    step.p = p;
    step.t = t;
    step.tilde = lvl.tilde;
    step.from_B = node.B;
    step.from_C = node.C;

    child.pinned.insert(p);
    if (p == 2 && !lvl.tilde) child.mode = TwoAdicMode::Star0;
    if (p == 2 && lvl.tilde) child.mode = TwoAdicMode::Tilde0;

    if (t == 0) {
        step.lemma = "pin";
        child.trail.push_back(step);
        return child;
    }

    if (r > 0 && ell == 0) {
        if (p != 2) {
            step.lemma = "cascade-f";
            if (t % n == 0) {
                child.B = node.B / pow_int(p, 2 * t);
                child.y_coprime.insert(p);
                step.x_mult = pow_int(p, t);
                step.z_mult = pow_int(p, 2 * t / n);
            } else {  // t == r, n does not divide r
                child.B = node.B / pow_int(p, 2 * r);
                child.C = checked_mul(node.C, pow_int(p, ceil_div(2 * r, n) * n - 2 * r));
                step.x_mult = pow_int(p, r);
                step.z_mult = pow_int(p, ceil_div(2 * r, n));
            }
        } else {
            step.lemma = "cascade-f-2";
            if (lvl.tilde) {  // t == r + 1
                child.B = node.B / pow_int(2, 2 * r);
                child.C = checked_mul(node.C, pow_int(2, ceil_div(2 * r, n) * n - 2 * r));
                step.x_mult = pow_int(2, r);
                step.z_mult = pow_int(2, ceil_div(2 * r, n));
            } else if (t % n == 0) {
                child.B = node.B / pow_int(2, 2 * t);
                child.y_coprime.insert(2);
                step.x_mult = pow_int(2, t);
                step.z_mult = pow_int(2, 2 * t / n);
            } else {  // t == r, n does not divide r
                child.B = node.B / pow_int(2, 2 * r);
                child.C = checked_mul(node.C, pow_int(2, ceil_div(2 * r, n) * n - 2 * r));
                step.x_mult = pow_int(2, r);
                step.z_mult = pow_int(2, ceil_div(2 * r, n));
            }
        }
        child.trail.push_back(step);
        return child;
    }

    if (r == 0 && ell > 0) {
        if (p != 2) {
            step.lemma = "cascade-y";
            child.C = node.C / pow_int(p, 2 * t);
            child.z_coprime.insert(p);
            step.x_mult = pow_int(p, t);
            step.y_mult = pow_int(p, t);
        } else {
            step.lemma = "cascade-y-2";
            if (lvl.tilde) {
                child.C = node.C / pow_int(2, 2 * (t - 1));
                if (t >= 2) child.z_coprime.insert(2);
                step.x_mult = pow_int(2, t - 1);
                step.y_mult = pow_int(2, t - 1);
            } else {
                child.C = node.C / pow_int(2, 2 * t);
                child.z_coprime.insert(2);
                step.x_mult = pow_int(2, t);
                step.y_mult = pow_int(2, t);
            }
        }
        child.trail.push_back(step);
        return child;
    }

    // p | gcd(f, C) with p || C
    if (p != 2) {
        step.lemma = "cascade-fc-odd";
        if ((2 * t - 1) % n == 0) {
            child.B = node.B / pow_int(p, 2 * t);
            child.C = node.C / p;
            child.y_coprime.insert(p);
            step.x_mult = pow_int(p, t);
            step.z_mult = pow_int(p, (2 * t - 1) / n);
        } else {  // t == r, n does not divide 2r - 1
            child.B = node.B / pow_int(p, 2 * r);
            child.C = checked_mul(node.C, pow_int(p, ceil_div(2 * r - 1, n) * n - 2 * r));
            step.x_mult = pow_int(p, r);
            step.z_mult = pow_int(p, ceil_div(2 * r - 1, n));
        }
    } else {
        step.lemma = "cascade-fc-2";
        if (lvl.tilde) {  // t == r + 1
            child.B = node.B / pow_int(2, 2 * r);
            child.C = checked_mul(node.C, pow_int(2, ceil_div(2 * r - 1, n) * n - 2 * r));
            step.x_mult = pow_int(2, r);
            step.z_mult = pow_int(2, ceil_div(2 * r - 1, n));
        } else if ((2 * t - 1) % n == 0) {
            child.B = node.B / pow_int(2, 2 * t);
            child.C = node.C / 2;
            child.y_coprime.insert(2);
            step.x_mult = pow_int(2, t);
            step.z_mult = pow_int(2, (2 * t - 1) / n);
        } else {  // t == r with n not dividing 2r - 1
            child.B = node.B / pow_int(2, 2 * r);
            child.C = checked_mul(node.C, pow_int(2, ceil_div(2 * r - 1, n) * n - 2 * r));
            step.x_mult = pow_int(2, r);
            step.z_mult = pow_int(2, ceil_div(2 * r - 1, n));
        }
    }
    child.trail.push_back(step);
    return child;
}

// ---------------------------------------------------------------------------
// Constraint discharge
// ---------------------------------------------------------------------------

std::pair<DischargeStatus, Int> discharge_y_constraints(const CascadeNode& node,
                                                        int n) {
    auto sp = squarefree_split(node.B);
    for (Int p : node.y_coprime) {
        if (node.mode == TwoAdicMode::Tilde0 && p == 2) continue;  // y is odd
        bool divides_c = (mod_floor(node.C, p) == 0);
        bool divides_f = (mod_floor(sp.f, p) == 0);
        if (divides_c && !divides_f) continue;  // p | C', p not | f'
        if (std::gcd(p, checked_mul((Int)n, std::abs(node.C))) == 1) continue;
        return {DischargeStatus::UndecidableAt, p};
    }
    return {DischargeStatus::Free, 0};
}

// ---------------------------------------------------------------------------
// decide
// ---------------------------------------------------------------------------

namespace {

std::vector<StarCondition> node_filters(const CascadeNode& node) {
    std::vector<StarCondition> out;
    for (Int p : node.pinned) {
        if (p == 2) continue;
        out.push_back({p, StarCondition::Star, 0});
    }
    if (node.mode == TwoAdicMode::Star0)
        out.push_back({2, StarCondition::Star, 0});
    else if (node.mode == TwoAdicMode::Tilde0)
        out.push_back({2, StarCondition::TildeStar, 0});
    return out;
}

SearchBound bound_for_node(const CascadeNode& node, const SearchBound& base) {
    SearchBound b = base;
    b.conditions = node_filters(node);
    b.y_coprime.assign(node.y_coprime.begin(), node.y_coprime.end());
    b.z_coprime.assign(node.z_coprime.begin(), node.z_coprime.end());
    return b;
}

std::optional<Solution> replay_witness(const Verdict& context,
                                       const CascadeNode& node,
                                       Solution s) {
    for (const auto& step : node.trail) {
        s.x = checked_mul(s.x, step.x_mult);
        s.y = checked_mul(s.y, step.y_mult);
        s.z = checked_mul(s.z, step.z_mult);
    }
    if (!verify_solution(Instance(context.B, context.C, context.n), s.x, s.y,
                         s.z))
        throw resource_error("decide: trail replay failed verification");
    return s;
}

struct ModeOutcome {
    Status status = Status::Undecided;
    bool undischarged = false;
    Int undischarged_p = 0;
    GlobalCertificate cert;
    bool tilde = false;
};

// Decides one annulus mode of a fully pinned node.
ModeOutcome consult_mode(const CascadeNode& node, int n, bool tilde) {
    auto sp = squarefree_split(node.B);
    ModeOutcome out;
    out.tilde = tilde;
    if (tilde && mod_floor(sp.B0, 4) != 3) {
        out.status = Status::Unsolvable;
        out.cert.clause = "tilde-empty";
        return out;
    }
    // z-coprimality at 2 in the tilde mode: points force even z unless
    // 8 | C (odd x, y push the norm into 8Z).
    Int M = 1;
    for (Int p : node.z_coprime) M = checked_mul(M, p);
    if (tilde && node.z_coprime.count(2) && mod_floor(sp.B0, 8) == 7 &&
        valuation(node.C, 2) <= 2) {
        out.status = Status::Unsolvable;
        out.cert.clause = "tilde-z-parity";
        return out;
    }
    GlobalVerdict gv = tilde ? decide_star0_tilde(node.B, node.C, n, M)
                             : decide_star0(node.B, node.C, n, M);
    out.cert = gv.cert;
    out.status = gv.status;
    if (gv.status != Status::Solvable) return out;
    // y-constraint discharge for this mode
    for (Int p : node.y_coprime) {
        if (tilde && p == 2) continue;
        bool divides_c = (mod_floor(node.C, p) == 0);
        bool divides_f = (mod_floor(sp.f, p) == 0);
        if (divides_c && !divides_f) continue;
        if (std::gcd(p, checked_mul((Int)n, std::abs(node.C))) == 1) continue;
        out.undischarged = true;
        out.undischarged_p = p;
        break;
    }
    return out;
}

} // namespace

Verdict decide(Int B, Int C, int n, const SolveOptions& opts) {
    Instance inst(B, C, n);  // validates
    Verdict v;
    v.B = B;
    v.C = C;
    v.n = n;

    // (0) stacky points: -B a perfect square
    if (-B >= 0 && is_square(-B)) {
        v.status = Status::Solvable;
        v.witness = Solution{(Int)isqrt_u64((u64)(-B)), 1, 0};
        v.reason = "minus-b-square";
        return v;
    }

    // (1) everywhere-local test
    auto [loc_ok, loc_fail] = everywhere_locally_solvable(inst);
    if (!loc_ok) {
        v.status = Status::Unsolvable;
        v.local_failure = loc_fail;
        v.reason = "locally-insoluble";
        return v;
    }

    // (2) excluded-set flag; the branch expansion still runs, and verdicts
    // reached through it remain sound, but an inconclusive result is
    // reported as the excluded case it is.
    auto [excluded, excluded_p] = in_excluded_set(B, C, n);
    v.excluded_set = excluded;

    // (3) strip common squares, then branch over star levels prime by prime
    CascadeNode root;
    {
        auto [bc, strips] = strip_common_squares(B, C);
        (void)strips;
        root.B = B;
        root.C = C;
        auto fac = factorize64(std::gcd(std::abs(B), std::abs(C)));
        for (const auto& [p, e] : fac.factors) {
            (void)e;
            int cnt = 0;
            while (root.B % (p * p) == 0 && root.C % (p * p) == 0) {
                root.B /= p * p;
                root.C /= p * p;
                ++cnt;
            }
            if (cnt) {
                TrailStep step;
                step.lemma = "square-strip";
                step.p = p;
                step.t = cnt;
                step.x_mult = pow_int(p, cnt);
                step.from_B = root.B * pow_int(p, 2 * cnt);
                step.from_C = root.C * pow_int(p, 2 * cnt);
                root.trail.push_back(step);
            }
        }
    }

    size_t depth_cap = 4;
    for (const auto& [p, e] : factorize64(root.B).factors) {
        (void)p;
        depth_cap += e + 1;
    }
    for (const auto& [p, e] : factorize64(root.C).factors) {
        (void)p;
        depth_cap += e + 1;
    }

    std::deque<CascadeNode> work{root};
    std::vector<CascadeNode> open, closed;
    std::optional<GlobalCertificate> first_cert;
    size_t processed = 0;

    while (!work.empty()) {
        CascadeNode node = work.front();
        work.pop_front();
        if (++processed > 100000)
            throw resource_error("decide: node cap exceeded");
        if (node.trail.size() > depth_cap + 4)
            throw resource_error("decide: depth bound exceeded");

        auto sp = squarefree_split(node.B);
        Int next_p = 0;
        for (const auto& [p, e] : factorize64(checked_mul(sp.f, std::abs(node.C))).factors) {
            (void)e;
            if (!node.pinned.count(p)) {
                next_p = p;
                break;
            }
        }
        if (next_p != 0) {
            for (const auto& lvl : enumerate_star_levels(node.B, node.C, n, next_p))
                work.push_back(apply_cascade_step(node, n, next_p, lvl));
            continue;
        }

        // fully pinned: consult the applicable annulus modes
        std::vector<bool> modes;
        if (node.mode == TwoAdicMode::Star0) modes = {false};
        else if (node.mode == TwoAdicMode::Tilde0) modes = {true};
        else if (mod_floor(sp.B0, 4) == 3) modes = {false, true};
        else modes = {false};

        std::vector<ModeOutcome> outcomes;
        for (bool tilde : modes) outcomes.push_back(consult_mode(node, n, tilde));

        const ModeOutcome* solved = nullptr;
        for (const auto& oc : outcomes)
            if (oc.status == Status::Solvable && !oc.undischarged) solved = &oc;

        if (solved) {
            v.status = Status::Solvable;
            v.certificate = solved->cert;
            v.reason = "criterion";
            if (opts.attach_witness) {
                SearchBound wb = bound_for_node(node, opts.oracle_bound);
                wb.z_max = opts.witness_z_max;
                auto hits = search_primitive(Instance(node.B, node.C, n), wb);
                if (!hits.empty()) v.witness = replay_witness(v, node, hits[0]);
            }
            if (opts.keep_closed_nodes) {
                CascadeNode done = node;
                done.status = Status::Solvable;
                done.note = solved->cert.clause;
                closed.push_back(done);
                v.closed_nodes = closed;
            }
            return v;
        }

        bool any_open = false;
        for (const auto& oc : outcomes) {
            bool needs_witness =
                (oc.status == Status::Solvable && oc.undischarged) ||
                oc.status == Status::Undecided;
            if (!needs_witness) continue;
            // oracle attempt on the undischarged branch
            SearchBound ob = bound_for_node(node, opts.oracle_bound);
            auto hits = search_primitive(Instance(node.B, node.C, n), ob);
            if (!hits.empty()) {
                v.status = Status::Solvable;
                v.certificate = oc.cert;
                v.reason = "oracle-witness";
                v.witness = replay_witness(v, node, hits[0]);
                if (opts.keep_closed_nodes) {
                    CascadeNode done = node;
                    done.status = Status::Solvable;
                    done.note = "oracle-witness";
                    closed.push_back(done);
                    v.closed_nodes = closed;
                }
                return v;
            }
            any_open = true;
            CascadeNode on = node;
            on.status = Status::Undecided;
            on.undischarged_p = oc.undischarged_p;
            if (oc.status == Status::Undecided)
                on.note = oc.cert.clause;
            else
                on.note = oc.tilde ? "undischarged-tilde" : "undischarged";
            open.push_back(on);
        }
        if (!any_open) {
            if (!first_cert && !outcomes.empty()) first_cert = outcomes[0].cert;
            CascadeNode done = node;
            done.status = Status::Unsolvable;
            done.note = outcomes.empty() ? "no-mode" : outcomes[0].cert.clause;
            closed.push_back(done);
        }
    }

    if (!open.empty()) {
        v.status = Status::Undecided;
        v.open_nodes = open;
        if (excluded) {
            v.reason = "excluded-set";
        } else {
            bool parity = false;
            for (const auto& on : open)
                if (on.note == "class-parity-unproven") parity = true;
            v.reason = parity ? "open-branches" : "undischarged-y-constraint";
        }
    } else {
        v.status = Status::Unsolvable;
        v.certificate = first_cert.has_value() ? *first_cert
                                               : GlobalCertificate{};
        v.reason = "all-branches-empty";
    }
    if (opts.keep_closed_nodes) v.closed_nodes = closed;
    return v;
}

Instance reduce_general_A(Int A, Int B, Int C, int n) {
    if (A == 0) throw precondition_error("reduce_general_A: A must be nonzero");
    if (squarefree_split(A).f != 1)
        throw precondition_error("reduce_general_A: A must be squarefree");
    return Instance(checked_mul(A, B), checked_mul(A, C), n);
}

} // namespace fermat22n
