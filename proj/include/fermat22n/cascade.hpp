#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fermat22n/global.hpp"
#include "fermat22n/local.hpp"
#include "fermat22n/oracle.hpp"

namespace fermat22n {

// Two-adic pin state of a node: unconstrained, pinned to the plain annulus
// condition, or pinned to its dyadic refinement.
enum class TwoAdicMode { Unconstrained, Star0, Tilde0 };
const char* two_adic_mode_name(TwoAdicMode m);

struct TrailStep {
    std::string lemma;  // square-strip | pin | cascade-f | cascade-f-2 |
                        // cascade-y | cascade-y-2 | cascade-fc-odd | cascade-fc-2
    Int p = 0;
    int t = 0;
    bool tilde = false;
    Int x_mult = 1, y_mult = 1, z_mult = 1;
    Int from_B = 0, from_C = 0;
};

struct CascadeNode {
    Int B = 0, C = 0;
    std::set<Int> pinned;     // primes carrying a level-0 condition
    TwoAdicMode mode = TwoAdicMode::Unconstrained;
    std::set<Int> y_coprime;
    std::set<Int> z_coprime;
    std::vector<TrailStep> trail;

    // consult-time annotations (for reporting)
    Status status = Status::Undecided;
    std::string note;
    Int undischarged_p = 0;
};

// One surviving star level at a prime; `tilde` names the branch kind at 2.
struct StarLevel {
    int t = 0;
    bool tilde = false;
    friend bool operator==(const StarLevel&, const StarLevel&) = default;
};

struct Verdict {
    Status status = Status::Undecided;
    std::optional<Solution> witness;
    std::optional<GlobalCertificate> certificate;
    std::vector<CascadeNode> open_nodes;
    std::vector<CascadeNode> closed_nodes;
    std::optional<LocalVerdict> local_failure;
    bool excluded_set = false;
    std::string reason;
    Int B = 0, C = 0;
    int n = 3;
};

// Step 1 of the reduction: divide (B, C) by p^2 while p^2 divides both.
// Returns the stripped pair and the number of strips applied.
std::pair<std::pair<Int, Int>, int> strip_common_squares(Int B, Int C);

// Membership in the excluded coefficient set, with the witnessing p | n.
std::pair<bool, Int> in_excluded_set(Int B, Int C, int n);

// The finite set of star levels at p not ruled empty by the applicable
// reduction lemma. Requires p | fC with the square part of gcd(B, C)
// already stripped.
std::vector<StarLevel> enumerate_star_levels(Int B, Int C, int n, Int p);

// Applies the reduction attached to one admissible level.
CascadeNode apply_cascade_step(const CascadeNode& node, int n, Int p,
                               StarLevel lvl);

enum class DischargeStatus { Free, UndecidableAt };
// Star-mode discharge of the y-coprimality constraints.
std::pair<DischargeStatus, Int> discharge_y_constraints(const CascadeNode& node,
                                                        int n);

struct SolveOptions {
    SearchBound oracle_bound;    // fallback searches on open branches
    Int witness_z_max = 50;      // opportunistic witness attachment
    bool attach_witness = true;
    bool keep_closed_nodes = false;
};

// The full decision pipeline.
Verdict decide(Int B, Int C, int n, const SolveOptions& opts = {});

// Squarefree A: primitive solutions of A x^2 + B y^2 = C z^n biject with
// those of the returned instance.
Instance reduce_general_A(Int A, Int B, Int C, int n);

} // namespace fermat22n
