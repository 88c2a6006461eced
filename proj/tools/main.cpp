// Command line front end: solve / local / global / oracle / classgroup /
// stats subcommands with stable JSON output. Exit codes: 0 decided verdict
// or successful report, 2 undecided, 1 usage or resource errors.

#include <chrono>
#include <fstream>
#include <iostream>

#include <mpfr.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "fermat22n/cascade.hpp"
#include "fermat22n/stats.hpp"

using json = nlohmann::ordered_json;
using namespace fermat22n;

namespace {

std::string dec(Int v) { return std::to_string(v); }

std::string dec(const mpz_class& v) { return v.get_str(); }

json form_json(const QForm& f) {
    return json{{"a", dec(f.a)}, {"b", dec(f.b)}, {"c", dec(f.c)}};
}

json solution_json(const Solution& s) {
    return json{{"x", dec(s.x)}, {"y", dec(s.y)}, {"z", dec(s.z)}};
}

json vector_json(const std::vector<Int>& v) {
    json a = json::array();
    for (Int x : v) a.push_back(dec(x));
    return a;
}

json order_json(const QuadOrder& O) {
    return json{{"b0", dec(O.B0)},
                {"f", dec(O.f)},
                {"half_basis", O.half_basis},
                {"discriminant", dec(O.disc)},
                {"case", O.case_id}};
}

json certificate_json(const GlobalCertificate& c) {
    return json{{"order", order_json(c.order)},
                {"divisors", vector_json(c.divisors)},
                {"j_plus_vector", vector_json(c.j_plus_vector)},
                {"membership", c.membership},
                {"clause", c.clause}};
}

json local_verdict_json(const LocalVerdict& v) {
    return json{{"p", dec(v.p)},
                {"k", v.k},
                {"ell", v.ell},
                {"solvable", v.solvable},
                {"case", local_case_name(v.case_label)}};
}

json node_json(const CascadeNode& node, bool with_trail) {
    json pins = json::array(), yc = json::array(), zc = json::array();
    for (Int p : node.pinned) pins.push_back(dec(p));
    for (Int p : node.y_coprime) yc.push_back(dec(p));
    for (Int p : node.z_coprime) zc.push_back(dec(p));
    json j{{"B", dec(node.B)},
           {"C", dec(node.C)},
           {"pinned", pins},
           {"mode", two_adic_mode_name(node.mode)},
           {"y_coprime", yc},
           {"z_coprime", zc},
           {"status", status_name(node.status)},
           {"note", node.note}};
    if (node.undischarged_p) j["undischarged_p"] = dec(node.undischarged_p);
    if (with_trail) {
        json trail = json::array();
        for (const auto& s : node.trail)
            trail.push_back(json{{"lemma", s.lemma},
                                 {"p", dec(s.p)},
                                 {"t", s.t},
                                 {"tilde", s.tilde},
                                 {"x_mult", dec(s.x_mult)},
                                 {"y_mult", dec(s.y_mult)},
                                 {"z_mult", dec(s.z_mult)},
                                 {"from_B", dec(s.from_B)},
                                 {"from_C", dec(s.from_C)}});
        j["trail"] = trail;
    }
    return j;
}

json verdict_json(const Verdict& v, bool trace) {
    json j{{"status", status_name(v.status)}, {"reason", v.reason}};
    j["witness"] = v.witness ? solution_json(*v.witness) : json(nullptr);
    j["excluded_set"] = v.excluded_set;
    j["local_failure"] =
        v.local_failure ? local_verdict_json(*v.local_failure) : json(nullptr);
    j["certificate"] =
        v.certificate ? certificate_json(*v.certificate) : json(nullptr);
    json open = json::array();
    for (const auto& node : v.open_nodes) open.push_back(node_json(node, trace));
    j["open_nodes"] = open;
    if (trace) {
        json closed = json::array();
        for (const auto& node : v.closed_nodes)
            closed.push_back(node_json(node, true));
        j["closed_nodes"] = closed;
    }
    return j;
}

int emit(const std::string& command, const json& input, const json& result,
         bool as_json, double ms, const std::string& human) {
    if (as_json) {
        json envelope{{"schema_version", "1"},
                      {"command", command},
                      {"input", input},
                      {"result", result}};
        envelope["timings"] = json{{"total_ms", ms}};
        std::cout << envelope.dump(2) << "\n";
    } else {
        std::cout << human;
    }
    return 0;
}

std::string rational_decimal(const mpq_class& q, int digits, bool round_up) {
    mpfr_t x;
    mpfr_init2(x, 256);
    mpfr_set_q(x, q.get_mpq_t(), round_up ? MPFR_RNDU : MPFR_RNDD);
    char buf[128];
    mpfr_snprintf(buf, sizeof buf, round_up ? "%.*RUf" : "%.*RDf", digits, x);
    mpfr_clear(x);
    return buf;
}

json enclosure_json(const ConstantEnclosure& e) {
    return json{{"name", e.name},
                {"X", dec(e.X)},
                {"lower", e.lower.get_str()},
                {"upper", e.upper.get_str()},
                {"lower_decimal", rational_decimal(e.lower, 9, false)},
                {"upper_decimal", rational_decimal(e.upper, 9, true)}};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"decision engine for x^2 + B y^2 = C z^n, n odd"};
    app.require_subcommand(1);

    // ---- solve ----
    Int sB = 0, sC = 0;
    int sn = 3;
    Int s_zmax = 200, s_ymax = 100'000;
    bool s_trace = false, s_json = false;
    auto* solve_cmd = app.add_subcommand("solve", "decide integral solubility");
    solve_cmd->add_option("B", sB, "coefficient B")->required();
    solve_cmd->add_option("C", sC, "coefficient C")->required();
    solve_cmd->add_option("--n", sn, "odd exponent n >= 3")->required();
    solve_cmd->add_option("--bound", s_zmax, "oracle |z| bound");
    solve_cmd->add_option("--ymax", s_ymax, "oracle |y| bound");
    solve_cmd->add_flag("--trace", s_trace, "emit the full node tree");
    solve_cmd->add_flag("--json", s_json, "JSON output");

    // ---- local ----
    Int lB = 0, lC = 0;
    int ln = 3;
    bool l_json = false;
    auto* local_cmd = app.add_subcommand("local", "everywhere-local test");
    local_cmd->add_option("B", lB)->required();
    local_cmd->add_option("C", lC)->required();
    local_cmd->add_option("--n", ln)->required();
    local_cmd->add_flag("--json", l_json);

    // ---- global ----
    Int gB = 0, gC = 0, gM = 1;
    int gn = 3;
    bool g_tilde = false, g_json = false;
    auto* global_cmd =
        app.add_subcommand("global", "base-case criterion for one annulus mode");
    global_cmd->add_option("B", gB)->required();
    global_cmd->add_option("C", gC)->required();
    global_cmd->add_option("--n", gn)->required();
    global_cmd->add_option("--M", gM, "z-coprimality parameter");
    global_cmd->add_flag("--tilde", g_tilde, "decide the dyadic refinement");
    global_cmd->add_flag("--json", g_json);

    // ---- oracle ----
    Int oB = 0, oC = 0, o_zmax = 0, o_ymax = 100'000;
    int on = 3;
    bool o_json = false, o_star0 = false, o_tilde0 = false;
    std::vector<Int> o_ycop, o_zcop;
    auto* oracle_cmd = app.add_subcommand("oracle", "primitive solution search");
    oracle_cmd->add_option("B", oB)->required();
    oracle_cmd->add_option("C", oC)->required();
    oracle_cmd->add_option("--n", on)->required();
    oracle_cmd->add_option("--zmax", o_zmax)->required();
    oracle_cmd->add_option("--ymax", o_ymax);
    oracle_cmd->add_option("--ycoprime", o_ycop, "filter: p does not divide y");
    oracle_cmd->add_option("--zcoprime", o_zcop, "filter: p does not divide z");
    oracle_cmd->add_flag("--star0", o_star0, "filter: full annulus condition");
    oracle_cmd->add_flag("--tilde0", o_tilde0, "filter: dyadic refinement");
    oracle_cmd->add_flag("--json", o_json);

    // ---- classgroup ----
    Int cg_D = 0;
    bool cg_json = false;
    auto* cg_cmd = app.add_subcommand("classgroup", "class group of a discriminant");
    cg_cmd->add_option("D", cg_D)->required();
    cg_cmd->add_flag("--json", cg_json);

    // ---- stats ----
    auto* stats_cmd = app.add_subcommand("stats", "counting experiments");
    stats_cmd->require_subcommand(1);
    int st_n = 3, st_threads = 1;
    Int st_T = 0;
    std::string st_mode = "local", st_out;
    bool st_json = false;
    auto* sweep_cmd = stats_cmd->add_subcommand("sweep", "coefficient sweep");
    sweep_cmd->add_option("--n", st_n)->required();
    sweep_cmd->add_option("--T", st_T)->required();
    sweep_cmd->add_option("--mode", st_mode)
        ->check(CLI::IsMember({"local", "global"}));
    sweep_cmd->add_option("--out", st_out, "CSV output path");
    sweep_cmd->add_option("--threads", st_threads);
    sweep_cmd->add_flag("--json", st_json);

    Int kX = 50'000;
    bool k_json = false;
    auto* const_cmd = stats_cmd->add_subcommand("constants", "Euler constants");
    const_cmd->add_option("--X", kX, "truncation bound");
    const_cmd->add_flag("--json", k_json);

    CLI11_PARSE(app, argc, argv);
    auto t0 = std::chrono::steady_clock::now();
    auto ms = [&] {
        return std::chrono::duration<double, std::milli>(
                   std::chrono::steady_clock::now() - t0)
            .count();
    };

    try {
        if (*solve_cmd) {
            SolveOptions opts;
            opts.oracle_bound.z_max = s_zmax;
            opts.oracle_bound.y_max = s_ymax;
            opts.keep_closed_nodes = s_trace;
            Verdict v = decide(sB, sC, sn, opts);
            json input{{"B", dec(sB)}, {"C", dec(sC)}, {"n", dec(sn)}};
            std::string human = std::string(status_name(v.status));
            if (v.witness)
                human += "  witness (" + dec(v.witness->x) + ", " +
                         dec(v.witness->y) + ", " + dec(v.witness->z) + ")";
            human += "  [" + v.reason + "]\n";
            emit("solve", input, verdict_json(v, s_trace), s_json, ms(), human);
            return v.status == Status::Undecided ? 2 : 0;
        }
        if (*local_cmd) {
            Instance inst(lB, lC, ln);
            auto [ok, fail] = everywhere_locally_solvable(inst);
            json checked = json::array();
            for (const auto& [p, e] : factorize64(lC).factors)
                if (e % 2 == 1)
                    checked.push_back(local_verdict_json(local_solvable_at(inst, p)));
            json result{{"solvable", ok},
                        {"checked", checked},
                        {"failing", fail ? local_verdict_json(*fail) : json(nullptr)}};
            json input{{"B", dec(lB)}, {"C", dec(lC)}, {"n", dec(ln)}};
            std::string human = ok ? "locally solvable everywhere\n"
                                   : "locally insoluble at p = " + dec(fail->p) + "\n";
            emit("local", input, result, l_json, ms(), human);
            return 0;
        }
        if (*global_cmd) {
            GlobalVerdict v = g_tilde ? decide_star0_tilde(gB, gC, gn, gM)
                                      : decide_star0(gB, gC, gn, gM);
            json result{{"status", status_name(v.status)},
                        {"tilde", g_tilde},
                        {"M", dec(v.M)},
                        {"certificate", certificate_json(v.cert)}};
            json input{{"B", dec(gB)}, {"C", dec(gC)}, {"n", dec(gn)}};
            std::string human =
                std::string(status_name(v.status)) + "  [" + v.cert.clause + "]\n";
            emit("global", input, result, g_json, ms(), human);
            return 0;
        }
        if (*oracle_cmd) {
            Instance inst(oB, oC, on);
            SearchBound bound;
            bound.z_max = o_zmax;
            bound.y_max = o_ymax;
            bound.y_coprime = o_ycop;
            bound.z_coprime = o_zcop;
            auto hits = search_primitive(inst, bound);
            if (o_star0 || o_tilde0) {
                auto sp = squarefree_split(oB);
                std::vector<Solution> kept;
                for (const auto& h : hits) {
                    if (o_star0 && !star0_everywhere(h.x, h.y, sp.f, sp.B0))
                        continue;
                    if (o_tilde0 && !tilde0_everywhere(h.x, h.y, sp.f, sp.B0))
                        continue;
                    kept.push_back(h);
                }
                hits = kept;
            }
            if (o_json) {
                json arr = json::array();
                for (const auto& h : hits) arr.push_back(solution_json(h));
                json input{{"B", dec(oB)}, {"C", dec(oC)}, {"n", dec(on)},
                           {"zmax", dec(o_zmax)}, {"ymax", dec(o_ymax)}};
                emit("oracle", input, json{{"hits", arr}}, true, ms(), "");
            } else {
                for (const auto& h : hits)
                    std::cout << solution_json(h).dump() << "\n";
            }
            return 0;
        }
        if (*cg_cmd) {
            auto G = class_group(cg_D);
            json gens = json::array(), reduced = json::array();
            for (const auto& g : G->generators) gens.push_back(form_json(g));
            for (const auto& f : G->reduced_forms) reduced.push_back(form_json(f));
            json result{{"discriminant", dec(G->discriminant)},
                        {"class_number", dec(G->order())},
                        {"elementary_divisors", vector_json(G->elementary_divisors)},
                        {"generators", gens},
                        {"reduced_forms", reduced}};
            json input{{"D", dec(cg_D)}};
            std::string human = "h(" + dec(cg_D) + ") = " + dec(G->order()) + "\n";
            emit("classgroup", input, result, cg_json, ms(), human);
            return 0;
        }
        if (*sweep_cmd) {
            SweepOptions opts;
            opts.mode = st_mode == "local" ? SweepMode::Local : SweepMode::Global;
            opts.threads = st_threads;
            opts.solve.oracle_bound.z_max = 200;
            opts.solve.oracle_bound.y_max = 100'000;
            std::ofstream csv;
            if (!st_out.empty()) {
                csv.open(st_out, std::ios::binary);  // LF line endings
                if (!csv) throw precondition_error("cannot open CSV output path");
                csv << "B,C,local,verdict,witness\n";
                opts.row_sink = [&](const SweepRow& r) {
                    csv << r.B << ',' << r.C << ',' << (r.local ? 1 : 0) << ',';
                    if (r.local && opts.mode == SweepMode::Global)
                        csv << status_name(r.verdict);
                    csv << ',';
                    if (r.witness)
                        csv << r.witness->x << ':' << r.witness->y << ':'
                            << r.witness->z;
                    csv << '\n';
                };
            }
            SweepResult res = sweep(st_n, st_T, opts);
            json result{{"n", dec(res.n)},
                        {"T", dec(res.T)},
                        {"mode", st_mode},
                        {"total_pairs", dec(res.total_pairs)},
                        {"locally_soluble", dec(res.locally_soluble)},
                        {"decided_solvable", dec(res.decided_solvable)},
                        {"decided_unsolvable", dec(res.decided_unsolvable)},
                        {"undecided", dec(res.undecided)}};
            json input{{"n", dec(st_n)}, {"T", dec(st_T)}, {"mode", st_mode}};
            std::string human = "locally soluble " + dec(res.locally_soluble) +
                                " / " + dec(res.total_pairs) + "\n";
            if (opts.mode == SweepMode::Global)
                human += "solvable " + dec(res.decided_solvable) + ", unsolvable " +
                         dec(res.decided_unsolvable) + ", undecided " +
                         dec(res.undecided) + "\n";
            emit("stats sweep", input, result, st_json, ms(), human);
            return 0;
        }
        if (*const_cmd) {
            auto k1 = kappa1(kX);
            auto k2 = kappa2(kX);
            json result{{"kappa1", enclosure_json(k1)},
                        {"kappa2", enclosure_json(k2)}};
            json input{{"X", dec(kX)}};
            std::string human =
                "kappa1 in [" + rational_decimal(k1.lower, 9, false) + ", " +
                rational_decimal(k1.upper, 9, true) + "]\n" + "kappa2 in [" +
                rational_decimal(k2.lower, 9, false) + ", " +
                rational_decimal(k2.upper, 9, true) + "]\n";
            emit("stats constants", input, result, k_json, ms(), human);
            return 0;
        }
    } catch (const precondition_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const resource_error& e) {
        std::cerr << "resource error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
