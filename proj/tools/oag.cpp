// oag: command-line front end for the ordered-abelian-group toolkit.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "oag/invariants.hpp"
#include "oag/oracle.hpp"
#include "oag/parse.hpp"
#include "oag/patterns.hpp"
#include "oag/qe.hpp"
#include "oag/solver.hpp"
#include "oag/vcd.hpp"

namespace {

using namespace oag;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

GroupSpec load_spec(const std::string& path) {
    if (!std::filesystem::exists(path)) throw UsageError("spec file not found: " + path);
    return read_group_spec_file(path);
}

std::string read_file(const std::string& path) {
    if (!std::filesystem::exists(path)) throw UsageError("file not found: " + path);
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Box parse_box(const std::string& s) {
    // lo:hi:denominator, all integers.
    Box box;
    if (s.empty()) return box;
    std::istringstream in(s);
    std::string part;
    std::vector<long long> v;
    while (std::getline(in, part, ':')) v.push_back(std::stoll(part));
    if (v.size() != 3 || v[0] > v[1] || v[2] < 1) throw UsageError("--box wants lo:hi:den");
    box.lo = Rational(v[0]);
    box.hi = Rational(v[1]);
    box.denominator = v[2];
    return box;
}

std::vector<long long> jump_levels(const std::vector<ConvexSubgroup>& js) {
    std::vector<long long> out;
    for (const auto& j : js) out.push_back((long long)j.level());
    return out;
}

std::string join_jumps(const std::vector<ConvexSubgroup>& js) {
    std::string s;
    for (std::size_t i = 0; i < js.size(); ++i) {
        if (i) s += ",";
        s += js[i].str();
    }
    return s;
}

int cmd_invariants(const GroupSpec& g, bool machine) {
    std::set<long long> primes = g.relevant_primes();
    primes.insert(2);
    primes.insert(3);
    if (machine) {
        std::cout << "rank=" << g.rank() << " trivial=" << (g.trivial() ? 1 : 0)
                  << " omega_tower=" << (g.omega_tower() ? 1 : 0) << "\n";
    } else {
        std::cout << "spec: rank " << g.rank() << (g.omega_tower() ? " + omega tower" : "") << "\n";
    }
    for (long long p : primes) {
        std::vector<ConvexSubgroup> jumps, inf;
        try {
            jumps = regular_jumps(g, p);
            inf = infinite_jumps(g, p);
        } catch (const domain_error&) {  // unbounded regular rank at p
            if (machine)
                std::cout << "p=" << p << " dim=" << dim_p(g, p).str() << " jumps=unbounded\n";
            else
                std::cout << "p=" << p << ": dim_p = " << dim_p(g, p).str()
                          << ", RJ_p unbounded\n";
            continue;
        }
        if (machine) {
            std::cout << "p=" << p << " dim=" << dim_p(g, p).str() << " jumps=" << join_jumps(jumps)
                      << " infinite=" << join_jumps(inf) << "\n";
        } else {
            std::cout << "p=" << p << ": dim_p = " << dim_p(g, p).str() << ", RJ_p = {"
                      << join_jumps(jumps) << "}, infinite jumps = {" << join_jumps(inf) << "}\n";
        }
    }
    return 0;
}

int cmd_classify(const GroupSpec& g, bool machine) {
    Classification c = classify(g);
    if (machine) {
        std::cout << "kind=" << kind_name(c.kind) << " dp_rank=" << c.dp_rank.str() << "\n";
    } else {
        std::cout << "kind: " << kind_name(c.kind) << "\ndp-rank: " << c.dp_rank.str()
                  << "\nreason: " << c.reason << "\nvca-number: " << vca_number(g).str() << "\n";
    }
    return 0;
}

int cmd_qe(const GroupSpec& g, const std::string& formula_text, const std::string& trace_path,
           bool machine) {
    FormulaPtr f = parse_formula(formula_text, g);
    EliminationTrace trace;
    QeOptions opt;
    if (!trace_path.empty()) opt.trace = &trace;
    FormulaPtr out = eliminate_all(f, g, opt);
    if (!trace_path.empty()) {
        std::ofstream tf(trace_path);
        tf << "input: " << trace.input << "\n";
        for (const auto& s : trace.steps) tf << s << "\n";
        tf << "output: " << trace.output << "\n";
    }
    if (machine)
        std::cout << "output=" << print(out) << "\n";
    else
        std::cout << print(out) << "\n";
    return 0;
}

int cmd_solve(const GroupSpec& g, const std::string& system_path) {
    CongruenceSystem sys;
    sys.group = &g;
    std::istringstream in(read_file(system_path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        bool blank = true;
        for (char c : line)
            if (!isspace((unsigned char)c)) blank = false;
        if (blank) continue;
        FormulaPtr f = parse_formula(line, g);
        if (f->kind != Formula::Kind::cong || !f->modulus ||
            f->lhs.coeffs().size() != 1 || f->lhs.coeff_of("x") != 1 ||
            !f->lhs.const_coords().empty() || !f->rhs.coeffs().empty())
            throw domain_error("line " + std::to_string(line_no) +
                               ": expected 'x == <element> mod <subgroup>'");
        sys.constraints.push_back({f->rhs.evaluate(g, {}), *f->modulus});
    }
    if (sys.constraints.empty()) throw domain_error("system file has no constraints");
    if (auto bad = check_compatibility(sys)) {
        std::cout << "UNSOLVABLE pair=(" << bad->first + 1 << "," << bad->second + 1 << ")\n";
        return 0;
    }
    auto sol = solve(sys);
    std::cout << "SOLVABLE base=" << sol->base.str() << " modulus=" << sol->modulus.str() << "\n";
    return 0;
}

int cmd_check_pattern(const GroupSpec& g, const std::string& pattern_path, bool machine) {
    Pattern p = parse_pattern(read_file(pattern_path), g);
    CheckReport rep = check(p, g);
    if (machine) {
        std::cout << "valid=" << (rep.valid ? 1 : 0) << " paths=" << rep.paths_checked
                  << " failures=" << rep.failures.size() << " unbounded=" << (rep.unbounded ? 1 : 0)
                  << "\n";
    } else {
        std::cout << (rep.valid ? "VALID" : "INVALID") << ": " << rep.note << "\n";
        for (const auto& fmsg : rep.failures) std::cout << "  " << fmsg << "\n";
    }
    return 0;
}

int cmd_make_pattern(const GroupSpec& g, std::size_t depth, std::size_t cols,
                     const std::string& out_path) {
    Pattern p = construct_dp_witness(g, depth, cols);
    std::string text = format_pattern(p);
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        out << text;
    }
    std::cout << text;
    return 0;
}

int cmd_vc_estimate(const GroupSpec& g, const std::string& formula_text,
                    const std::string& sizes_text, std::size_t trials, std::uint64_t seed,
                    bool machine) {
    FormulaPtr f = parse_formula(formula_text, g);
    std::vector<std::size_t> sizes;
    std::istringstream in(sizes_text);
    std::string part;
    while (std::getline(in, part, ',')) sizes.push_back((std::size_t)std::stoull(part));
    if (sizes.empty()) throw UsageError("--sizes wants a comma-separated list");
    VcEstimate est = estimate_dual_vc(f, g, sizes, trials, seed);
    for (const auto& s : est.samples) {
        if (machine)
            std::cout << "size=" << s.size << " max_atoms=" << s.max_atoms
                      << " bound=" << s.bound.str() << " within=" << (s.within_bound ? 1 : 0)
                      << "\n";
        else
            std::cout << "|A| = " << s.size << ": max atoms " << s.max_atoms << " (bound "
                      << s.bound.str() << ")\n";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", est.slope);
    if (machine)
        std::cout << "slope=" << buf << " all_within_bound=" << (est.all_within_bound ? 1 : 0)
                  << "\n";
    else
        std::cout << "slope: " << buf << (est.all_within_bound ? "" : " (BOUND VIOLATED)") << "\n";
    return 0;
}

// QE fuzz: one-quantifier formulas; the eliminated output must agree with
// brute-force enumeration of witnesses on every assignment in the box.
// Grid over the box, thinned coordinatewise until its size fits the cap so
// higher ranks stay tractable. Thinning the witness grid is sound: it can
// only miss witnesses (which skips the check), never invent them.
std::vector<GroupElement> box_grid(const GroupSpec& g, const Box& box, std::size_t cap) {
    std::vector<std::vector<Rational>> per(g.rank());
    for (std::size_t c = 1; c <= g.rank(); ++c) per[c - 1] = box.coordinate_values(g.component(c));
    for (bool thinned = true; thinned;) {
        std::size_t total = 1;
        for (const auto& v : per) total *= std::max<std::size_t>(v.size(), 1);
        if (total <= cap) break;
        thinned = false;
        auto longest = std::max_element(per.begin(), per.end(), [](const auto& a, const auto& b) {
            return a.size() < b.size();
        });
        if (longest->size() > 1) {
            std::vector<Rational> kept;
            for (std::size_t i = 0; i < longest->size(); i += 2) kept.push_back((*longest)[i]);
            *longest = std::move(kept);
            thinned = true;
        }
    }
    std::vector<GroupElement> grid;
    std::vector<std::size_t> idx(g.rank(), 0);
    while (true) {
        std::vector<Rational> coords(g.rank());
        for (std::size_t c = 0; c < g.rank(); ++c) coords[c] = per[c][idx[c]];
        grid.emplace_back(g, coords);
        std::size_t c = g.rank();
        while (c > 0 && ++idx[c - 1] == per[c - 1].size()) idx[--c] = 0;
        if (c == 0) break;
    }
    return grid;
}

OracleReport qe_suite(const GroupSpec& g, std::uint64_t seed, std::size_t trials, const Box& box) {
    OracleReport rep;
    std::mt19937_64 rng(seed);
    Box witness_box = box;
    witness_box.lo = box.lo - Rational(24);  // room for one full congruence period
    witness_box.hi = box.hi + Rational(24);
    std::vector<GroupElement> grid = box_grid(g, box, 400);
    std::vector<GroupElement> witnesses = box_grid(g, witness_box, 20000);
    for (std::size_t t = 0; t < trials; ++t) {
        FormulaPtr body = random_qf_formula(g, rng, {"x", "y"}, 3);
        FormulaPtr out;
        try {
            out = eliminate_exists(Formula::make_exists("x", body), g);
        } catch (const domain_error&) {
            continue;  // derived-free by construction; budget overruns skipped
        }
        for (const auto& y : grid) {
            ++rep.checks;
            std::map<std::string, GroupElement> asg{{"y", y}};
            bool claimed = evaluate(out, g, asg);
            bool found = false;
            auto full = asg;
            for (const auto& x : witnesses) {
                full["x"] = x;
                if (oracle_evaluate(body, g, full)) {
                    found = true;
                    break;
                }
            }
            if (claimed && !found) continue;  // witness may lie outside the box: not a mismatch
            if (claimed != found) {
                ++rep.failures;
                rep.messages.push_back("qe mismatch: " + print(body) + " at y=" + y.str());
            }
        }
    }
    return rep;
}

OracleReport patterns_suite(const GroupSpec& g, std::size_t m) {
    OracleReport rep;
    ExtNat r = dp_rank(g);
    std::size_t depth = (r.is_finite() && r.value() < 3) ? (std::size_t)r.value() : 3;
    if (depth == 0) throw domain_error("trivial group: no pattern suite");
    Pattern p = construct_dp_witness(g, depth, m);
    CheckReport rep1 = check(p, g);
    rep.checks += rep1.paths_checked;
    if (!rep1.valid) {
        rep.failures += rep1.failures.size();
        for (const auto& fmsg : rep1.failures) rep.messages.push_back("witness: " + fmsg);
    }
    return rep;
}

int cmd_oracle_check(const GroupSpec& g, const std::string& suite, std::uint64_t seed,
                     std::size_t trials, const Box& box) {
    OracleReport rep;
    if (suite == "crt" || suite == "staircase")
        rep = run_oracle_suite(g, suite, seed, trials);
    else if (suite == "qe")
        rep = qe_suite(g, seed, std::min<std::size_t>(trials, 50), box);
    else if (suite == "patterns")
        rep = patterns_suite(g, 3);
    else
        throw UsageError("unknown suite '" + suite + "' (crt, staircase, qe, patterns)");
    std::cout << "suite=" << suite << " checks=" << rep.checks << " failures=" << rep.failures
              << " " << (rep.failures == 0 ? "PASS" : "FAIL") << "\n";
    for (const auto& m : rep.messages) std::cout << "  " << m << "\n";
    return rep.failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact computation on ordered abelian groups (lex products of rank-1 parts)"};
    app.require_subcommand(1);

    bool machine = false;
    std::uint64_t seed = 42;
    app.add_flag("--machine", machine, "stable key=value output");
    app.add_option("--seed", seed, "RNG seed for randomized verbs");

    std::string spec_path, formula_text, file_arg, trace_path, out_path, sizes = "4,8,16,32";
    std::string suite = "crt", box_text;
    std::size_t depth = 2, cols = 3, trials = 200;

    auto* inv = app.add_subcommand("invariants", "per-prime dimensions and regular jumps");
    inv->add_option("spec", spec_path)->required();

    auto* cls = app.add_subcommand("classify", "dp-rank classification");
    cls->add_option("spec", spec_path)->required();

    auto* qe = app.add_subcommand("qe", "quantifier elimination");
    qe->add_option("spec", spec_path)->required();
    qe->add_option("formula", formula_text)->required();
    qe->add_option("--trace", trace_path, "write an elimination trace to this file");

    auto* slv = app.add_subcommand("solve", "congruence system solving");
    slv->add_option("spec", spec_path)->required();
    slv->add_option("system", file_arg)->required();

    auto* chk = app.add_subcommand("check-pattern", "check a pattern file");
    chk->add_option("spec", spec_path)->required();
    chk->add_option("pattern", file_arg)->required();

    auto* mk = app.add_subcommand("make-pattern", "construct a dp-rank witness pattern");
    mk->add_option("spec", spec_path)->required();
    mk->add_option("--depth", depth, "pattern depth (rows)")->required();
    mk->add_option("--cols", cols, "columns M");
    mk->add_option("--out", out_path, "also write the pattern to this file");

    auto* vc = app.add_subcommand("vc-estimate", "empirical dual VC-density");
    vc->add_option("spec", spec_path)->required();
    vc->add_option("formula", formula_text)->required();
    vc->add_option("--sizes", sizes, "comma-separated parameter-set sizes");
    vc->add_option("--trials", trials, "random parameter sets per size");

    auto* orc = app.add_subcommand("oracle-check", "fuzz comparison against the brute-force oracle");
    orc->add_option("spec", spec_path)->required();
    orc->add_option("--suite", suite, "crt | staircase | qe | patterns");
    orc->add_option("--trials", trials, "number of random trials");
    orc->add_option("--box", box_text, "enumeration box lo:hi:den");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        GroupSpec g = load_spec(spec_path);
        if (inv->parsed()) return cmd_invariants(g, machine);
        if (cls->parsed()) return cmd_classify(g, machine);
        if (qe->parsed()) return cmd_qe(g, formula_text, trace_path, machine);
        if (slv->parsed()) return cmd_solve(g, file_arg);
        if (chk->parsed()) return cmd_check_pattern(g, file_arg, machine);
        if (mk->parsed()) return cmd_make_pattern(g, depth, cols, out_path);
        if (vc->parsed())
            return cmd_vc_estimate(g, formula_text, sizes, std::min<std::size_t>(trials, 64), seed,
                                   machine);
        if (orc->parsed()) {
            Box box = parse_box(box_text);
            if (box_text.empty()) {
                box.lo = Rational(-10);
                box.hi = Rational(10);
                box.denominator = 2;
            }
            return cmd_oracle_check(g, suite, seed, trials, box);
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const parse_error& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 1;
    } catch (const domain_error& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
