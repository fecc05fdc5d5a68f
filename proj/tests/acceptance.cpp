// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "support/fixtures.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "support/pipeline.hpp"
#include "threatfix/export.hpp"
#include "threatfix/repair.hpp"
#include "threatfix/solver_stack.hpp"

using namespace threatfix;

namespace {

struct Verdict {
    bool ok = true;
    std::string detail;

    void fail(const std::string& why) {
        if (ok) detail = why;
        ok = false;
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void within(Verdict& v, Clock::time_point t0, double limit) {
    const double s = seconds_since(t0);
    if (s > limit) v.fail("took " + std::to_string(s) + " s, limit " + std::to_string(limit) + " s");
}

std::string golden(const std::string& name) {
    std::ifstream in(std::string(THREATFIX_GOLDEN_DIR) + "/" + name, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

bool satisfies_all(const std::vector<std::vector<int>>& clauses, const std::vector<bool>& model) {
    return std::all_of(clauses.begin(), clauses.end(),
                       [&](const auto& c) { return clause_satisfied(std::span<const Lit>(c), model); });
}

// Instances where nothing matches have the empty repair and say little.
bool matched_any(const SystemModel& m, const RuleSet& rules) {
    return std::any_of(rules.begin(), rules.end(), [&](const Rule& r) { return tftest::naive_eval(m, r.formula); });
}

std::vector<Formula> formulas(const RuleSet& rules) {
    std::vector<Formula> out;
    for (const auto& r : rules) out.push_back(r.formula);
    return out;
}

std::string change_text(const SystemModel& m, const Change& c) {
    return m.id(m.cells()[c.cell].item) + "/" + m.meta().attribute(m.cells()[c.cell].attr).name + ":" +
           m.value_name(c.cell, c.from) + "->" + m.value_name(c.cell, c.to);
}

// Random models at the sizes of the detection criterion, shared by the path
// criterion so both look at the same models.
std::vector<SystemModel> detection_models() {
    tftest::Rng rng(1001);
    std::vector<SystemModel> out;
    for (int i = 0; i < 600; ++i) out.push_back(tftest::random_model(rng));
    return out;
}

Verdict detection_equivalence(const std::vector<SystemModel>& models) {
    Verdict v;
    const auto t0 = Clock::now();
    tftest::Rng rng(1002);
    int with_paths = 0;
    int matched = 0;
    int pairs = 0;
    for (const auto& m : models) {
        tftest::FormulaGen gen(rng, m.meta(), 4, true);
        for (int k = 0; k < 2; ++k) {
            const Formula f = gen.closed();
            ++pairs;
            with_paths += has_path_quantifier(f) ? 1 : 0;
            const bool want = tftest::naive_eval(m, f);
            matched += want ? 1 : 0;
            const auto checks = check(m, {{"r", f}});
            if ((checks[0].verdict == SatResult::Sat) != want) {
                v.fail("engine disagrees with the naive evaluator on " + print_rule(f));
            }
            if ((tftest::encoded_verdict(m, f) == SatResult::Sat) != want) {
                v.fail("encoding disagrees with the naive evaluator on " + print_rule(f));
            }
        }
    }
    if (with_paths < pairs / 10) v.fail("too few rules with path quantifiers: " + std::to_string(with_paths));
    within(v, t0, 120);
    if (v.ok) {
        v.detail = std::to_string(models.size()) + " models, " + std::to_string(pairs) + " rules (" +
                   std::to_string(with_paths) + " with paths, " + std::to_string(matched) + " matched), " +
                   std::to_string(seconds_since(t0)).substr(0, 5) + " s";
    }
    return v;
}

Verdict path_exactness(const std::vector<SystemModel>& models) {
    Verdict v;
    const auto t0 = Clock::now();
    std::size_t total = 0;
    for (const auto& m : models) {
        const auto got = tftest::decoded_paths(m);
        const auto want = tftest::path_set(m);
        if (!got.complete) v.fail("decoding did not terminate on a model");
        if (!got.well_formed) v.fail("decoded a cyclic or disconnected path");
        if (got.paths != want) v.fail("decoded path set differs from the enumeration");
        if (want != tftest::naive_paths(m)) v.fail("enumeration differs from the injective-sequence oracle");
        total += want.size();
    }
    within(v, t0, 60);
    if (v.ok) {
        v.detail = std::to_string(models.size()) + " models, " + std::to_string(total) + " paths, " +
                   std::to_string(seconds_since(t0)).substr(0, 5) + " s";
    }
    return v;
}

Verdict repair_optimality() {
    Verdict v;
    const auto t0 = Clock::now();
    tftest::Rng rng(1003);
    tftest::ModelLimits lim;
    lim.max_elements = 3;
    lim.max_connectors = 4;
    lim.max_assets = 1;
    lim.max_boundaries = 2;
    lim.random_costs = true;
    int repairable = 0;
    int unrepairable = 0;
    int nonzero = 0;
    for (int i = 0; i < 20000 && repairable < 250; ++i) {
        const SystemModel m = tftest::random_model(rng, lim);
        if (tftest::valuation_space(m) > 20000) continue;
        tftest::FormulaGen gen(rng, m.meta(), 3);
        RuleSet rules;
        const int n = tftest::uniform(rng, 1, 3);
        for (int k = 0; k < n; ++k) rules.push_back({"r" + std::to_string(k), gen.closed()});
        if (!matched_any(m, rules)) continue;
        const auto want = tftest::oracle_min_repair(m, formulas(rules));
        const auto got = minimal_repair(m, rules);
        if ((got.status == SatResult::Sat) != want.has_value()) {
            v.fail("repairability differs from the oracle on instance " + std::to_string(i));
            continue;
        }
        if (!want) {
            ++unrepairable;
            continue;
        }
        ++repairable;
        nonzero += *want != Cost(0) ? 1 : 0;
        if (got.total_cost != *want) {
            v.fail("cost " + to_string(got.total_cost) + " but the oracle minimum is " + to_string(*want));
        }
        const SystemModel fixed = apply_repair(m, got);
        for (const auto& r : rules) {
            if (tftest::naive_eval(fixed, r.formula)) v.fail("applied repair leaves " + r.name + " matched");
        }
    }
    if (repairable < 200) v.fail("only " + std::to_string(repairable) + " repairable instances");
    if (nonzero < 50) v.fail("only " + std::to_string(nonzero) + " instances needed a change");
    within(v, t0, 300);
    if (v.ok) {
        v.detail = std::to_string(repairable) + " repairable (" + std::to_string(nonzero) + " with cost > 0), " +
                   std::to_string(unrepairable) + " unrepairable agreed, " +
                   std::to_string(seconds_since(t0)).substr(0, 5) + " s";
    }
    return v;
}

Verdict motivating_scenario() {
    Verdict v;
    const SystemModel m = tftest::motivating_model();
    const auto r = minimal_repair(m, tftest::motivating_rules());
    if (r.status != SatResult::Sat) {
        v.fail("status " + std::string(to_string(r.status)));
        return v;
    }
    if (r.total_cost != Cost(20)) v.fail("total cost " + to_string(r.total_cost));
    const auto log = *m.cell(*m.find("ws"), *m.meta().find_attribute("Data Logging"));
    const auto enc = *m.cell(*m.find("ws"), *m.meta().find_attribute("Data Encryption"));
    if (r.valuation[log] != m.valuation()[log]) v.fail("logging was changed");
    if (r.valuation[enc] == m.valuation()[enc]) v.fail("encryption was not changed");
    if (r.changes.size() != 1) v.fail(std::to_string(r.changes.size()) + " changes");
    if (v.ok) v.detail = "total cost 20, " + change_text(m, r.changes[0]);
    return v;
}

Verdict case_study() {
    Verdict v;
    const SystemModel m = tftest::smarthome_model();
    const RuleSet rules = tftest::iot_rules();
    const auto r = partial_repair(m, rules);
    if (r.status != SatResult::Sat) {
        v.fail("status " + std::string(to_string(r.status)));
        return v;
    }
    std::string firewall_change;
    for (const auto& c : r.changes) {
        const auto& cell = m.cells()[c.cell];
        if (m.item(cell.item).type == "Firewall" && m.meta().attribute(cell.attr).name == "Activity Logging" &&
            m.value_name(c.cell, c.to) == "Yes") {
            firewall_change = change_text(m, c);
        }
    }
    if (firewall_change.empty()) v.fail("no firewall Activity Logging -> Yes change");
    const auto& repaired = r.repaired;
    if (std::find(repaired.begin(), repaired.end(), "firewall-activity-logging") == repaired.end()) {
        v.fail("firewall rule not reported as repaired");
    }
    const UnrepairableRule* spoof = nullptr;
    for (const auto& u : r.unrepairable) {
        if (u.name == "ip-spoofing") spoof = &u;
    }
    if (spoof == nullptr || spoof->witnesses.empty()) {
        v.fail("ip-spoofing not reported unrepairable with a witness");
        return v;
    }
    const auto& e = spoof->witnesses[0].bindings.entries();
    if (e.size() != 3 || !std::holds_alternative<ItemId>(e[0].second)) {
        v.fail("witness does not bind a connector and two elements");
        return v;
    }
    const ItemId c = std::get<ItemId>(e[0].second);
    const ItemId s = std::get<ItemId>(e[1].second);
    const ItemId t = std::get<ItemId>(e[2].second);
    if (m.item(c).type != "Internet Connection") v.fail("witness connector is a " + m.item(c).type);
    if (m.source(c) != s || m.target(c) != t) v.fail("witness endpoints do not match the connector");
    const SystemModel fixed = apply_repair(m, r);
    const Evaluator ev(fixed);
    for (const auto& name : repaired) {
        if (ev.eval(tftest::rule_named(rules, name).formula)) v.fail(name + " still matches after the repair");
    }
    if (v.ok) {
        v.detail = firewall_change + "; ip-spoofing witness c=" +
                   m.id(c) + " " + m.id(s) + "->" + m.id(t) + "; cost " + to_string(r.total_cost);
    }
    return v;
}

Verdict heuristic_dominance() {
    Verdict v;
    const auto t0 = Clock::now();
    tftest::Rng rng(1004);
    tftest::ModelLimits lim;
    lim.max_elements = 3;
    lim.max_connectors = 4;
    lim.random_costs = true;
    int paired = 0;
    int strict = 0;
    for (int i = 0; i < 20000 && paired < 150; ++i) {
        const SystemModel m = tftest::random_model(rng, lim);
        tftest::FormulaGen gen(rng, m.meta(), 3);
        RuleSet rules;
        const int n = tftest::uniform(rng, 2, 4);
        for (int k = 0; k < n; ++k) rules.push_back({"r" + std::to_string(k), gen.closed()});
        if (!matched_any(m, rules)) continue;
        const auto h = heuristic_partial_repair(m, rules);
        if (h.status != SatResult::Sat) {
            v.fail("heuristic status " + std::string(to_string(h.status)));
            continue;
        }
        // Settled rules stay false under the committed valuation.
        const SystemModel after = apply_repair(m, h);
        const Evaluator ev(after);
        for (const auto& group : {h.no_threat, h.repaired}) {
            for (const auto& name : group) {
                if (ev.eval(tftest::rule_named(rules, name).formula)) v.fail("heuristic left " + name + " matched");
            }
        }
        if (!h.unrepairable.empty()) continue;
        const auto e = minimal_repair(m, rules);
        if (e.status != SatResult::Sat) {
            v.fail("heuristic repaired every rule but the exact repair is " + std::string(to_string(e.status)));
            continue;
        }
        ++paired;
        if (h.total_cost < e.total_cost) v.fail("heuristic " + to_string(h.total_cost) + " < exact " + to_string(e.total_cost));
        strict += h.total_cost > e.total_cost ? 1 : 0;
    }
    if (paired < 100) v.fail("only " + std::to_string(paired) + " paired runs");

    // Greedy gap: each rule alone is cheapest to fix through its own cell,
    // both together through the shared one.
    {
        MetaModel meta;
        meta.add_type("Server", ItemKind::Element);
        for (const char* a : {"A", "B", "C"}) meta.add_attribute(a, {"bad", "good"}, {"Server"});
        ModelBuilder b(meta);
        b.element("s", "Server", {{"A", "bad"}, {"B", "bad"}, {"C", "bad"}});
        const SystemModel m = load_costs(b.build(), "item,attribute,from,to,cost\n"
                                                    "s,A,bad,good,6\ns,B,bad,good,5\ns,C,bad,good,9\n");
        const RuleSet rules = parse_rules(R"(
rule r1 : exists element e . val(e, "A") = "bad" and val(e, "C") = "bad"
rule r2 : exists element e . val(e, "B") = "bad" and val(e, "C") = "bad"
)");
        const auto h = heuristic_partial_repair(m, rules);
        const auto e = minimal_repair(m, rules);
        if (h.status != SatResult::Sat || h.total_cost != Cost(11)) v.fail("gap instance: heuristic cost " + to_string(h.total_cost));
        if (e.status != SatResult::Sat || e.total_cost != Cost(9)) v.fail("gap instance: exact cost " + to_string(e.total_cost));
    }
    // Two rules no valuation can both falsify.
    {
        MetaModel meta;
        meta.add_type("Fob", ItemKind::Element);
        meta.add_attribute("Mode", {"a", "b"}, {"Fob"});
        ModelBuilder b(meta);
        b.element("k", "Fob", {{"Mode", "b"}});
        const SystemModel m = b.build();
        const RuleSet rules = parse_rules(R"(
rule not-a : exists element e . val(e, "Mode") != "a"
rule not-b : exists element e . val(e, "Mode") != "b"
)");
        const auto p = partial_repair(m, rules);
        const auto h = heuristic_partial_repair(m, rules);
        if (p.status != SatResult::Unsat) v.fail("inconsistent pair: partial repair is " + std::string(to_string(p.status)));
        if (h.status != SatResult::Sat) v.fail("inconsistent pair: heuristic repair is " + std::string(to_string(h.status)));
    }
    within(v, t0, 300);
    if (v.ok) {
        v.detail = std::to_string(paired) + " paired runs (" + std::to_string(strict) +
                   " strictly worse), gap 11 vs 9, partial unsat / heuristic sat";
    }
    return v;
}

Verdict solver_correctness() {
    Verdict v;
    const auto t0 = Clock::now();
    tftest::Rng rng(1005);
    int optimal = 0;
    for (int i = 0; i < 600; ++i) {
        const int vars = tftest::uniform(rng, 1, 15);
        const auto hard = tftest::random_kcnf(rng, vars, tftest::uniform(rng, 0, vars * 2), tftest::uniform(rng, 1, 3));
        std::vector<tftest::SoftGroup> soft;
        const int groups = tftest::uniform(rng, 0, 8);
        for (int g = 0; g < groups; ++g) {
            soft.push_back({tftest::random_kcnf(rng, vars, tftest::uniform(rng, 1, 2), tftest::uniform(rng, 1, 3)),
                            tftest::uniform(rng, 1, 50)});
        }
        SolverStack s(static_cast<std::uint64_t>(i));
        while (s.num_vars() < vars) s.new_var();
        for (const auto& c : hard) s.add_clause(std::span<const Lit>(c));
        for (const auto& g : soft) s.add_soft(g.clauses, g.cost);
        const auto got = s.max_solve();
        const auto want = tftest::oracle_maxsat(vars, hard, soft);
        if ((got.status == SatResult::Sat) != want.has_value()) {
            v.fail("MaxSAT verdict differs on instance " + std::to_string(i));
            continue;
        }
        if (!want) continue;
        ++optimal;
        if (got.cost != *want) v.fail("MaxSAT cost " + std::to_string(got.cost) + " vs " + std::to_string(*want));
        if (!satisfies_all(hard, got.model)) v.fail("MaxSAT model violates a hard clause");
        std::int64_t violated = 0;
        for (const auto& g : soft) {
            if (!satisfies_all(g.clauses, got.model)) violated += g.cost;
        }
        if (violated != got.cost) v.fail("MaxSAT model's violated weight differs from its reported cost");
    }
    int sat = 0;
    const int cnfs = 1200;
    for (int i = 0; i < cnfs; ++i) {
        const int vars = tftest::uniform(rng, 5, 40);
        const auto clauses = tftest::random_kcnf(rng, vars, vars * 4, 3);
        SatSolver s(static_cast<std::uint64_t>(i));
        while (s.num_vars() < vars) s.new_var();
        for (const auto& c : clauses) s.add_clause(std::span<const Lit>(c));
        const bool got = s.solve() == SatResult::Sat;
        if (got != tftest::oracle_sat(vars, clauses)) v.fail("SAT verdict differs on 3-CNF " + std::to_string(i));
        if (got) {
            ++sat;
            if (!satisfies_all(clauses, s.model())) v.fail("SAT model violates a clause");
        }
    }
    within(v, t0, 120);
    if (v.ok) {
        v.detail = "600 MaxSAT instances (" + std::to_string(optimal) + " satisfiable), " + std::to_string(cnfs) +
                   " 3-CNFs (" + std::to_string(sat) + " sat), " + std::to_string(seconds_since(t0)).substr(0, 5) + " s";
    }
    return v;
}

Verdict exporter_goldens() {
    Verdict v;
    struct Case {
        SystemModel model;
        RuleSet rules;
        std::string smt;
        SmtMode mode;
        std::string wcnf;
    };
    const std::vector<Case> cases = {
        {tftest::motivating_model(), tftest::motivating_rules(), "motivating-repair.smt2", SmtMode::Repair, "motivating.wcnf"},
        {tftest::smarthome_model(), tftest::iot_rules(), "smarthome-check.smt2", SmtMode::Check, "smarthome.wcnf"},
    };
    for (const auto& c : cases) {
        const std::string smt = emit_smtlib(c.model, c.rules, c.mode);
        const std::string wcnf = emit_wcnf(c.model, c.rules);
        if (smt != emit_smtlib(c.model, c.rules, c.mode)) v.fail(c.smt + " differs between runs");
        if (wcnf != emit_wcnf(c.model, c.rules)) v.fail(c.wcnf + " differs between runs");
        if (smt != golden(c.smt)) v.fail(c.smt + " differs from the golden file");
        if (wcnf != golden(c.wcnf)) v.fail(c.wcnf + " differs from the golden file");
        const auto summary = tftest::summarize_wcnf(wcnf);
        if (summary.top != 1 + summary.soft_sum) {
            v.fail(c.wcnf + ": top " + std::to_string(summary.top) + " vs 1 + " + std::to_string(summary.soft_sum));
        }
    }
    if (v.ok) v.detail = "2 SMT-LIB2 and 2 WCNF goldens stable; top = 1 + soft weight sum";
    return v;
}

}  // namespace

int main() {
    const auto models = detection_models();
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"detection-equivalence", [&] { return detection_equivalence(models); }},
        {"path-translation-exactness", [&] { return path_exactness(models); }},
        {"repair-optimality", repair_optimality},
        {"motivating-scenario", motivating_scenario},
        {"case-study", case_study},
        {"heuristic-dominance", heuristic_dominance},
        {"maxsat-and-sat-correctness", solver_correctness},
        {"exporter-goldens", exporter_goldens},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Verdict v;
        try {
            v = run();
        } catch (const std::exception& e) {
            v.fail(std::string("exception: ") + e.what());
        }
        std::printf("%s %s: %s\n", v.ok ? "PASS" : "FAIL", name.c_str(), v.detail.c_str());
        std::fflush(stdout);
        failed += v.ok ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
