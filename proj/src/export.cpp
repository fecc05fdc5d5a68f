#include "threatfix/export.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <map>
#include <sstream>

#include "threatfix/encoder.hpp"
#include "threatfix/error.hpp"
#include "threatfix/translate.hpp"

namespace threatfix {

namespace {

const char* const kSortNames[] = {"Element", "Connector", "Asset", "Boundary"};
const char* const kFnSuffix[] = {"element", "connector", "asset", "boundary"};

std::size_t kind_index(ItemKind k) { return static_cast<std::size_t>(k); }

// Quoted SMT-LIB symbol. '|' and '\' cannot appear inside one.
std::string sym(std::string_view name) {
    std::string out = "|";
    for (char c : name) out.push_back(c == '|' || c == '\\' ? '_' : c);
    out.push_back('|');
    return out;
}

// Variables get a prefix so they never shadow an item constructor.
std::string var_sym(std::string_view name) { return sym("?" + std::string(name)); }

std::string type_sym(std::string_view t) { return sym("type/" + std::string(t)); }
std::string attr_sym(std::string_view a) { return sym("attr/" + std::string(a)); }
std::string value_sym(std::string_view v) { return sym("value/" + std::string(v)); }
const std::string kNone = "|#none|";

class SmtWriter {
public:
    SmtWriter(const SystemModel& m, std::ostringstream& out) : m_(m), out_(out) {}

    void preamble() {
        const MetaModel& meta = m_.meta();
        for (ItemKind k : kAllKinds) {
            if (m_.of_kind(k).empty()) continue;
            out_ << "(declare-datatypes ((" << kSortNames[kind_index(k)] << " 0)) ((";
            for (ItemId i : m_.of_kind(k)) out_ << "(" << sym(m_.id(i)) << ")";
            out_ << ")))\n";
        }
        const auto types = meta.all_types();
        if (!types.empty()) {
            out_ << "(declare-datatypes ((Type 0)) ((";
            for (const auto& t : types) out_ << "(" << type_sym(t) << ")";
            out_ << ")))\n";
        }
        if (!meta.attributes().empty()) {
            out_ << "(declare-datatypes ((Attribute 0)) ((";
            for (const auto& a : meta.attributes()) out_ << "(" << attr_sym(a.name) << ")";
            out_ << ")))\n";
        }
        std::vector<std::string> values;
        for (const auto& a : meta.attributes()) {
            for (const auto& v : a.domain) {
                if (std::find(values.begin(), values.end(), v) == values.end()) values.push_back(v);
            }
        }
        out_ << "(declare-datatypes ((Value 0)) ((" << "(" << kNone << ")";
        for (const auto& v : values) out_ << "(" << value_sym(v) << ")";
        out_ << ")))\n";

        // Fixed relations.
        for (ItemKind k : kAllKinds) {
            if (m_.of_kind(k).empty()) continue;
            const char* sort = kSortNames[kind_index(k)];
            const char* fn = kFnSuffix[kind_index(k)];
            out_ << "(declare-fun type-" << fn << " (" << sort << ") Type)\n";
            for (ItemId i : m_.of_kind(k)) {
                out_ << "(assert (= (type-" << fn << " " << sym(m_.id(i)) << ") " << type_sym(m_.item(i).type)
                     << "))\n";
            }
        }
        if (!m_.connectors().empty()) {
            out_ << "(declare-fun src (Connector) Element)\n(declare-fun tgt (Connector) Element)\n";
            for (ItemId c : m_.connectors()) {
                out_ << "(assert (= (src " << sym(m_.id(c)) << ") " << sym(m_.id(m_.source(c))) << "))\n";
                out_ << "(assert (= (tgt " << sym(m_.id(c)) << ") " << sym(m_.id(m_.target(c))) << "))\n";
            }
        }
        if (!m_.assets().empty()) {
            for (ItemKind k : {ItemKind::Element, ItemKind::Connector}) {
                if (m_.of_kind(k).empty()) continue;
                std::vector<std::pair<ItemId, ItemId>> pairs;
                for (ItemId x : m_.of_kind(k)) {
                    for (ItemId a : m_.assets()) {
                        if (m_.holds(x, a)) pairs.emplace_back(x, a);
                    }
                }
                relation("holds", k, "Asset", pairs);
            }
        }
        if (!m_.boundaries().empty()) {
            for (ItemKind k : {ItemKind::Element, ItemKind::Boundary}) {
                if (m_.of_kind(k).empty()) continue;
                std::vector<std::pair<ItemId, ItemId>> pairs;
                for (ItemId x : m_.of_kind(k)) {
                    for (ItemId b : m_.boundaries()) {
                        if (m_.contains(b, x)) pairs.emplace_back(x, b);
                    }
                }
                relation("contained", k, "Boundary", pairs);
            }
        }

        // Attribute valuation and validity.
        if (meta.attributes().empty()) return;
        for (ItemKind k : kAllKinds) {
            if (m_.of_kind(k).empty()) continue;
            out_ << "(declare-fun val-" << kFnSuffix[kind_index(k)] << " (" << kSortNames[kind_index(k)]
                 << " Attribute) Value)\n";
        }
        for (const auto& items : {m_.elements(), m_.connectors(), m_.assets(), m_.boundaries()}) {
            for (ItemId i : items) {
                for (AttrId a = 0; a < meta.attributes().size(); ++a) {
                    const auto cell = m_.cell(i, a);
                    if (!cell) {
                        out_ << "(assert (= " << val_term(i, a) << " " << kNone << "))\n";
                        continue;
                    }
                    const auto& dom = m_.domain(*cell);
                    if (dom.size() == 1) {
                        out_ << "(assert (= " << val_term(i, a) << " " << value_sym(dom[0]) << "))\n";
                        continue;
                    }
                    out_ << "(assert (or";
                    for (const auto& v : dom) out_ << " (= " << val_term(i, a) << " " << value_sym(v) << ")";
                    out_ << "))\n";
                }
            }
        }
    }

    std::string val_term(ItemId i, AttrId a) const {
        return "(val-" + std::string(kFnSuffix[kind_index(m_.item(i).kind)]) + " " + sym(m_.id(i)) + " " +
               attr_sym(m_.meta().attribute(a).name) + ")";
    }

    std::string formula(const PathFree& f) const {
        using K = PathFreeNode::Kind;
        switch (f->kind) {
            case K::Const: return f->value ? "true" : "false";
            case K::Pred: return predicate(f->pred);
            case K::Eq: return "(= " + term(f->lhs) + " " + term(f->rhs) + ")";
            case K::LengthIs: return "(= " + length_sym(f->path) + " " + std::to_string(f->index) + ")";
            case K::LengthAtLeast: return "(<= " + std::to_string(f->index) + " " + length_sym(f->path) + ")";
            case K::Not: return "(not " + formula(f->kids[0]) + ")";
            case K::And:
            case K::Or: {
                std::string s = f->kind == K::And ? "(and" : "(or";
                for (const auto& k : f->kids) s += " " + formula(k);
                return s + ")";
            }
            case K::ExistsItem: {
                const ItemKind k = *item_kind(f->var.sort);
                if (m_.of_kind(k).empty()) return "false";
                return "(exists ((" + var_sym(f->var.name) + " " + kSortNames[kind_index(k)] + ")) " +
                       formula(f->kids[0]) + ")";
            }
            case K::ExistsLength: {
                const std::string k = length_sym(f->path);
                return "(exists ((" + k + " Int)) (and (<= 1 " + k + ") (<= " + k + " " + std::to_string(f->index) +
                       ") " + formula(f->kids[0]) + "))";
            }
            case K::ExistsSlot:
                if (m_.connectors().empty()) return "false";
                return "(exists ((" + slot_sym(f->path, f->index) + " Connector)) " + formula(f->kids[0]) + ")";
        }
        return "false";
    }

private:
    void relation(const char* name, ItemKind k, const char* range, const std::vector<std::pair<ItemId, ItemId>>& pairs) {
        out_ << "(define-fun " << name << "-" << kFnSuffix[kind_index(k)] << " ((x " << kSortNames[kind_index(k)]
             << ") (y " << range << ")) Bool ";
        if (pairs.empty()) {
            out_ << "false)\n";
            return;
        }
        if (pairs.size() > 1) out_ << "(or";
        for (const auto& [x, y] : pairs) {
            out_ << (pairs.size() > 1 ? " " : "") << "(and (= x " << sym(m_.id(x)) << ") (= y " << sym(m_.id(y))
                 << "))";
        }
        if (pairs.size() > 1) out_ << ")";
        out_ << ")\n";
    }

    static std::string length_sym(const std::string& p) { return var_sym("k_" + p); }
    static std::string slot_sym(const std::string& p, std::uint32_t i) { return var_sym(p + "^" + std::to_string(i)); }

    static std::string term(const Term& t) {
        const std::string base = t.is_slot() ? slot_sym(t.var, t.slot) : var_sym(t.var);
        switch (t.fn) {
            case Term::Fn::Id: return base;
            case Term::Fn::Src: return "(src " + base + ")";
            case Term::Fn::Tgt: return "(tgt " + base + ")";
        }
        return base;
    }

    static const char* suffix(Sort s) { return kFnSuffix[kind_index(*item_kind(s))]; }

    std::string predicate(const Predicate& p) const {
        const MetaModel& meta = m_.meta();
        const std::string x = var_sym(p.subject.name);
        const std::string y = var_sym(p.object.name);
        switch (p.kind) {
            case PredicateKind::Type: {
                const auto kind = meta.kind_of(p.literal);
                if (!kind || sort_of(*kind) != p.subject.sort) return "false";
                return "(= (type-" + std::string(suffix(p.subject.sort)) + " " + x + ") " + type_sym(p.literal) + ")";
            }
            case PredicateKind::Val: {
                const auto attr = meta.find_attribute(p.attribute);
                if (!attr || !meta.find_value(*attr, p.literal)) return "false";
                return "(= (val-" + std::string(suffix(p.subject.sort)) + " " + x + " " + attr_sym(p.attribute) + ") " +
                       value_sym(p.literal) + ")";
            }
            case PredicateKind::Src: return "(= (src " + x + ") " + y + ")";
            case PredicateKind::Tgt: return "(= (tgt " + x + ") " + y + ")";
            case PredicateKind::In: return "false";  // removed by the translation
            case PredicateKind::Connector: return "(or (= (src " + y + ") " + x + ") (= (tgt " + y + ") " + x + "))";
            case PredicateKind::Crosses:
                return "(xor (contained-element (src " + x + ") " + y + ") (contained-element (tgt " + x + ") " + y +
                       "))";
            case PredicateKind::Contained:
                return "(contained-" + std::string(suffix(p.subject.sort)) + " " + x + " " + y + ")";
            case PredicateKind::Holds:
                return "(holds-" + std::string(suffix(p.subject.sort)) + " " + x + " " + y + ")";
        }
        return "false";
    }

    const SystemModel& m_;
    std::ostringstream& out_;
};

}  // namespace

std::string emit_smtlib(const SystemModel& model, const RuleSet& rules, SmtMode mode) {
    std::ostringstream out;
    out << "; threatfix " << (mode == SmtMode::Check ? "detection" : "repair") << " script\n";
    out << "(set-option :produce-models true)\n";
    SmtWriter w(model, out);
    w.preamble();
    const std::size_t n = model.elements().size();

    if (mode == SmtMode::Check) {
        for (CellId c = 0; c < model.cells().size(); ++c) {
            const Cell& cell = model.cells()[c];
            out << "(assert (= " << w.val_term(cell.item, cell.attr) << " "
                << value_sym(model.value_name(c, model.valuation()[c])) << "))\n";
        }
        for (const auto& r : rules) {
            out << "; rule " << r.name << "\n(push 1)\n(assert " << w.formula(translate(r.formula, n))
                << ")\n(check-sat)\n(pop 1)\n";
        }
        return out.str();
    }

    for (const auto& r : rules) {
        out << "; rule " << r.name << "\n(assert (not " << w.formula(translate(r.formula, n)) << "))\n";
    }
    const auto softs = soft_assertions(model);
    const std::int64_t scale = cost_scale(softs);
    for (const auto& s : softs) {
        if (s.cost == Cost(0)) continue;
        const Cell& cell = model.cells()[s.cell];
        out << "(assert-soft (not (= " << w.val_term(cell.item, cell.attr) << " "
            << value_sym(model.value_name(s.cell, s.value)) << ")) :weight " << scaled_cost(s.cost, scale)
            << " :id repair)\n";
    }
    out << "(check-sat)\n(get-model)\n";
    return out.str();
}

std::string emit_wcnf(const SystemModel& model, const RuleSet& rules) {
    Cnf cnf;
    const VarTable vt = encode_model(model, cnf);
    for (const auto& r : rules) assert_rule(model, vt, r.formula, true, cnf);

    const auto softs = soft_assertions(model);
    const std::int64_t scale = cost_scale(softs);
    std::vector<std::pair<std::int64_t, Lit>> weighted;
    std::int64_t top = 1;
    for (const auto& s : softs) {
        if (s.cost == Cost(0)) continue;
        const std::int64_t w = scaled_cost(s.cost, scale);
        if (top > std::numeric_limits<std::int64_t>::max() - w) throw LimitError("WCNF top weight overflows 64 bits");
        top += w;
        weighted.emplace_back(w, soft_literal(vt, s));
    }

    std::ostringstream out;
    out << "c threatfix repair instance\n";
    out << "c cost scale " << scale << "\n";
    for (CellId c = 0; c < model.cells().size(); ++c) {
        const Cell& cell = model.cells()[c];
        for (ValueId x = 0; x < model.domain(c).size(); ++x) {
            out << "c attr " << vt.attr(c, x) << " " << model.id(cell.item) << " | "
                << model.meta().attribute(cell.attr).name << " | " << model.value_name(c, x) << "\n";
        }
    }
    out << "p wcnf " << cnf.num_vars() << " " << cnf.clauses().size() + weighted.size() << " " << top << "\n";
    for (const auto& clause : cnf.clauses()) {
        out << top;
        for (Lit l : clause) out << " " << l;
        out << " 0\n";
    }
    for (const auto& [w, l] : weighted) out << w << " " << l << " 0\n";
    return out.str();
}

WcnfSolution parse_wcnf_solution(std::string_view text) {
    WcnfSolution sol;
    std::vector<Lit> lits;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
        if (line.empty()) continue;
        const char tag = line.front();
        std::istringstream in{std::string(line.substr(1))};
        if (tag == 'c') continue;
        if (tag == 's') {
            std::string status;
            in >> status;
            if (status == "UNSATISFIABLE") sol.unsat = true;
            continue;
        }
        if (tag == 'o') {
            if (!(in >> sol.cost)) throw ParseError("malformed cost line", line_no, 1);
            continue;
        }
        if (tag == 'v') {
            std::string tok;
            while (in >> tok) {
                Lit l = 0;
                const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), l);
                if (ec != std::errc() || p != tok.data() + tok.size()) {
                    throw ParseError("malformed literal '" + tok + "'", line_no, 1);
                }
                if (l != 0) lits.push_back(l);
            }
            continue;
        }
        throw ParseError(std::string("unexpected line tag '") + tag + "'", line_no, 1);
    }
    int max_var = 0;
    for (Lit l : lits) max_var = std::max(max_var, var_of(l));
    sol.model.assign(static_cast<std::size_t>(max_var) + 1, false);
    for (Lit l : lits) sol.model[static_cast<std::size_t>(var_of(l))] = l > 0;
    return sol;
}

RepairReport import_wcnf_solution(const SystemModel& model, const RuleSet& rules, std::string_view text,
                                  const EngineConfig& config) {
    const WcnfSolution sol = parse_wcnf_solution(text);
    const auto checks = check(model, rules, config);
    const Evaluator ev(model);

    RepairReport report;
    report.mode = RepairMode::Exact;
    report.valuation = model.valuation();
    if (sol.unsat) {
        report.status = SatResult::Unsat;
        for (std::size_t i = 0; i < rules.size(); ++i) {
            if (checks[i].verdict == SatResult::Sat) {
                report.unrepairable.push_back({rules[i].name, checks[i].witnesses});
            } else {
                report.no_threat.push_back(rules[i].name);
            }
        }
        return report;
    }
    if (sol.model.empty()) throw SchemaError("solver output has no 'v' line");

    Cnf scratch;
    const VarTable vt = encode_model(model, scratch);
    for (CellId c = 0; c < model.cells().size(); ++c) {
        std::size_t set = 0;
        for (ValueId x = 0; x < model.domain(c).size(); ++x) {
            const auto v = static_cast<std::size_t>(vt.attr(c, x));
            if (v < sol.model.size() && sol.model[v]) ++set;
        }
        if (set != 1) throw SchemaError("imported assignment gives cell " + std::to_string(c) + " " +
                                        std::to_string(set) + " values");
    }
    report.valuation = vt.decode(model, sol.model);
    for (const auto& r : rules) {
        if (ev.eval(r.formula, &report.valuation)) {
            throw SchemaError("imported assignment leaves rule '" + r.name + "' matched");
        }
    }
    report.status = SatResult::Sat;
    for (CellId c = 0; c < model.cells().size(); ++c) {
        const ValueId from = model.valuation()[c];
        const ValueId to = report.valuation[c];
        if (from == to) continue;
        report.changes.push_back({c, from, to, model.cost(c, from, to)});
        report.total_cost += model.cost(c, from, to);
    }
    for (std::size_t i = 0; i < rules.size(); ++i) {
        (checks[i].verdict == SatResult::Sat ? report.repaired : report.no_threat).push_back(rules[i].name);
    }
    return report;
}

}  // namespace threatfix
