#include "threatfix/formula.hpp"

#include <algorithm>
#include <functional>

#include "threatfix/error.hpp"

namespace threatfix {

std::string_view to_string(Sort sort) {
    switch (sort) {
        case Sort::Element: return "element";
        case Sort::Connector: return "connector";
        case Sort::Asset: return "asset";
        case Sort::Boundary: return "boundary";
        case Sort::Path: return "path";
    }
    return "?";
}

std::optional<ItemKind> item_kind(Sort sort) {
    switch (sort) {
        case Sort::Element: return ItemKind::Element;
        case Sort::Connector: return ItemKind::Connector;
        case Sort::Asset: return ItemKind::Asset;
        case Sort::Boundary: return ItemKind::Boundary;
        case Sort::Path: return std::nullopt;
    }
    return std::nullopt;
}

Sort sort_of(ItemKind kind) {
    switch (kind) {
        case ItemKind::Element: return Sort::Element;
        case ItemKind::Connector: return Sort::Connector;
        case ItemKind::Asset: return Sort::Asset;
        case ItemKind::Boundary: return Sort::Boundary;
    }
    return Sort::Element;
}

struct Formula::Node {
    Kind kind;
    Predicate pred;
    Var var;
    std::optional<Formula> a;
    std::optional<Formula> b;
};

Formula Formula::predicate(Predicate p) {
    return Formula(std::make_shared<const Node>(Node{Kind::Predicate, std::move(p), {}, std::nullopt, std::nullopt}));
}

Formula Formula::negation(Formula body) {
    return Formula(std::make_shared<const Node>(Node{Kind::Not, {}, {}, std::move(body), std::nullopt}));
}

Formula Formula::disjunction(Formula lhs, Formula rhs) {
    return Formula(std::make_shared<const Node>(Node{Kind::Or, {}, {}, std::move(lhs), std::move(rhs)}));
}

Formula Formula::exists(Var var, Formula body) {
    return Formula(std::make_shared<const Node>(Node{Kind::Exists, {}, std::move(var), std::move(body), std::nullopt}));
}

Formula Formula::conjunction(Formula lhs, Formula rhs) {
    return negation(disjunction(negation(std::move(lhs)), negation(std::move(rhs))));
}

Formula Formula::implication(Formula lhs, Formula rhs) {
    return disjunction(negation(std::move(lhs)), std::move(rhs));
}

Formula Formula::forall(Var var, Formula body) { return negation(exists(std::move(var), negation(std::move(body)))); }

Formula::Kind Formula::kind() const { return node_->kind; }

const Predicate& Formula::pred() const {
    if (node_->kind != Kind::Predicate) throw UsageError("formula is not a predicate");
    return node_->pred;
}

const Formula& Formula::body() const {
    if (node_->kind != Kind::Not && node_->kind != Kind::Exists) throw UsageError("formula has no body");
    return *node_->a;
}

const Formula& Formula::lhs() const {
    if (node_->kind != Kind::Or) throw UsageError("formula is not a disjunction");
    return *node_->a;
}

const Formula& Formula::rhs() const {
    if (node_->kind != Kind::Or) throw UsageError("formula is not a disjunction");
    return *node_->b;
}

const Var& Formula::bound() const {
    if (node_->kind != Kind::Exists) throw UsageError("formula is not a quantifier");
    return node_->var;
}

bool operator==(const Formula& x, const Formula& y) {
    if (x.node_ == y.node_) return true;
    if (x.kind() != y.kind()) return false;
    switch (x.kind()) {
        case Formula::Kind::Predicate: return x.pred() == y.pred();
        case Formula::Kind::Not: return x.body() == y.body();
        case Formula::Kind::Or: return x.lhs() == y.lhs() && x.rhs() == y.rhs();
        case Formula::Kind::Exists: return x.bound() == y.bound() && x.body() == y.body();
    }
    return false;
}

namespace {

bool unary(PredicateKind k) { return k == PredicateKind::Type || k == PredicateKind::Val; }

void collect_free(const Formula& f, std::vector<std::string>& bound, std::set<std::string>& out) {
    auto use = [&](const Var& v) {
        if (std::find(bound.begin(), bound.end(), v.name) == bound.end()) out.insert(v.name);
    };
    switch (f.kind()) {
        case Formula::Kind::Predicate:
            use(f.pred().subject);
            if (!unary(f.pred().kind)) use(f.pred().object);
            break;
        case Formula::Kind::Not: collect_free(f.body(), bound, out); break;
        case Formula::Kind::Or:
            collect_free(f.lhs(), bound, out);
            collect_free(f.rhs(), bound, out);
            break;
        case Formula::Kind::Exists:
            bound.push_back(f.bound().name);
            collect_free(f.body(), bound, out);
            bound.pop_back();
            break;
    }
}

bool any_node(const Formula& f, const std::function<bool(const Formula&)>& pred) {
    if (pred(f)) return true;
    switch (f.kind()) {
        case Formula::Kind::Predicate: return false;
        case Formula::Kind::Not:
        case Formula::Kind::Exists: return any_node(f.body(), pred);
        case Formula::Kind::Or: return any_node(f.lhs(), pred) || any_node(f.rhs(), pred);
    }
    return false;
}

std::string_view predicate_name(PredicateKind k) {
    switch (k) {
        case PredicateKind::Type: return "type";
        case PredicateKind::Val: return "val";
        case PredicateKind::Src: return "src";
        case PredicateKind::Tgt: return "tgt";
        case PredicateKind::In: return "in";
        case PredicateKind::Connector: return "connector";
        case PredicateKind::Crosses: return "crosses";
        case PredicateKind::Contained: return "contained";
        case PredicateKind::Holds: return "holds";
    }
    return "?";
}

[[noreturn]] void sort_error(const Predicate& p, const Var& v, std::string_view expected) {
    throw SortError("variable '" + v.name + "' of sort " + std::string(to_string(v.sort)) + " used in " +
                    std::string(predicate_name(p.kind)) + "(...) where " + std::string(expected) + " is required");
}

void expect(const Predicate& p, const Var& v, std::initializer_list<Sort> allowed, std::string_view expected) {
    if (std::find(allowed.begin(), allowed.end(), v.sort) == allowed.end()) sort_error(p, v, expected);
}

void check_predicate(const Predicate& p) {
    using S = Sort;
    switch (p.kind) {
        case PredicateKind::Type:
        case PredicateKind::Val:
            expect(p, p.subject, {S::Element, S::Connector, S::Asset, S::Boundary}, "an item");
            break;
        case PredicateKind::Src:
        case PredicateKind::Tgt:
            expect(p, p.subject, {S::Connector, S::Path}, "a connector or path");
            expect(p, p.object, {S::Element}, "an element");
            break;
        case PredicateKind::In:
            expect(p, p.subject, {S::Element, S::Connector}, "an element or connector");
            expect(p, p.object, {S::Path}, "a path");
            break;
        case PredicateKind::Connector:
            expect(p, p.subject, {S::Element}, "an element");
            expect(p, p.object, {S::Connector}, "a connector");
            break;
        case PredicateKind::Crosses:
            expect(p, p.subject, {S::Connector}, "a connector");
            expect(p, p.object, {S::Boundary}, "a boundary");
            break;
        case PredicateKind::Contained:
            expect(p, p.subject, {S::Element, S::Boundary}, "an element or boundary");
            expect(p, p.object, {S::Boundary}, "a boundary");
            break;
        case PredicateKind::Holds:
            expect(p, p.subject, {S::Element, S::Connector}, "an element or connector");
            expect(p, p.object, {S::Asset}, "an asset");
            break;
    }
}

std::string quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void print(const Formula& f, std::string& out) {
    switch (f.kind()) {
        case Formula::Kind::Predicate: {
            const Predicate& p = f.pred();
            switch (p.kind) {
                case PredicateKind::Type: out += "type(" + p.subject.name + ") = " + quote(p.literal); break;
                case PredicateKind::Val:
                    out += "val(" + p.subject.name + ", " + quote(p.attribute) + ") = " + quote(p.literal);
                    break;
                case PredicateKind::Src:
                case PredicateKind::Tgt:
                    out += std::string(predicate_name(p.kind)) + "(" + p.subject.name + ") = " + p.object.name;
                    break;
                case PredicateKind::In: out += p.subject.name + " in " + p.object.name; break;
                default:
                    out += std::string(predicate_name(p.kind)) + "(" + p.subject.name + ", " + p.object.name + ")";
                    break;
            }
            break;
        }
        case Formula::Kind::Not:
            out += "not ";
            print(f.body(), out);
            break;
        case Formula::Kind::Or:
            out += "(";
            print(f.lhs(), out);
            out += " or ";
            print(f.rhs(), out);
            out += ")";
            break;
        case Formula::Kind::Exists:
            out += "(exists " + std::string(to_string(f.bound().sort)) + " " + f.bound().name + " . ";
            print(f.body(), out);
            out += ")";
            break;
    }
}

}  // namespace

std::set<std::string> free_vars(const Formula& f) {
    std::vector<std::string> bound;
    std::set<std::string> out;
    collect_free(f, bound, out);
    return out;
}

bool is_closed(const Formula& f) { return free_vars(f).empty(); }

bool has_attr(const Formula& f) {
    return any_node(f, [](const Formula& g) {
        return g.kind() == Formula::Kind::Predicate && g.pred().kind == PredicateKind::Val;
    });
}

bool has_path_quantifier(const Formula& f) {
    return any_node(f, [](const Formula& g) {
        return g.kind() == Formula::Kind::Exists && g.bound().sort == Sort::Path;
    });
}

std::size_t quantifier_depth(const Formula& f) {
    switch (f.kind()) {
        case Formula::Kind::Predicate: return 0;
        case Formula::Kind::Not: return quantifier_depth(f.body());
        case Formula::Kind::Or: return std::max(quantifier_depth(f.lhs()), quantifier_depth(f.rhs()));
        case Formula::Kind::Exists: return 1 + quantifier_depth(f.body());
    }
    return 0;
}

void check_sorts(const Formula& f) {
    switch (f.kind()) {
        case Formula::Kind::Predicate: check_predicate(f.pred()); break;
        case Formula::Kind::Not:
        case Formula::Kind::Exists: check_sorts(f.body()); break;
        case Formula::Kind::Or:
            check_sorts(f.lhs());
            check_sorts(f.rhs());
            break;
    }
}

std::string print_rule(const Formula& f) {
    std::string out;
    print(f, out);
    return out;
}

}  // namespace threatfix
