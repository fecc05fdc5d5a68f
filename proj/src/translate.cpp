#include "threatfix/translate.hpp"

#include "threatfix/error.hpp"

namespace threatfix {

namespace pf {

namespace {
PathFree make(PathFreeNode node) { return std::make_shared<const PathFreeNode>(std::move(node)); }
}  // namespace

PathFree constant(bool value) {
    PathFreeNode n;
    n.kind = PathFreeNode::Kind::Const;
    n.value = value;
    return make(std::move(n));
}

PathFree pred(Predicate p) {
    PathFreeNode n;
    n.kind = PathFreeNode::Kind::Pred;
    n.pred = std::move(p);
    return make(std::move(n));
}

PathFree eq(Term lhs, Term rhs) {
    PathFreeNode n;
    n.kind = PathFreeNode::Kind::Eq;
    n.lhs = std::move(lhs);
    n.rhs = std::move(rhs);
    return make(std::move(n));
}

PathFree length_is(std::string path, std::uint32_t k) {
    PathFreeNode n;
    n.kind = PathFreeNode::Kind::LengthIs;
    n.path = std::move(path);
    n.index = k;
    return make(std::move(n));
}

PathFree length_at_least(std::string path, std::uint32_t k) {
    PathFreeNode n;
    n.kind = PathFreeNode::Kind::LengthAtLeast;
    n.path = std::move(path);
    n.index = k;
    return make(std::move(n));
}

PathFree negation(PathFree body) {
    PathFreeNode n;
    n.kind = PathFreeNode::Kind::Not;
    n.kids.push_back(std::move(body));
    return make(std::move(n));
}

PathFree conj(std::vector<PathFree> kids) {
    if (kids.size() == 1) return kids.front();
    PathFreeNode n;
    n.kind = PathFreeNode::Kind::And;
    n.kids = std::move(kids);
    return make(std::move(n));
}

PathFree disj(std::vector<PathFree> kids) {
    if (kids.size() == 1) return kids.front();
    PathFreeNode n;
    n.kind = PathFreeNode::Kind::Or;
    n.kids = std::move(kids);
    return make(std::move(n));
}

PathFree exists_item(Var var, PathFree body) {
    PathFreeNode n;
    n.kind = PathFreeNode::Kind::ExistsItem;
    n.var = std::move(var);
    n.kids.push_back(std::move(body));
    return make(std::move(n));
}

PathFree exists_length(std::string path, std::uint32_t max_len, PathFree body) {
    PathFreeNode n;
    n.kind = PathFreeNode::Kind::ExistsLength;
    n.path = std::move(path);
    n.index = max_len;
    n.kids.push_back(std::move(body));
    return make(std::move(n));
}

PathFree exists_slot(std::string path, std::uint32_t index, PathFree body) {
    PathFreeNode n;
    n.kind = PathFreeNode::Kind::ExistsSlot;
    n.path = std::move(path);
    n.index = index;
    n.kids.push_back(std::move(body));
    return make(std::move(n));
}

}  // namespace pf

namespace {

Term slot(const std::string& p, std::uint32_t i, Term::Fn fn = Term::Fn::Id) { return Term{fn, p, i}; }
Term item(const std::string& x, Term::Fn fn = Term::Fn::Id) { return Term{fn, x, 0}; }

PathFree guard(const std::string& p, std::uint32_t i) {
    std::vector<PathFree> side;
    // Acyclicity: t(x^i) differs from the source of every slot up to i.
    for (std::uint32_t j = 1; j <= i; ++j) {
        side.push_back(pf::negation(pf::eq(slot(p, i, Term::Fn::Tgt), slot(p, j, Term::Fn::Src))));
    }
    // Connectivity with the previous slot.
    if (i > 1) side.push_back(pf::eq(slot(p, i - 1, Term::Fn::Tgt), slot(p, i, Term::Fn::Src)));
    return pf::disj({pf::negation(pf::length_at_least(p, i)), pf::conj(std::move(side))});
}

PathFree translate_pred(const Predicate& p, std::uint32_t slots) {
    const bool path_subject = p.subject.sort == Sort::Path;
    const bool path_object = p.object.sort == Sort::Path && p.kind == PredicateKind::In;

    if (path_subject && p.kind == PredicateKind::Src) {
        return pf::eq(item(p.object.name), slot(p.subject.name, 1, Term::Fn::Src));
    }
    if (path_subject && p.kind == PredicateKind::Tgt) {
        std::vector<PathFree> alts;
        for (std::uint32_t i = 1; i <= slots; ++i) {
            alts.push_back(pf::conj({pf::length_is(p.subject.name, i),
                                     pf::eq(item(p.object.name), slot(p.subject.name, i, Term::Fn::Tgt))}));
        }
        return alts.empty() ? pf::constant(false) : pf::disj(std::move(alts));
    }
    if (path_object) {
        const std::string& path = p.object.name;
        std::vector<PathFree> alts;
        for (std::uint32_t i = 1; i <= slots; ++i) {
            PathFree hit;
            if (p.subject.sort == Sort::Connector) {
                hit = pf::eq(item(p.subject.name), slot(path, i));
            } else {
                hit = pf::disj({pf::eq(item(p.subject.name), slot(path, i, Term::Fn::Src)),
                                pf::eq(item(p.subject.name), slot(path, i, Term::Fn::Tgt))});
            }
            alts.push_back(pf::conj({pf::length_at_least(path, i), std::move(hit)}));
        }
        return alts.empty() ? pf::constant(false) : pf::disj(std::move(alts));
    }
    return pf::pred(p);
}

PathFree translate_rec(const Formula& f, std::size_t n) {
    const auto slots = static_cast<std::uint32_t>(n == 0 ? 0 : n - 1);
    switch (f.kind()) {
        case Formula::Kind::Predicate: return translate_pred(f.pred(), slots);
        case Formula::Kind::Not: return pf::negation(translate_rec(f.body(), n));
        case Formula::Kind::Or: return pf::disj({translate_rec(f.lhs(), n), translate_rec(f.rhs(), n)});
        case Formula::Kind::Exists:
            if (f.bound().sort == Sort::Path) return path_block(f.bound().name, n, translate_rec(f.body(), n));
            return pf::exists_item(f.bound(), translate_rec(f.body(), n));
    }
    return pf::constant(false);
}

std::string term_string(const Term& t) {
    std::string base = t.is_slot() ? t.var + "^" + std::to_string(t.slot) : t.var;
    switch (t.fn) {
        case Term::Fn::Id: return base;
        case Term::Fn::Src: return "s(" + base + ")";
        case Term::Fn::Tgt: return "t(" + base + ")";
    }
    return base;
}

void print(const PathFree& f, std::string& out) {
    using K = PathFreeNode::Kind;
    switch (f->kind) {
        case K::Const: out += f->value ? "true" : "false"; break;
        case K::Pred: out += print_rule(Formula::predicate(f->pred)); break;
        case K::Eq: out += "(" + term_string(f->lhs) + " = " + term_string(f->rhs) + ")"; break;
        case K::LengthIs: out += "(k_" + f->path + " = " + std::to_string(f->index) + ")"; break;
        case K::LengthAtLeast: out += "(" + std::to_string(f->index) + " <= k_" + f->path + ")"; break;
        case K::Not:
            out += "not ";
            print(f->kids[0], out);
            break;
        case K::And:
        case K::Or:
            out += "(";
            for (std::size_t i = 0; i < f->kids.size(); ++i) {
                if (i) out += f->kind == K::And ? " and " : " or ";
                print(f->kids[i], out);
            }
            out += ")";
            break;
        case K::ExistsItem:
            out += "(exists " + std::string(to_string(f->var.sort)) + " " + f->var.name + " . ";
            print(f->kids[0], out);
            out += ")";
            break;
        case K::ExistsLength:
            out += "(exists k_" + f->path + " in 1.." + std::to_string(f->index) + " . ";
            print(f->kids[0], out);
            out += ")";
            break;
        case K::ExistsSlot:
            out += "(exists " + f->path + "^" + std::to_string(f->index) + " . ";
            print(f->kids[0], out);
            out += ")";
            break;
    }
}

}  // namespace

PathFree path_block(const std::string& path, std::size_t n, PathFree body) {
    if (n <= 1) return pf::constant(false);
    const auto slots = static_cast<std::uint32_t>(n - 1);
    PathFree inner = std::move(body);
    for (std::uint32_t i = slots; i >= 1; --i) {
        inner = pf::exists_slot(path, i, pf::conj({guard(path, i), std::move(inner)}));
    }
    return pf::exists_length(path, slots, std::move(inner));
}

PathFree translate(const Formula& f, std::size_t n) { return translate_rec(f, n); }

std::string to_string(const PathFree& f) {
    std::string out;
    print(f, out);
    return out;
}

}  // namespace threatfix
