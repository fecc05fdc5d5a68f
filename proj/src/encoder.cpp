#include "threatfix/encoder.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "threatfix/error.hpp"

namespace threatfix {

namespace {
constexpr ItemId kNone = std::numeric_limits<ItemId>::max();
}  // namespace

Valuation VarTable::decode(const SystemModel& model, const std::vector<bool>& assignment) const {
    Valuation out(first_.size(), 0);
    for (CellId c = 0; c < first_.size(); ++c) {
        for (ValueId x = 0; x < model.domain(c).size(); ++x) {
            const auto v = static_cast<std::size_t>(attr(c, x));
            if (v < assignment.size() && assignment[v]) {
                out[c] = x;
                break;
            }
        }
    }
    return out;
}

VarTable encode_model(const SystemModel& model, ClauseSink& sink) {
    VarTable vt;
    std::vector<Lit> lits;
    for (CellId c = 0; c < model.cells().size(); ++c) {
        lits.clear();
        for (std::size_t x = 0; x < model.domain(c).size(); ++x) lits.push_back(sink.new_var());
        vt.first_.push_back(lits.front());
        vt.count_ += static_cast<int>(lits.size());
        exactly_one(sink, lits);
    }
    return vt;
}

void pin_valuation(const SystemModel& model, const VarTable& vt, const Valuation& valuation, ClauseSink& sink) {
    for (CellId c = 0; c < model.cells().size(); ++c) {
        for (ValueId x = 0; x < model.domain(c).size(); ++x) {
            if (x != valuation[c]) sink.add_clause({-vt.attr(c, x)});
        }
    }
}

std::vector<SoftAssertion> soft_assertions(const SystemModel& model, const Valuation* base) {
    const Valuation& from = base ? *base : model.valuation();
    std::vector<SoftAssertion> out;
    for (CellId c = 0; c < model.cells().size(); ++c) {
        for (ValueId x = 0; x < model.domain(c).size(); ++x) {
            if (x != from[c]) out.push_back({c, x, model.cost(c, from[c], x)});
        }
    }
    return out;
}

std::int64_t cost_scale(const std::vector<SoftAssertion>& softs) {
    std::int64_t scale = 1;
    for (const auto& s : softs) {
        const std::int64_t d = s.cost.denominator();
        const std::int64_t g = std::gcd(scale, d);
        if (scale / g > std::numeric_limits<std::int64_t>::max() / d) {
            throw LimitError("cost denominators are too large to scale to integers");
        }
        scale = scale / g * d;
    }
    return scale;
}

std::int64_t scaled_cost(const Cost& cost, std::int64_t scale) {
    const std::int64_t factor = scale / cost.denominator();
    if (factor != 0 && cost.numerator() > std::numeric_limits<std::int64_t>::max() / factor) {
        throw LimitError("scaled cost overflows 64 bits");
    }
    return cost.numerator() * factor;
}

Path decode_path(const SystemModel& model, const PathInstance& inst, const std::vector<bool>& assignment) {
    auto truth = [&](Lit l) {
        const auto v = static_cast<std::size_t>(var_of(l));
        return v < assignment.size() && assignment[v] == (l > 0);
    };
    std::size_t k = 0;
    for (std::size_t i = 0; i < inst.length.size(); ++i) {
        if (truth(inst.length[i])) k = i + 1;
    }
    Path p;
    const auto conns = model.connectors();
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < conns.size(); ++j) {
            if (truth(inst.slots[i][j])) {
                p.connectors.push_back(conns[j]);
                break;
            }
        }
    }
    return p;
}

Grounder::Grounder(const SystemModel& model, const VarTable& vt, ClauseSink& sink)
    : model_(&model), vt_(&vt), sink_(&sink) {}

Circuit::Ref Grounder::ground(const PathFree& f, bool positive) {
    using K = PathFreeNode::Kind;
    Circuit& c = circuit_;
    switch (f->kind) {
        case K::Const: return f->value ? Circuit::kTrue : Circuit::kFalse;

        case K::Pred: {
            const Predicate& p = f->pred;
            if (p.kind != PredicateKind::Val) {
                return eval_predicate(*model_, p, items_, model_->valuation()) ? Circuit::kTrue : Circuit::kFalse;
            }
            const Value* x = items_.lookup(p.subject.name);
            if (!x) throw SortError("unbound variable '" + p.subject.name + "'");
            const auto attr = model_->meta().find_attribute(p.attribute);
            if (!attr) return Circuit::kFalse;
            const auto cell = model_->cell(std::get<ItemId>(*x), *attr);
            if (!cell) return Circuit::kFalse;
            const auto value = model_->meta().find_value(*attr, p.literal);
            if (!value) return Circuit::kFalse;
            return c.input(vt_->attr(*cell, *value));
        }

        case K::Eq: return equal(f->lhs, f->rhs);

        case K::LengthIs:
        case K::LengthAtLeast: {
            const PathBinding& b = paths_.at(f->path).back();
            const bool at_least = f->kind == K::LengthAtLeast;
            if (!b.symbolic) {
                return (at_least ? f->index <= b.length : f->index == b.length) ? Circuit::kTrue : Circuit::kFalse;
            }
            if (f->index == 0) return at_least ? Circuit::kTrue : Circuit::kFalse;
            const PathInstance& inst = instances_[b.instance];
            std::vector<Circuit::Ref> alts;
            for (std::uint32_t k = f->index; k <= inst.length.size(); ++k) {
                alts.push_back(c.input(inst.length[k - 1]));
                if (!at_least) break;
            }
            return c.mk_or(std::move(alts));
        }

        case K::Not: return Circuit::negate(ground(f->kids[0], !positive));

        case K::And: {
            std::vector<Circuit::Ref> parts;
            for (const auto& kid : f->kids) {
                const Circuit::Ref r = ground(kid, positive);
                if (r == Circuit::kFalse) return Circuit::kFalse;
                parts.push_back(r);
            }
            return c.mk_and(std::move(parts));
        }

        case K::Or: {
            std::vector<Circuit::Ref> parts;
            for (const auto& kid : f->kids) {
                const Circuit::Ref r = ground(kid, positive);
                if (r == Circuit::kTrue) return Circuit::kTrue;
                parts.push_back(r);
            }
            return c.mk_or(std::move(parts));
        }

        case K::ExistsItem: {
            std::vector<Circuit::Ref> parts;
            for (ItemId i : model_->of_kind(*item_kind(f->var.sort))) {
                items_.bind(f->var, i);
                const Circuit::Ref r = ground(f->kids[0], positive);
                items_.unbind();
                if (r == Circuit::kTrue) return Circuit::kTrue;
                parts.push_back(r);
            }
            return c.mk_or(std::move(parts));
        }

        case K::ExistsLength: return ground_exists_length(f, positive);
        case K::ExistsSlot: return ground_exists_slot(f, positive);
    }
    return Circuit::kFalse;
}

Circuit::Ref Grounder::ground_exists_length(const PathFree& f, bool positive) {
    const auto conns = model_->connectors();
    if (conns.empty() || f->index == 0) return Circuit::kFalse;
    auto& stack = paths_[f->path];

    if (positive) {
        PathInstance inst;
        inst.var = f->path;
        for (std::uint32_t k = 0; k < f->index; ++k) inst.length.push_back(sink_->new_var());
        inst.slots.resize(f->index);
        for (auto& s : inst.slots) {
            for (std::size_t j = 0; j < conns.size(); ++j) s.push_back(sink_->new_var());
        }
        exactly_one(*sink_, inst.length);
        for (const auto& s : inst.slots) exactly_one(*sink_, s);
        instances_.push_back(std::move(inst));

        PathBinding b;
        b.symbolic = true;
        b.instance = instances_.size() - 1;
        stack.push_back(std::move(b));
        const Circuit::Ref r = ground(f->kids[0], positive);
        paths_[f->path].pop_back();
        return r;
    }

    std::vector<Circuit::Ref> parts;
    for (std::uint32_t k = 1; k <= f->index; ++k) {
        PathBinding b;
        b.length = k;
        b.slots.assign(f->index, kNone);
        paths_[f->path].push_back(std::move(b));
        const Circuit::Ref r = ground(f->kids[0], positive);
        paths_[f->path].pop_back();
        if (r == Circuit::kTrue) return Circuit::kTrue;
        parts.push_back(r);
    }
    return circuit_.mk_or(std::move(parts));
}

Circuit::Ref Grounder::ground_exists_slot(const PathFree& f, bool positive) {
    PathBinding& b = paths_.at(f->path).back();
    if (b.symbolic) return ground(f->kids[0], positive);

    // A slot the body cannot observe ranges over a nonempty domain, so the
    // quantifier is vacuous.
    if (!depends_on(f->kids[0], f->path, f->index)) return ground(f->kids[0], positive);

    std::vector<Circuit::Ref> parts;
    for (ItemId conn : model_->connectors()) {
        paths_.at(f->path).back().slots[f->index - 1] = conn;
        const Circuit::Ref r = ground(f->kids[0], positive);
        if (r == Circuit::kTrue) {
            paths_.at(f->path).back().slots[f->index - 1] = kNone;
            return Circuit::kTrue;
        }
        parts.push_back(r);
    }
    paths_.at(f->path).back().slots[f->index - 1] = kNone;
    return circuit_.mk_or(std::move(parts));
}

Grounder::Dist Grounder::dist(const Term& t) {
    const SystemModel& m = *model_;
    auto apply = [&](ItemId x) -> ItemId {
        switch (t.fn) {
            case Term::Fn::Id: return x;
            case Term::Fn::Src: return m.source(x);
            case Term::Fn::Tgt: return m.target(x);
        }
        return x;
    };

    if (!t.is_slot()) {
        const Value* v = items_.lookup(t.var);
        if (!v) throw SortError("unbound variable '" + t.var + "'");
        return {{apply(std::get<ItemId>(*v)), Circuit::kTrue}};
    }

    const PathBinding& b = paths_.at(t.var).back();
    if (!b.symbolic) {
        const ItemId conn = b.slots.at(t.slot - 1);
        if (conn == kNone) throw UsageError("slot " + std::to_string(t.slot) + " of '" + t.var + "' read before binding");
        return {{apply(conn), Circuit::kTrue}};
    }

    const PathInstance& inst = instances_[b.instance];
    const auto conns = m.connectors();
    std::map<ItemId, std::vector<Circuit::Ref>> groups;
    for (std::size_t j = 0; j < conns.size(); ++j) {
        groups[apply(conns[j])].push_back(circuit_.input(inst.slots[t.slot - 1][j]));
    }
    Dist out;
    for (auto& [value, refs] : groups) out.emplace_back(value, circuit_.mk_or(std::move(refs)));
    return out;
}

Circuit::Ref Grounder::equal(const Term& a, const Term& b) {
    const Dist da = dist(a);
    const Dist db = dist(b);
    std::vector<Circuit::Ref> alts;
    auto i = da.begin();
    auto j = db.begin();
    while (i != da.end() && j != db.end()) {
        if (i->first < j->first) {
            ++i;
        } else if (j->first < i->first) {
            ++j;
        } else {
            alts.push_back(circuit_.mk_and(i->second, j->second));
            ++i;
            ++j;
        }
    }
    return circuit_.mk_or(std::move(alts));
}

std::optional<bool> Grounder::static_value(const PathFree& f) const {
    using K = PathFreeNode::Kind;
    switch (f->kind) {
        case K::Const: return f->value;
        case K::LengthIs:
        case K::LengthAtLeast: {
            const auto it = paths_.find(f->path);
            if (it == paths_.end() || it->second.empty() || it->second.back().symbolic) return std::nullopt;
            const std::uint32_t k = it->second.back().length;
            return f->kind == K::LengthIs ? f->index == k : f->index <= k;
        }
        case K::Not: {
            const auto v = static_value(f->kids[0]);
            if (!v) return std::nullopt;
            return !*v;
        }
        case K::And:
        case K::Or: {
            const bool absorbing = f->kind == K::Or;
            bool all_known = true;
            for (const auto& kid : f->kids) {
                const auto v = static_value(kid);
                if (v && *v == absorbing) return absorbing;
                if (!v) all_known = false;
            }
            if (all_known) return !absorbing;
            return std::nullopt;
        }
        default: return std::nullopt;
    }
}

bool Grounder::depends_on(const PathFree& f, const std::string& path, std::uint32_t slot) const {
    using K = PathFreeNode::Kind;
    auto mentions = [&](const Term& t) { return t.is_slot() && t.var == path && t.slot == slot; };
    switch (f->kind) {
        case K::Eq: return mentions(f->lhs) || mentions(f->rhs);
        case K::Not: return depends_on(f->kids[0], path, slot);
        case K::And:
        case K::Or: {
            const bool absorbing = f->kind == K::Or;
            for (const auto& kid : f->kids) {
                const auto v = static_value(kid);
                if (v && *v == absorbing) return false;
            }
            return std::any_of(f->kids.begin(), f->kids.end(),
                               [&](const PathFree& kid) { return depends_on(kid, path, slot); });
        }
        case K::ExistsLength:
            if (f->path == path) return false;  // shadowed
            return depends_on(f->kids[0], path, slot);
        case K::ExistsItem:
        case K::ExistsSlot: return depends_on(f->kids[0], path, slot);
        default: return false;
    }
}

std::vector<PathInstance> assert_rule(const SystemModel& model, const VarTable& vt, const Formula& f, bool negated,
                                      ClauseSink& sink) {
    const PathFree t = translate(f, model.elements().size());
    Grounder g(model, vt, sink);
    const Circuit::Ref r = g.ground(t, !negated);
    g.assert_true(negated ? Circuit::negate(r) : r);
    return g.instances();
}

void assert_any(const SystemModel& model, const VarTable& vt, const std::vector<Formula>& rules, ClauseSink& sink) {
    Grounder g(model, vt, sink);
    std::vector<Circuit::Ref> parts;
    for (const auto& f : rules) {
        const Circuit::Ref r = g.ground(translate(f, model.elements().size()), true);
        if (r == Circuit::kTrue) {
            parts.assign(1, Circuit::kTrue);
            break;
        }
        parts.push_back(r);
    }
    g.assert_true(g.circuit().mk_or(std::move(parts)));
}

}  // namespace threatfix
