#include "threatfix/semantics.hpp"

#include <algorithm>

#include "threatfix/error.hpp"

namespace threatfix {

std::vector<ItemId> path_elements(const SystemModel& model, const Path& path) {
    std::vector<ItemId> out;
    if (path.connectors.empty()) return out;
    out.push_back(model.source(path.connectors.front()));
    for (ItemId c : path.connectors) out.push_back(model.target(c));
    return out;
}

namespace {

void extend_paths(const SystemModel& m, std::vector<ItemId>& chain, std::vector<bool>& visited,
                  std::vector<Path>& out) {
    out.push_back(Path{chain});
    const ItemId end = m.target(chain.back());
    for (ItemId c : m.connectors()) {
        if (m.source(c) != end || visited[m.target(c)]) continue;
        visited[m.target(c)] = true;
        chain.push_back(c);
        extend_paths(m, chain, visited, out);
        chain.pop_back();
        visited[m.target(c)] = false;
    }
}

}  // namespace

std::vector<Path> enumerate_paths(const SystemModel& model) {
    std::vector<Path> out;
    std::vector<bool> visited(model.items().size(), false);
    std::vector<ItemId> chain;
    for (ItemId c : model.connectors()) {
        const ItemId s = model.source(c);
        const ItemId t = model.target(c);
        if (s == t) continue;  // a self-loop revisits its element
        visited[s] = visited[t] = true;
        chain.push_back(c);
        extend_paths(model, chain, visited, out);
        chain.pop_back();
        visited[s] = visited[t] = false;
    }
    return out;
}

const Value* Assignment::lookup(const std::string& name) const {
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
        if (it->first.name == name) return &it->second;
    }
    return nullptr;
}

std::string render_value(const SystemModel& model, const Value& value) {
    if (const auto* item = std::get_if<ItemId>(&value)) return model.id(*item);
    std::string out;
    for (ItemId c : std::get<Path>(value).connectors) {
        if (!out.empty()) out += ",";
        out += model.id(c);
    }
    return out;
}

Evaluator::Evaluator(const SystemModel& model) : model_(&model), paths_(enumerate_paths(model)) {}

template <typename Fn>
bool Evaluator::any_value(const Var& var, Assignment& env, Fn&& fn) const {
    if (var.sort == Sort::Path) {
        for (const Path& p : paths_) {
            env.bind(var, p);
            const bool stop = fn();
            env.unbind();
            if (stop) return true;
        }
        return false;
    }
    for (ItemId i : model_->of_kind(*item_kind(var.sort))) {
        env.bind(var, i);
        const bool stop = fn();
        env.unbind();
        if (stop) return true;
    }
    return false;
}

bool eval_predicate(const SystemModel& m, const Predicate& p, const Assignment& env, const Valuation& v) {
    auto item = [&](const Var& var) -> ItemId {
        const Value* val = env.lookup(var.name);
        if (!val) throw SortError("unbound variable '" + var.name + "'");
        return std::get<ItemId>(*val);
    };
    auto path = [&](const Var& var) -> const Path& {
        const Value* val = env.lookup(var.name);
        if (!val) throw SortError("unbound variable '" + var.name + "'");
        return std::get<Path>(*val);
    };

    switch (p.kind) {
        case PredicateKind::Type: return m.item(item(p.subject)).type == p.literal;
        case PredicateKind::Val: {
            const auto attr = m.meta().find_attribute(p.attribute);
            if (!attr) return false;
            const auto cell = m.cell(item(p.subject), *attr);
            if (!cell) return false;
            return m.value_name(*cell, v[*cell]) == p.literal;
        }
        case PredicateKind::Src:
            if (p.subject.sort == Sort::Path) return m.source(path(p.subject).connectors.front()) == item(p.object);
            return m.source(item(p.subject)) == item(p.object);
        case PredicateKind::Tgt:
            if (p.subject.sort == Sort::Path) return m.target(path(p.subject).connectors.back()) == item(p.object);
            return m.target(item(p.subject)) == item(p.object);
        case PredicateKind::In: {
            const ItemId x = item(p.subject);
            const Path& pi = path(p.object);
            if (p.subject.sort == Sort::Connector) {
                return std::find(pi.connectors.begin(), pi.connectors.end(), x) != pi.connectors.end();
            }
            if (m.source(pi.connectors.front()) == x) return true;
            return std::any_of(pi.connectors.begin(), pi.connectors.end(),
                               [&](ItemId c) { return m.target(c) == x; });
        }
        case PredicateKind::Connector: {
            const ItemId e = item(p.subject);
            const ItemId c = item(p.object);
            return m.source(c) == e || m.target(c) == e;
        }
        case PredicateKind::Crosses: {
            const ItemId c = item(p.subject);
            const ItemId b = item(p.object);
            return m.contains(b, m.source(c)) != m.contains(b, m.target(c));
        }
        case PredicateKind::Contained: return m.contains(item(p.object), item(p.subject));
        case PredicateKind::Holds: return m.holds(item(p.subject), item(p.object));
    }
    return false;
}

bool Evaluator::eval(const Formula& f, Assignment& env, const Valuation* valuation) const {
    const Valuation& v = valuation ? *valuation : model_->valuation();
    switch (f.kind()) {
        case Formula::Kind::Predicate: return eval_predicate(*model_, f.pred(), env, v);
        case Formula::Kind::Not: return !eval(f.body(), env, &v);
        case Formula::Kind::Or: return eval(f.lhs(), env, &v) || eval(f.rhs(), env, &v);
        case Formula::Kind::Exists:
            return any_value(f.bound(), env, [&] { return eval(f.body(), env, &v); });
    }
    return false;
}

bool Evaluator::eval(const Formula& f, const Valuation* valuation) const {
    Assignment env;
    return eval(f, env, valuation);
}

std::vector<Witness> Evaluator::witnesses(const std::string& rule, const Formula& f, std::size_t cap,
                                          const Valuation* valuation) const {
    std::vector<Var> prefix;
    const Formula* body = &f;
    while (body->kind() == Formula::Kind::Exists) {
        prefix.push_back(body->bound());
        body = &body->body();
    }

    std::vector<Witness> out;
    Assignment env;
    auto rec = [&](auto&& self, std::size_t depth) -> bool {
        if (out.size() >= cap) return true;
        if (depth == prefix.size()) {
            if (eval(*body, env, valuation)) out.push_back({rule, env});
            return out.size() >= cap;
        }
        return any_value(prefix[depth], env, [&] { return self(self, depth + 1); });
    };
    rec(rec, 0);
    return out;
}

bool eval(const SystemModel& model, const Formula& f) { return Evaluator(model).eval(f); }

std::vector<Witness> witnesses(const SystemModel& model, const std::string& rule, const Formula& f) {
    return Evaluator(model).witnesses(rule, f);
}

BruteForceResult brute_force_min_repair(const SystemModel& model, const RuleSet& rules, std::uint64_t bound) {
    const std::size_t ncells = model.cells().size();
    std::uint64_t space = 1;
    for (CellId c = 0; c < ncells; ++c) {
        space *= model.domain(c).size();
        if (space > bound) {
            throw LimitError("valuation space exceeds the brute-force bound of " + std::to_string(bound));
        }
    }

    const Evaluator ev(model);
    BruteForceResult best;
    // A matched rule without attribute constraints is immune to any repair.
    for (const auto& r : rules) {
        if (!has_attr(r.formula) && ev.eval(r.formula)) return best;
    }

    const Valuation& original = model.valuation();
    Valuation current(ncells, 0);
    auto dfs = [&](auto&& self, CellId c, const Cost& partial) -> void {
        if (best.repairable && partial >= best.cost) return;
        if (c == ncells) {
            for (const auto& r : rules) {
                if (ev.eval(r.formula, &current)) return;
            }
            best.repairable = true;
            best.cost = partial;
            best.valuation = current;
            return;
        }
        for (ValueId x = 0; x < model.domain(c).size(); ++x) {
            current[c] = x;
            self(self, c + 1, partial + model.cost(c, original[c], x));
        }
    };
    dfs(dfs, 0, Cost(0));
    return best;
}

}  // namespace threatfix
