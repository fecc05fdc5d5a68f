#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "threatfix/formula.hpp"
#include "threatfix/model.hpp"

namespace tftest {

using Rng = std::mt19937_64;

inline int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
inline bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
    return v[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(v.size()) - 1))];
}

struct ModelLimits {
    int max_elements = 5;
    int max_connectors = 8;
    int max_boundaries = 2;
    int max_assets = 2;
    int max_attributes = 3;
    int max_domain = 3;
    bool random_costs = false;
};

/// Fixed small meta model: two element types, two connector types, one
/// asset type, one boundary type and up to `attrs` attributes applied to a
/// random subset of the types.
inline threatfix::MetaModel random_meta(Rng& rng, const ModelLimits& lim) {
    using threatfix::ItemKind;
    threatfix::MetaModel meta;
    meta.add_type("Server", ItemKind::Element);
    meta.add_type("Sensor", ItemKind::Element);
    meta.add_type("Wire", ItemKind::Connector);
    meta.add_type("Radio", ItemKind::Connector);
    meta.add_type("Secret", ItemKind::Asset);
    meta.add_type("Zone", ItemKind::Boundary);
    const std::vector<std::string> types = {"Server", "Sensor", "Wire", "Radio", "Secret", "Zone"};
    const int attrs = uniform(rng, 1, lim.max_attributes);
    for (int a = 0; a < attrs; ++a) {
        std::vector<std::string> domain;
        const int d = uniform(rng, 1, lim.max_domain);
        for (int x = 0; x < d; ++x) domain.push_back("v" + std::to_string(x));
        std::vector<std::string> applies;
        for (const auto& t : types) {
            if (coin(rng, 0.45)) applies.push_back(t);
        }
        if (applies.empty()) applies.push_back(types[static_cast<std::size_t>(uniform(rng, 0, 3))]);
        meta.add_attribute("a" + std::to_string(a), std::move(domain), std::move(applies));
    }
    return meta;
}

inline threatfix::ModelBuilder::Attributes random_attrs(Rng& rng, const threatfix::MetaModel& meta,
                                                        const std::string& type) {
    threatfix::ModelBuilder::Attributes out;
    for (threatfix::AttrId a = 0; a < meta.attributes().size(); ++a) {
        if (!meta.applies(type, a)) continue;
        out[meta.attribute(a).name] = pick(rng, meta.attribute(a).domain);
    }
    return out;
}

inline threatfix::SystemModel random_model(Rng& rng, const ModelLimits& lim = {}) {
    using namespace threatfix;
    const MetaModel meta = random_meta(rng, lim);
    ModelBuilder b(meta);

    const int ne = uniform(rng, 0, lim.max_elements);
    std::vector<std::string> elements;
    for (int i = 1; i <= ne; ++i) {
        const std::string type = coin(rng) ? "Server" : "Sensor";
        elements.push_back("e" + std::to_string(i));
        b.element(elements.back(), type, random_attrs(rng, meta, type));
    }
    std::vector<std::string> connectors;
    if (ne > 0) {
        const int nc = uniform(rng, 0, lim.max_connectors);
        for (int i = 1; i <= nc; ++i) {
            const std::string type = coin(rng) ? "Wire" : "Radio";
            const std::string& s = pick(rng, elements);
            std::string t = pick(rng, elements);
            if (t == s && ne > 1 && coin(rng, 0.8)) t = pick(rng, elements);
            connectors.push_back("c" + std::to_string(i));
            b.connector(connectors.back(), type, s, t, random_attrs(rng, meta, type));
        }
    }
    std::vector<std::string> holders = elements;
    holders.insert(holders.end(), connectors.begin(), connectors.end());
    const int na = uniform(rng, 0, lim.max_assets);
    for (int i = 1; i <= na; ++i) {
        std::vector<std::string> held;
        for (const auto& h : holders) {
            if (coin(rng, 0.3)) held.push_back(h);
        }
        b.asset("s" + std::to_string(i), "Secret", held, random_attrs(rng, meta, "Secret"));
    }
    // Each element goes to at most one boundary; boundary k may nest inside
    // a later one, which keeps the containment a forest.
    const int nb = uniform(rng, 0, lim.max_boundaries);
    std::vector<std::vector<std::string>> contains(static_cast<std::size_t>(nb));
    if (nb > 0) {
        for (const auto& e : elements) {
            const int where = uniform(rng, -1, nb - 1);
            if (where >= 0) contains[static_cast<std::size_t>(where)].push_back(e);
        }
        for (int k = 0; k + 1 < nb; ++k) {
            if (coin(rng, 0.5)) {
                const int parent = uniform(rng, k + 1, nb - 1);
                contains[static_cast<std::size_t>(parent)].push_back("b" + std::to_string(k + 1));
            }
        }
    }
    for (int k = 0; k < nb; ++k) {
        b.boundary("b" + std::to_string(k + 1), "Zone", contains[static_cast<std::size_t>(k)],
                   random_attrs(rng, meta, "Zone"));
    }
    SystemModel m = b.build();

    if (lim.random_costs) {
        CostTable table = m.costs();
        for (CellId c = 0; c < table.size(); ++c) {
            const auto d = m.domain(c).size();
            for (std::size_t x = 0; x < d; ++x) {
                for (std::size_t y = 0; y < d; ++y) {
                    if (x == y) continue;
                    // Mostly integers, sometimes halves and thirds, sometimes free.
                    const int r = uniform(rng, 0, 9);
                    if (r == 0) {
                        table[c][x * d + y] = Cost(0);
                    } else if (r <= 2) {
                        table[c][x * d + y] = Cost(uniform(rng, 1, 7), uniform(rng, 2, 3));
                    } else {
                        table[c][x * d + y] = Cost(uniform(rng, 1, 9));
                    }
                }
            }
        }
        m = m.with_costs(std::move(table));
    }
    return m;
}

/// Random closed, well-sorted formulas over the meta model of `model`.
class FormulaGen {
public:
    FormulaGen(Rng& rng, const threatfix::MetaModel& meta, int max_depth = 4, bool paths = true)
        : rng_(rng), meta_(meta), max_depth_(max_depth), paths_(paths) {}

    threatfix::Formula closed() {
        scope_.clear();
        counter_ = 0;
        nodes_ = 0;
        // The outermost quantifier is an element so a predicate is always
        // available below it.
        return quantified(threatfix::Sort::Element, 1, coin(rng_, 0.75));
    }

private:
    using F = threatfix::Formula;
    using S = threatfix::Sort;

    F quantified(S sort, int depth, bool existential) {
        threatfix::Var v{std::string(prefix(sort)) + std::to_string(counter_++), sort};
        scope_.push_back(v);
        F body = gen(depth);
        scope_.pop_back();
        return existential ? F::exists(v, body) : F::forall(v, body);
    }

    static const char* prefix(S s) {
        switch (s) {
            case S::Element: return "e";
            case S::Connector: return "c";
            case S::Asset: return "a";
            case S::Boundary: return "b";
            case S::Path: return "p";
        }
        return "x";
    }

    F gen(int depth) {
        // Connectives branch more than once on average; a node budget keeps
        // the trees finite and small.
        if (++nodes_ > kMaxNodes) return atom();
        const int r = uniform(rng_, 0, 99);
        if (depth < max_depth_ && r < 30) {
            S sort = S::Element;
            const int k = uniform(rng_, 0, 9);
            if (k < 3) {
                sort = S::Element;
            } else if (k < 5) {
                sort = S::Connector;
            } else if (k < 6) {
                sort = S::Asset;
            } else if (k < 7) {
                sort = S::Boundary;
            } else {
                sort = paths_ ? S::Path : S::Connector;
            }
            return quantified(sort, depth + 1, coin(rng_, 0.7));
        }
        if (r < 45) return F::negation(gen(depth));
        if (r < 60) return F::disjunction(gen(depth), gen(depth));
        if (r < 72) return F::conjunction(gen(depth), gen(depth));
        if (r < 75) return F::implication(gen(depth), gen(depth));
        return atom();
    }

    std::vector<threatfix::Var> of(std::initializer_list<S> sorts) const {
        std::vector<threatfix::Var> out;
        for (const auto& v : scope_) {
            if (std::find(sorts.begin(), sorts.end(), v.sort) != sorts.end()) out.push_back(v);
        }
        return out;
    }

    F atom() {
        using threatfix::PredicateKind;
        using threatfix::Predicate;
        const auto elements = of({S::Element});
        const auto conns = of({S::Connector});
        const auto paths = of({S::Path});
        const auto items = of({S::Element, S::Connector, S::Asset, S::Boundary});
        const auto bounds = of({S::Boundary});
        const auto assets = of({S::Asset});
        const auto ec = of({S::Element, S::Connector});
        const auto eb = of({S::Element, S::Boundary});

        for (int attempt = 0; attempt < 50; ++attempt) {
            Predicate p;
            switch (uniform(rng_, 0, 10)) {
                case 0:
                case 1: {
                    p.kind = PredicateKind::Type;
                    p.subject = pick(rng_, items);
                    const auto kind = *threatfix::item_kind(p.subject.sort);
                    const auto& types = meta_.types(kind);
                    p.literal = types.empty() || coin(rng_, 0.1) ? "Nothing" : pick(rng_, types);
                    return F::predicate(p);
                }
                case 2:
                case 3:
                case 4: {
                    if (meta_.attributes().empty()) continue;
                    p.kind = PredicateKind::Val;
                    p.subject = pick(rng_, items);
                    const auto& attr = pick(rng_, meta_.attributes());
                    p.attribute = attr.name;
                    p.literal = coin(rng_, 0.05) ? "zz" : pick(rng_, attr.domain);
                    return F::predicate(p);
                }
                case 5: {
                    const auto src = coin(rng_) ? conns : paths;
                    if (src.empty() || elements.empty()) continue;
                    p.kind = coin(rng_) ? PredicateKind::Src : PredicateKind::Tgt;
                    p.subject = pick(rng_, src);
                    p.object = pick(rng_, elements);
                    return F::predicate(p);
                }
                case 6: {
                    if (paths.empty() || ec.empty()) continue;
                    p.kind = PredicateKind::In;
                    p.subject = pick(rng_, ec);
                    p.object = pick(rng_, paths);
                    return F::predicate(p);
                }
                case 7: {
                    if (elements.empty() || conns.empty()) continue;
                    p.kind = PredicateKind::Connector;
                    p.subject = pick(rng_, elements);
                    p.object = pick(rng_, conns);
                    return F::predicate(p);
                }
                case 8: {
                    if (conns.empty() || bounds.empty()) continue;
                    p.kind = PredicateKind::Crosses;
                    p.subject = pick(rng_, conns);
                    p.object = pick(rng_, bounds);
                    return F::predicate(p);
                }
                case 9: {
                    if (eb.empty() || bounds.empty()) continue;
                    p.kind = PredicateKind::Contained;
                    p.subject = pick(rng_, eb);
                    p.object = pick(rng_, bounds);
                    return F::predicate(p);
                }
                default: {
                    if (ec.empty() || assets.empty()) continue;
                    p.kind = PredicateKind::Holds;
                    p.subject = pick(rng_, ec);
                    p.object = pick(rng_, assets);
                    return F::predicate(p);
                }
            }
        }
        Predicate p;
        p.kind = PredicateKind::Type;
        p.subject = elements.front();
        p.literal = "Server";
        return F::predicate(p);
    }

    Rng& rng_;
    const threatfix::MetaModel& meta_;
    int max_depth_;
    bool paths_;
    std::vector<threatfix::Var> scope_;
    int counter_ = 0;
    int nodes_ = 0;
    static constexpr int kMaxNodes = 24;
};

/// Random CNF over variables 1..vars with clauses of width `k`.
inline std::vector<std::vector<int>> random_kcnf(Rng& rng, int vars, int clauses, int k) {
    std::vector<std::vector<int>> out;
    for (int i = 0; i < clauses; ++i) {
        std::vector<int> c;
        while (static_cast<int>(c.size()) < std::min(k, vars)) {
            const int v = uniform(rng, 1, vars);
            if (std::any_of(c.begin(), c.end(), [&](int l) { return std::abs(l) == v; })) continue;
            c.push_back(coin(rng) ? v : -v);
        }
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace tftest
