#include "threatfix/model.hpp"

#include <algorithm>
#include <set>

#include "threatfix/error.hpp"

namespace threatfix {

std::string_view to_string(ItemKind kind) {
    switch (kind) {
        case ItemKind::Element: return "element";
        case ItemKind::Connector: return "connector";
        case ItemKind::Asset: return "asset";
        case ItemKind::Boundary: return "boundary";
    }
    return "?";
}

namespace {

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::string_view strip_zeros(std::string_view s) {
    while (s.size() > 1 && s.front() == '0') s.remove_prefix(1);
    return s;
}

}  // namespace

bool natural_less(std::string_view a, std::string_view b) {
    const bool da = all_digits(a);
    const bool db = all_digits(b);
    if (da && db) {
        auto sa = strip_zeros(a);
        auto sb = strip_zeros(b);
        if (sa.size() != sb.size()) return sa.size() < sb.size();
        if (sa != sb) return sa < sb;
        return a < b;
    }
    if (da != db) return da;
    return a < b;
}

// ---------------------------------------------------------------- MetaModel

void MetaModel::add_type(const std::string& name, ItemKind kind) {
    if (name.empty()) throw SchemaError("empty item type name");
    if (auto it = type_kind_.find(name); it != type_kind_.end()) {
        throw SchemaError("item type '" + name + "' declared more than once");
    }
    type_kind_.emplace(name, kind);
    types_[static_cast<std::size_t>(kind)].push_back(name);
}

AttrId MetaModel::add_attribute(const std::string& name, std::vector<std::string> domain,
                                std::vector<std::string> applies_to) {
    if (name.empty()) throw SchemaError("empty attribute name");
    if (attribute_index_.count(name)) throw SchemaError("attribute '" + name + "' declared more than once");
    if (domain.empty()) throw SchemaError("attribute '" + name + "' has an empty domain");
    std::set<std::string> seen;
    for (const auto& v : domain) {
        if (!seen.insert(v).second) {
            throw SchemaError("attribute '" + name + "' lists value '" + v + "' twice");
        }
    }
    for (const auto& t : applies_to) {
        if (!type_kind_.count(t)) {
            throw SchemaError("attribute '" + name + "' applies to unknown type '" + t + "'");
        }
    }
    std::sort(applies_to.begin(), applies_to.end());
    applies_to.erase(std::unique(applies_to.begin(), applies_to.end()), applies_to.end());
    const auto id = static_cast<AttrId>(attributes_.size());
    attributes_.push_back({name, std::move(domain), std::move(applies_to)});
    attribute_index_.emplace(name, id);
    return id;
}

std::optional<ItemKind> MetaModel::kind_of(std::string_view type) const {
    if (auto it = type_kind_.find(type); it != type_kind_.end()) return it->second;
    return std::nullopt;
}

std::vector<std::string> MetaModel::all_types() const {
    std::vector<std::string> out;
    for (const auto& ts : types_) out.insert(out.end(), ts.begin(), ts.end());
    return out;
}

std::optional<AttrId> MetaModel::find_attribute(std::string_view name) const {
    if (auto it = attribute_index_.find(name); it != attribute_index_.end()) return it->second;
    return std::nullopt;
}

std::optional<ValueId> MetaModel::find_value(AttrId attr, std::string_view value) const {
    const auto& dom = attributes_.at(attr).domain;
    auto it = std::find(dom.begin(), dom.end(), value);
    if (it == dom.end()) return std::nullopt;
    return static_cast<ValueId>(it - dom.begin());
}

bool MetaModel::applies(std::string_view type, AttrId attr) const {
    const auto& ts = attributes_.at(attr).applies_to;
    return std::binary_search(ts.begin(), ts.end(), type,
                              [](std::string_view a, std::string_view b) { return a < b; });
}

// -------------------------------------------------------------- SystemModel

std::optional<ItemId> SystemModel::find(std::string_view id) const {
    if (auto it = index_.find(id); it != index_.end()) return it->second;
    return std::nullopt;
}

std::optional<ItemId> SystemModel::parent(ItemId item) const { return parent_.at(item); }

std::optional<CellId> SystemModel::cell(ItemId item, AttrId attr) const {
    const auto n = meta_->attributes().size();
    if (item >= items_.size() || attr >= n) return std::nullopt;
    const auto c = cell_index_[item * n + attr];
    if (c < 0) return std::nullopt;
    return static_cast<CellId>(c);
}

std::optional<ValueId> SystemModel::value(ItemId item, AttrId attr) const {
    if (auto c = cell(item, attr)) return valuation_[*c];
    return std::nullopt;
}

Cost SystemModel::distance(const Valuation& from, const Valuation& to) const {
    Cost total = 0;
    for (CellId c = 0; c < cells_.size(); ++c) {
        if (from.at(c) != to.at(c)) total += cost(c, from[c], to[c]);
    }
    return total;
}

SystemModel SystemModel::with_valuation(Valuation valuation) const {
    if (valuation.size() != cells_.size()) throw UsageError("valuation size does not match cell count");
    for (CellId c = 0; c < cells_.size(); ++c) {
        if (valuation[c] >= domain(c).size()) throw UsageError("valuation value out of domain");
    }
    SystemModel copy = *this;
    copy.valuation_ = std::move(valuation);
    return copy;
}

SystemModel SystemModel::with_costs(CostTable costs) const {
    if (costs.size() != cells_.size()) throw UsageError("cost table size does not match cell count");
    for (CellId c = 0; c < cells_.size(); ++c) {
        const auto d = domain(c).size();
        if (costs[c].size() != d * d) throw UsageError("cost block has wrong size");
        for (std::size_t x = 0; x < d; ++x) {
            for (std::size_t y = 0; y < d; ++y) {
                const Cost& w = costs[c][x * d + y];
                if (w < 0) throw SchemaError("negative cost");
                if (x == y && w != Cost(0)) throw SchemaError("keeping a value must cost 0");
            }
        }
    }
    SystemModel copy = *this;
    copy.costs_ = std::move(costs);
    return copy;
}

bool operator==(const SystemModel& a, const SystemModel& b) {
    return *a.meta_ == *b.meta_ && a.items_ == b.items_ && a.source_ == b.source_ &&
           a.target_ == b.target_ && a.parent_ == b.parent_ && a.holds_ == b.holds_ &&
           a.cells_ == b.cells_ && a.valuation_ == b.valuation_ && a.costs_ == b.costs_;
}

std::vector<std::pair<ItemId, ItemId>> transitive_containment(const SystemModel& model) {
    std::vector<std::pair<ItemId, ItemId>> out;
    for (ItemId b : model.boundaries()) {
        for (ItemId x = 0; x < model.items().size(); ++x) {
            if (model.contains(b, x)) out.emplace_back(b, x);
        }
    }
    return out;
}

// ------------------------------------------------------------- ModelBuilder

ModelBuilder::ModelBuilder(MetaModel meta) : meta_(std::make_shared<const MetaModel>(std::move(meta))) {}

ModelBuilder& ModelBuilder::element(std::string id, std::string type, Attributes attrs) {
    pending_.push_back({std::move(id), ItemKind::Element, std::move(type), std::move(attrs), {}});
    return *this;
}

ModelBuilder& ModelBuilder::connector(std::string id, std::string type, std::string source,
                                      std::string target, Attributes attrs) {
    pending_.push_back({std::move(id), ItemKind::Connector, std::move(type), std::move(attrs),
                        {std::move(source), std::move(target)}});
    return *this;
}

ModelBuilder& ModelBuilder::asset(std::string id, std::string type, std::vector<std::string> held_by,
                                  Attributes attrs) {
    pending_.push_back({std::move(id), ItemKind::Asset, std::move(type), std::move(attrs), std::move(held_by)});
    return *this;
}

ModelBuilder& ModelBuilder::boundary(std::string id, std::string type, std::vector<std::string> contains,
                                     Attributes attrs) {
    pending_.push_back(
        {std::move(id), ItemKind::Boundary, std::move(type), std::move(attrs), std::move(contains)});
    return *this;
}

SystemModel ModelBuilder::build() const {
    const MetaModel& meta = *meta_;
    SystemModel m;
    m.meta_ = meta_;

    // Order: kind-major, natural identifier order within a kind.
    std::vector<const Pending*> order;
    order.reserve(pending_.size());
    for (const auto& p : pending_) {
        if (p.id.empty()) throw SchemaError("item with empty identifier");
        order.push_back(&p);
    }
    std::stable_sort(order.begin(), order.end(), [](const Pending* a, const Pending* b) {
        if (a->kind != b->kind) return a->kind < b->kind;
        return natural_less(a->id, b->id);
    });

    const std::size_t n = order.size();
    m.items_.reserve(n);
    for (const Pending* p : order) {
        const auto kind = meta.kind_of(p->type);
        if (!kind) throw SchemaError("item '" + p->id + "' has unknown type '" + p->type + "'");
        if (*kind != p->kind) {
            throw SchemaError("item '" + p->id + "' is a " + std::string(to_string(p->kind)) + " but type '" +
                              p->type + "' is a " + std::string(to_string(*kind)) + " type");
        }
        const auto id = static_cast<ItemId>(m.items_.size());
        if (!m.index_.emplace(p->id, id).second) {
            throw SchemaError("duplicate item identifier '" + p->id + "'");
        }
        m.items_.push_back({p->id, p->kind, p->type});
        m.by_kind_[static_cast<std::size_t>(p->kind)].push_back(id);
    }

    auto resolve = [&](const std::string& owner, const std::string& ref) -> ItemId {
        auto it = m.index_.find(ref);
        if (it == m.index_.end()) {
            throw SchemaError("item '" + owner + "' references unknown item '" + ref + "'");
        }
        return it->second;
    };

    m.source_.assign(n, 0);
    m.target_.assign(n, 0);
    m.parent_.assign(n, std::nullopt);
    m.holds_.assign(n * n, false);

    for (ItemId i = 0; i < n; ++i) {
        const Pending& p = *order[i];
        switch (p.kind) {
            case ItemKind::Connector: {
                for (std::size_t k = 0; k < 2; ++k) {
                    const ItemId e = resolve(p.id, p.refs.at(k));
                    if (m.items_[e].kind != ItemKind::Element) {
                        throw SchemaError("connector '" + p.id + "' endpoint '" + p.refs[k] + "' is not an element");
                    }
                    (k == 0 ? m.source_ : m.target_)[i] = e;
                }
                break;
            }
            case ItemKind::Asset: {
                for (const auto& ref : p.refs) {
                    const ItemId h = resolve(p.id, ref);
                    const auto hk = m.items_[h].kind;
                    if (hk != ItemKind::Element && hk != ItemKind::Connector) {
                        throw SchemaError("asset '" + p.id + "' held by '" + ref + "', which is neither element nor connector");
                    }
                    m.holds_[h * n + i] = true;
                }
                break;
            }
            case ItemKind::Boundary: {
                for (const auto& ref : p.refs) {
                    const ItemId c = resolve(p.id, ref);
                    const auto ck = m.items_[c].kind;
                    if (ck != ItemKind::Element && ck != ItemKind::Boundary) {
                        throw SchemaError("boundary '" + p.id + "' contains '" + ref + "', which is neither element nor boundary");
                    }
                    if (c == i) throw SchemaError("boundary '" + p.id + "' contains itself");
                    if (m.parent_[c] && *m.parent_[c] != i) {
                        throw SchemaError("item '" + ref + "' is contained in more than one boundary");
                    }
                    m.parent_[c] = i;
                }
                break;
            }
            case ItemKind::Element: break;
        }
    }

    // Containment must be a forest: walk parents, detect cycles.
    m.closure_.assign(n * n, false);
    for (ItemId x = 0; x < n; ++x) {
        std::size_t steps = 0;
        for (auto p = m.parent_[x]; p; p = m.parent_[*p]) {
            if (*p == x || ++steps > n) {
                throw SchemaError("containment cycle through '" + m.items_[x].id + "'");
            }
            m.closure_[*p * n + x] = true;
        }
    }

    // Cells, in (item, attribute) order.
    const std::size_t na = meta.attributes().size();
    m.cell_index_.assign(n * na, -1);
    for (ItemId i = 0; i < n; ++i) {
        const Pending& p = *order[i];
        for (const auto& [name, value] : p.attrs) {
            const auto a = meta.find_attribute(name);
            if (!a) throw SchemaError("item '" + p.id + "' sets unknown attribute '" + name + "'");
            if (!meta.applies(p.type, *a)) {
                throw SchemaError("attribute '" + name + "' does not apply to item '" + p.id + "' of type '" + p.type + "'");
            }
            if (!meta.find_value(*a, value)) {
                throw SchemaError("item '" + p.id + "' attribute '" + name + "' has out-of-domain value '" + value + "'");
            }
        }
        for (AttrId a = 0; a < na; ++a) {
            if (!meta.applies(p.type, a)) continue;
            const auto& def = meta.attribute(a);
            ValueId v = 0;
            if (auto it = p.attrs.find(def.name); it != p.attrs.end()) {
                v = *meta.find_value(a, it->second);
            } else if (auto u = meta.find_value(a, "undefined")) {
                v = *u;
            }
            m.cell_index_[i * na + a] = static_cast<std::int32_t>(m.cells_.size());
            m.cells_.push_back({i, a});
            m.valuation_.push_back(v);
            const std::size_t d = def.domain.size();
            std::vector<Cost> block(d * d, Cost(1));
            for (std::size_t x = 0; x < d; ++x) block[x * d + x] = 0;
            m.costs_.push_back(std::move(block));
        }
    }
    return m;
}

}  // namespace threatfix
