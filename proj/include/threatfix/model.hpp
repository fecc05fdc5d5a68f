#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/rational.hpp>

namespace threatfix {

/// Exact attribute-change cost.
using Cost = boost::rational<std::int64_t>;

enum class ItemKind : std::uint8_t { Element = 0, Connector = 1, Asset = 2, Boundary = 3 };

inline constexpr std::array<ItemKind, 4> kAllKinds = {ItemKind::Element, ItemKind::Connector,
                                                      ItemKind::Asset, ItemKind::Boundary};

std::string_view to_string(ItemKind kind);

using ItemId = std::uint32_t;   ///< index into SystemModel::items()
using AttrId = std::uint32_t;   ///< index into MetaModel::attributes()
using ValueId = std::uint32_t;  ///< index into an attribute's domain
using CellId = std::uint32_t;   ///< index into SystemModel::cells()

/// Orders identifiers numerically when both are digit strings, otherwise
/// lexicographically (numeric ids sort before non-numeric ones).
bool natural_less(std::string_view a, std::string_view b);

struct AttributeDef {
    std::string name;
    std::vector<std::string> domain;
    std::vector<std::string> applies_to;

    friend bool operator==(const AttributeDef&, const AttributeDef&) = default;
};

/// Item types partitioned by kind, attribute names with finite ordered
/// domains, and the attribute labelling of types.
class MetaModel {
public:
    void add_type(const std::string& name, ItemKind kind);
    AttrId add_attribute(const std::string& name, std::vector<std::string> domain,
                         std::vector<std::string> applies_to);

    std::optional<ItemKind> kind_of(std::string_view type) const;
    const std::vector<std::string>& types(ItemKind kind) const {
        return types_[static_cast<std::size_t>(kind)];
    }
    std::vector<std::string> all_types() const;

    const std::vector<AttributeDef>& attributes() const noexcept { return attributes_; }
    const AttributeDef& attribute(AttrId id) const { return attributes_.at(id); }
    std::optional<AttrId> find_attribute(std::string_view name) const;
    std::optional<ValueId> find_value(AttrId attr, std::string_view value) const;

    bool applies(std::string_view type, AttrId attr) const;

    friend bool operator==(const MetaModel& a, const MetaModel& b) {
        return a.types_ == b.types_ && a.attributes_ == b.attributes_;
    }

private:
    std::array<std::vector<std::string>, 4> types_;
    std::map<std::string, ItemKind, std::less<>> type_kind_;
    std::vector<AttributeDef> attributes_;
    std::map<std::string, AttrId, std::less<>> attribute_index_;
};

struct Item {
    std::string id;
    ItemKind kind;
    std::string type;

    friend bool operator==(const Item&, const Item&) = default;
};

/// An (item, attribute) pair where the attribute applies to the item's type.
struct Cell {
    ItemId item;
    AttrId attr;

    friend bool operator==(const Cell&, const Cell&) = default;
};

/// Value index per cell, indexed by CellId.
using Valuation = std::vector<ValueId>;

/// Transition-cost matrices, one row-major |D| x |D| block per cell.
using CostTable = std::vector<std::vector<Cost>>;

class ModelBuilder;

/// Immutable system model: typed items, connector endpoints, containment
/// tree, asset relation, attribute valuation and change costs.
///
/// Items are stored kind-major (elements, connectors, assets, boundaries) and
/// within a kind in natural identifier order, so ItemId order is the
/// deterministic enumeration order used everywhere else.
class SystemModel {
public:
    const MetaModel& meta() const noexcept { return *meta_; }

    std::span<const Item> items() const noexcept { return items_; }
    const Item& item(ItemId id) const { return items_.at(id); }
    const std::string& id(ItemId id) const { return items_.at(id).id; }
    std::optional<ItemId> find(std::string_view id) const;
    std::span<const ItemId> of_kind(ItemKind kind) const {
        return by_kind_[static_cast<std::size_t>(kind)];
    }
    std::span<const ItemId> elements() const { return of_kind(ItemKind::Element); }
    std::span<const ItemId> connectors() const { return of_kind(ItemKind::Connector); }
    std::span<const ItemId> assets() const { return of_kind(ItemKind::Asset); }
    std::span<const ItemId> boundaries() const { return of_kind(ItemKind::Boundary); }

    ItemId source(ItemId connector) const { return source_.at(connector); }
    ItemId target(ItemId connector) const { return target_.at(connector); }

    /// (holder, asset) in the asset relation.
    bool holds(ItemId holder, ItemId asset) const { return holds_[holder * items_.size() + asset]; }
    /// Direct parent in the containment tree.
    std::optional<ItemId> parent(ItemId item) const;
    /// (boundary, x) in the transitive containment closure.
    bool contains(ItemId boundary, ItemId x) const { return closure_[boundary * items_.size() + x]; }

    std::span<const Cell> cells() const noexcept { return cells_; }
    std::optional<CellId> cell(ItemId item, AttrId attr) const;
    const std::vector<std::string>& domain(CellId cell) const {
        return meta_->attribute(cells_.at(cell).attr).domain;
    }

    /// Original valuation (the one ingested).
    const Valuation& valuation() const noexcept { return valuation_; }
    std::optional<ValueId> value(ItemId item, AttrId attr) const;
    const std::string& value_name(CellId cell, ValueId value) const { return domain(cell).at(value); }

    const Cost& cost(CellId cell, ValueId from, ValueId to) const {
        return costs_.at(cell).at(from * domain(cell).size() + to);
    }
    const CostTable& costs() const noexcept { return costs_; }

    /// Distance d(v, v'): summed cost of cells whose value differs.
    Cost distance(const Valuation& from, const Valuation& to) const;

    /// M[v'\v].
    SystemModel with_valuation(Valuation valuation) const;
    SystemModel with_costs(CostTable costs) const;

    /// Identifier-for-identifier structural equality (including valuation and costs).
    friend bool operator==(const SystemModel& a, const SystemModel& b);

private:
    friend class ModelBuilder;
    SystemModel() = default;

    std::shared_ptr<const MetaModel> meta_;
    std::vector<Item> items_;
    std::array<std::vector<ItemId>, 4> by_kind_;
    std::map<std::string, ItemId, std::less<>> index_;
    std::vector<ItemId> source_;
    std::vector<ItemId> target_;
    std::vector<std::optional<ItemId>> parent_;
    std::vector<bool> closure_;
    std::vector<bool> holds_;
    std::vector<Cell> cells_;
    std::vector<std::int32_t> cell_index_;
    Valuation valuation_;
    CostTable costs_;
};

/// Pairs (b, x) of the transitive containment relation, ordered by (b, x).
std::vector<std::pair<ItemId, ItemId>> transitive_containment(const SystemModel& model);

/// Incremental construction of a validated SystemModel.
class ModelBuilder {
public:
    using Attributes = std::map<std::string, std::string>;

    explicit ModelBuilder(MetaModel meta);

    ModelBuilder& element(std::string id, std::string type, Attributes attrs = {});
    ModelBuilder& connector(std::string id, std::string type, std::string source, std::string target,
                            Attributes attrs = {});
    ModelBuilder& asset(std::string id, std::string type, std::vector<std::string> held_by,
                        Attributes attrs = {});
    ModelBuilder& boundary(std::string id, std::string type, std::vector<std::string> contains,
                           Attributes attrs = {});

    /// Validates every invariant and returns the model; throws SchemaError
    /// naming the offending identifier otherwise.
    SystemModel build() const;

private:
    struct Pending {
        std::string id;
        ItemKind kind;
        std::string type;
        Attributes attrs;
        std::vector<std::string> refs;  // endpoints / holders / children
    };

    std::shared_ptr<const MetaModel> meta_;
    std::vector<Pending> pending_;
};

/// Parses the JSON model document. Attributes that apply but are absent
/// default to "undefined" when that literal is in the domain, otherwise to the
/// domain's first value.
SystemModel parse_model(std::string_view json_text);
MetaModel parse_meta(std::string_view json_text);

/// Serializes to the same JSON schema parse_model reads.
std::string serialize_model(const SystemModel& model);

/// Overrides default costs (1 for every change, 0 for keeping) with rows of
/// a `item,attribute,from,to,cost` CSV. Item `*` applies to every item the
/// attribute applies to; item-specific rows win over wildcard rows.
SystemModel load_costs(const SystemModel& model, std::string_view csv_text);

/// Parses "20", "1.5" or "3/2" into an exact cost.
Cost parse_cost(std::string_view text);
std::string to_string(const Cost& cost);

}  // namespace threatfix
