#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "threatfix/formula.hpp"
#include "threatfix/model.hpp"

namespace threatfix {

/// Acyclic chain of one or more connectors.
struct Path {
    std::vector<ItemId> connectors;

    friend bool operator==(const Path&, const Path&) = default;
    friend auto operator<=>(const Path&, const Path&) = default;
};

/// Visited elements: source of the first connector, then every target.
std::vector<ItemId> path_elements(const SystemModel& model, const Path& path);

/// All acyclic paths, ordered lexicographically by connector sequence
/// (connectors compared in ItemId order).
std::vector<Path> enumerate_paths(const SystemModel& model);

/// Value bound to a variable: an item or a path.
using Value = std::variant<ItemId, Path>;

/// Variable bindings; later entries shadow earlier ones of the same name.
class Assignment {
public:
    void bind(const Var& var, Value value) { entries_.emplace_back(var, std::move(value)); }
    void unbind() { entries_.pop_back(); }
    const Value* lookup(const std::string& name) const;

    const std::vector<std::pair<Var, Value>>& entries() const noexcept { return entries_; }
    bool empty() const noexcept { return entries_.empty(); }

    friend bool operator==(const Assignment&, const Assignment&) = default;

private:
    std::vector<std::pair<Var, Value>> entries_;
};

/// Satisfying binding of a rule's leading existential variables.
struct Witness {
    std::string rule;
    Assignment bindings;

    friend bool operator==(const Witness&, const Witness&) = default;
};

/// Renders a bound value with model identifiers ("46", or "1,13" for a path).
std::string render_value(const SystemModel& model, const Value& value);

/// Truth of a single predicate under `env`, reading attributes from
/// `valuation`. val(.,.) on an inapplicable attribute is false.
bool eval_predicate(const SystemModel& model, const Predicate& p, const Assignment& env,
                    const Valuation& valuation);

/// Direct evaluator of the threat-logic semantics. Caches the path set, so
/// reuse one instance when evaluating many formulas over the same model.
class Evaluator {
public:
    explicit Evaluator(const SystemModel& model);

    const SystemModel& model() const noexcept { return *model_; }
    const std::vector<Path>& paths() const noexcept { return paths_; }

    /// Truth value under `env`, reading attributes from `valuation`
    /// (defaults to the model's own valuation).
    bool eval(const Formula& f, Assignment& env, const Valuation* valuation = nullptr) const;
    bool eval(const Formula& f, const Valuation* valuation = nullptr) const;

    /// Every binding of the leading existential prefix under which the rest
    /// of the formula holds, outermost variable major. Stops after `cap`.
    std::vector<Witness> witnesses(const std::string& rule, const Formula& f,
                                   std::size_t cap = static_cast<std::size_t>(-1),
                                   const Valuation* valuation = nullptr) const;

private:
    template <typename Fn>
    bool any_value(const Var& var, Assignment& env, Fn&& fn) const;

    const SystemModel* model_;
    std::vector<Path> paths_;
};

bool eval(const SystemModel& model, const Formula& f);

std::vector<Witness> witnesses(const SystemModel& model, const std::string& rule, const Formula& f);

struct BruteForceResult {
    bool repairable = false;
    Cost cost = 0;
    Valuation valuation;
};

/// Exhaustive minimum-cost repair over all total valuations. Ties go to the
/// lexicographically smallest valuation vector. Throws LimitError when the
/// valuation space exceeds `bound`.
BruteForceResult brute_force_min_repair(const SystemModel& model, const RuleSet& rules,
                                        std::uint64_t bound = 1'000'000);

}  // namespace threatfix
