#include "threatfix/circuit.hpp"

#include <algorithm>

namespace threatfix {

Circuit::Circuit() {
    nodes_.push_back(Node{false, 0, {}});
    gate_lit_.push_back(0);
}

Circuit::Ref Circuit::input(Lit lit) {
    if (lit < 0) return negate(input(-lit));
    if (auto it = inputs_.find(lit); it != inputs_.end()) return it->second;
    const Ref r = static_cast<Ref>(nodes_.size()) << 1;
    nodes_.push_back(Node{true, lit, {}});
    gate_lit_.push_back(lit);
    inputs_.emplace(lit, r);
    return r;
}

Circuit::Ref Circuit::mk_and(std::vector<Ref> kids) {
    std::sort(kids.begin(), kids.end());
    kids.erase(std::unique(kids.begin(), kids.end()), kids.end());
    std::vector<Ref> keep;
    keep.reserve(kids.size());
    for (Ref k : kids) {
        if (k == kFalse) return kFalse;
        if (k == kTrue) continue;
        // kids are sorted, so x and not-x are adjacent
        if (!keep.empty() && keep.back() == negate(k)) return kFalse;
        keep.push_back(k);
    }
    if (keep.empty()) return kTrue;
    if (keep.size() == 1) return keep.front();
    if (auto it = ands_.find(keep); it != ands_.end()) return it->second;
    const Ref r = static_cast<Ref>(nodes_.size()) << 1;
    nodes_.push_back(Node{false, 0, keep});
    gate_lit_.push_back(0);
    ands_.emplace(std::move(keep), r);
    return r;
}

Circuit::Ref Circuit::mk_or(std::vector<Ref> kids) {
    for (Ref& k : kids) k = negate(k);
    return negate(mk_and(std::move(kids)));
}

Lit Circuit::literal(Ref r, ClauseSink& sink) {
    if (is_const(r)) {
        if (true_lit_ == 0) {
            true_lit_ = sink.new_var();
            sink.add_clause({true_lit_});
        }
        return r == kTrue ? true_lit_ : -true_lit_;
    }
    const std::size_t root = r >> 1;
    if (gate_lit_[root] == 0) {
        // Iterative post-order so deep circuits do not exhaust the stack.
        std::vector<std::pair<std::size_t, bool>> stack{{root, false}};
        while (!stack.empty()) {
            auto [n, expanded] = stack.back();
            stack.pop_back();
            if (gate_lit_[n] != 0) continue;
            if (!expanded) {
                stack.emplace_back(n, true);
                for (Ref k : nodes_[n].kids) {
                    if (gate_lit_[k >> 1] == 0) stack.emplace_back(k >> 1, false);
                }
                continue;
            }
            const Lit g = sink.new_var();
            std::vector<Lit> big{g};
            for (Ref k : nodes_[n].kids) {
                const Lit kl = (k & 1U) ? -gate_lit_[k >> 1] : gate_lit_[k >> 1];
                sink.add_clause({-g, kl});
                big.push_back(-kl);
            }
            sink.add_clause(big);
            gate_lit_[n] = g;
        }
    }
    return (r & 1U) ? -gate_lit_[root] : gate_lit_[root];
}

void Circuit::assert_true(Ref r, ClauseSink& sink) {
    if (r == kTrue) return;
    if (r == kFalse) {
        sink.add_clause(std::span<const Lit>{});
        return;
    }
    const Node& n = nodes_[r >> 1];
    if (n.is_input) {
        sink.add_clause({(r & 1U) ? -n.lit : n.lit});
        return;
    }
    if ((r & 1U) == 0) {
        for (Ref k : n.kids) assert_true(k, sink);
        return;
    }
    // Negated and-gate: at least one kid is false.
    std::vector<Lit> clause;
    clause.reserve(n.kids.size());
    for (Ref k : n.kids) clause.push_back(-literal(k, sink));
    sink.add_clause(clause);
}

}  // namespace threatfix
