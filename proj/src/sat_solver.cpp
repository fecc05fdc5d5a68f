#include "threatfix/sat_solver.hpp"

#include <algorithm>
#include <cmath>

namespace threatfix {

namespace {

// Luby sequence scaled by y: 1 1 2 1 1 2 4 ...
double luby(double y, std::int64_t x) {
    std::int64_t size = 1;
    std::int64_t seq = 0;
    while (size < x + 1) {
        ++seq;
        size = 2 * size + 1;
    }
    while (size - 1 != x) {
        size = (size - 1) >> 1;
        --seq;
        x = x % size;
    }
    return std::pow(y, static_cast<double>(seq));
}

constexpr double kVarDecay = 0.95;
constexpr double kClauseDecay = 0.999;
constexpr std::int64_t kRestartBase = 100;

}  // namespace

SatSolver::SatSolver(std::uint64_t seed) : rng_(seed) {}

int SatSolver::new_var() {
    const auto v = static_cast<std::uint32_t>(assigns_.size());
    assigns_.push_back(kUndef);
    phase_.push_back(true);  // saved phase "negative": first decision sets the var false
    level_.push_back(0);
    reason_.push_back(kNoReason);
    // A tiny seeded jitter breaks activity ties reproducibly.
    activity_.push_back(static_cast<double>(rng_() % 1024) * 1e-9);
    seen_.push_back(0);
    watches_.emplace_back();
    watches_.emplace_back();
    heap_pos_.push_back(-1);
    heap_insert(v);
    return static_cast<int>(v) + 1;
}

void SatSolver::add_clause(std::span<const Lit> clause) {
    if (!ok_) return;
    std::vector<ILit> lits;
    lits.reserve(clause.size());
    for (Lit l : clause) {
        while (var_of(l) > num_vars()) new_var();
        lits.push_back(to_ilit(l));
    }
    std::sort(lits.begin(), lits.end());
    std::vector<ILit> kept;
    ILit prev = kUndefLit;
    for (ILit l : lits) {
        if (value(l) == kTrue && level_[var(l)] == 0) return;
        if (prev != kUndefLit && l == neg(prev)) return;  // tautology
        if (l == prev || (value(l) == kFalse && level_[var(l)] == 0)) continue;
        kept.push_back(l);
        prev = l;
    }
    if (kept.empty()) {
        ok_ = false;
        return;
    }
    if (kept.size() == 1) {
        enqueue(kept[0], kNoReason);
        if (propagate() != kNoReason) ok_ = false;
        return;
    }
    clauses_.push_back(Clause{std::move(kept), false, false, 0});
    attach(static_cast<int>(clauses_.size()) - 1);
}

void SatSolver::attach(int cref) {
    const Clause& c = clauses_[cref];
    watches_[neg(c.lits[0])].push_back({cref, c.lits[1]});
    watches_[neg(c.lits[1])].push_back({cref, c.lits[0]});
}

void SatSolver::enqueue(ILit l, int reason) {
    const std::uint32_t v = var(l);
    assigns_[v] = static_cast<std::int8_t>(sign(l) ? kFalse : kTrue);
    level_[v] = decision_level();
    reason_[v] = reason;
    trail_.push_back(l);
}

int SatSolver::propagate() {
    int confl = kNoReason;
    while (qhead_ < trail_.size()) {
        const ILit p = trail_[qhead_++];
        const ILit false_lit = neg(p);
        std::vector<Watcher>& ws = watches_[p];
        std::size_t i = 0;
        std::size_t j = 0;
        while (i < ws.size()) {
            const Watcher w = ws[i];
            if (clauses_[w.cref].deleted) {
                ++i;
                continue;
            }
            if (value(w.blocker) == kTrue) {
                ws[j++] = ws[i++];
                continue;
            }
            Clause& c = clauses_[w.cref];
            if (c.lits[0] == false_lit) std::swap(c.lits[0], c.lits[1]);
            ++i;
            const ILit first = c.lits[0];
            if (first != w.blocker && value(first) == kTrue) {
                ws[j++] = {w.cref, first};
                continue;
            }
            bool moved = false;
            for (std::size_t k = 2; k < c.lits.size(); ++k) {
                if (value(c.lits[k]) != kFalse) {
                    std::swap(c.lits[1], c.lits[k]);
                    watches_[neg(c.lits[1])].push_back({w.cref, first});
                    moved = true;
                    break;
                }
            }
            if (moved) continue;
            ws[j++] = {w.cref, first};
            if (value(first) == kFalse) {
                confl = w.cref;
                qhead_ = trail_.size();
                while (i < ws.size()) ws[j++] = ws[i++];
            } else {
                enqueue(first, w.cref);
            }
        }
        ws.resize(j);
        if (confl != kNoReason) break;
    }
    return confl;
}

void SatSolver::var_bump(std::uint32_t v) {
    activity_[v] += var_inc_;
    if (activity_[v] > 1e100) {
        for (double& a : activity_) a *= 1e-100;
        var_inc_ *= 1e-100;
    }
    if (heap_pos_[v] >= 0) heap_up(static_cast<std::size_t>(heap_pos_[v]));
}

void SatSolver::clause_bump(Clause& c) {
    c.activity += cla_inc_;
    if (c.activity > 1e20) {
        for (int cr : learnts_) clauses_[cr].activity *= 1e-20;
        cla_inc_ *= 1e-20;
    }
}

void SatSolver::analyze(int confl, std::vector<ILit>& out, int& bt_level) {
    out.clear();
    out.push_back(kUndefLit);
    int path_count = 0;
    ILit p = kUndefLit;
    std::size_t index = trail_.size();
    std::vector<std::uint32_t> to_clear;

    do {
        Clause& c = clauses_[confl];
        if (c.learnt) clause_bump(c);
        for (std::size_t j = (p == kUndefLit) ? 0 : 1; j < c.lits.size(); ++j) {
            const ILit q = c.lits[j];
            const std::uint32_t v = var(q);
            if (!seen_[v] && level_[v] > 0) {
                var_bump(v);
                seen_[v] = 1;
                to_clear.push_back(v);
                if (level_[v] >= decision_level()) {
                    ++path_count;
                } else {
                    out.push_back(q);
                }
            }
        }
        do {
            --index;
        } while (!seen_[var(trail_[index])]);
        p = trail_[index];
        confl = reason_[var(p)];
        seen_[var(p)] = 0;
        --path_count;
    } while (path_count > 0);
    out[0] = neg(p);

    // Drop literals implied by other literals of the clause.
    std::size_t keep = 1;
    for (std::size_t i = 1; i < out.size(); ++i) {
        const int r = reason_[var(out[i])];
        bool redundant = r != kNoReason;
        if (redundant) {
            const Clause& rc = clauses_[r];
            for (std::size_t k = 1; k < rc.lits.size(); ++k) {
                const std::uint32_t v = var(rc.lits[k]);
                if (!seen_[v] && level_[v] > 0) {
                    redundant = false;
                    break;
                }
            }
        }
        if (!redundant) out[keep++] = out[i];
    }
    out.resize(keep);

    bt_level = 0;
    if (out.size() > 1) {
        std::size_t max_i = 1;
        for (std::size_t i = 2; i < out.size(); ++i) {
            if (level_[var(out[i])] > level_[var(out[max_i])]) max_i = i;
        }
        std::swap(out[1], out[max_i]);
        bt_level = level_[var(out[1])];
    }
    for (std::uint32_t v : to_clear) seen_[v] = 0;
}

void SatSolver::cancel_until(int level) {
    if (decision_level() <= level) return;
    for (std::size_t c = trail_.size(); c-- > static_cast<std::size_t>(trail_lim_[level]);) {
        const std::uint32_t v = var(trail_[c]);
        assigns_[v] = kUndef;
        phase_[v] = sign(trail_[c]);
        reason_[v] = kNoReason;
        if (heap_pos_[v] < 0) heap_insert(v);
    }
    trail_.resize(static_cast<std::size_t>(trail_lim_[level]));
    trail_lim_.resize(static_cast<std::size_t>(level));
    qhead_ = trail_.size();
}

SatSolver::ILit SatSolver::pick_branch() {
    while (!heap_.empty()) {
        const std::uint32_t v = heap_pop();
        if (assigns_[v] == kUndef) return v * 2 + (phase_[v] ? 1U : 0U);
    }
    return kUndefLit;
}

bool SatSolver::locked(int cref) const {
    const Clause& c = clauses_[cref];
    const std::uint32_t v = var(c.lits[0]);
    return reason_[v] == cref && value(c.lits[0]) == kTrue;
}

void SatSolver::rebuild_watches() {
    for (auto& ws : watches_) ws.clear();
    for (std::size_t cr = 0; cr < clauses_.size(); ++cr) {
        if (!clauses_[cr].deleted) attach(static_cast<int>(cr));
    }
}

void SatSolver::reduce_db() {
    std::vector<int> order = learnts_;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const bool ba = clauses_[a].lits.size() == 2;
        const bool bb = clauses_[b].lits.size() == 2;
        if (ba != bb) return bb;  // binary clauses last, i.e. kept
        return clauses_[a].activity < clauses_[b].activity;
    });
    const double extra = cla_inc_ / static_cast<double>(std::max<std::size_t>(order.size(), 1));
    std::vector<int> kept;
    for (std::size_t i = 0; i < order.size(); ++i) {
        Clause& c = clauses_[order[i]];
        const bool removable = c.lits.size() > 2 && !locked(order[i]) &&
                               (i < order.size() / 2 || c.activity < extra);
        if (removable) {
            c.deleted = true;
            c.lits.clear();
            c.lits.shrink_to_fit();
        } else {
            kept.push_back(order[i]);
        }
    }
    std::sort(kept.begin(), kept.end());
    learnts_ = std::move(kept);
    rebuild_watches();
}

void SatSolver::remove_satisfied() {
    if (!ok_) return;
    cancel_until(0);
    if (propagate() != kNoReason) {
        ok_ = false;
        return;
    }
    for (auto& c : clauses_) {
        if (c.deleted) continue;
        const bool sat = std::any_of(c.lits.begin(), c.lits.end(),
                                     [&](ILit l) { return value(l) == kTrue && level_[var(l)] == 0; });
        if (sat) {
            c.deleted = true;
            c.lits.clear();
            c.lits.shrink_to_fit();
        }
    }
    std::erase_if(learnts_, [&](int cr) { return clauses_[cr].deleted; });
    rebuild_watches();
}

SatResult SatSolver::search(std::int64_t nof_conflicts, std::int64_t budget_end, std::span<const ILit> assumptions) {
    std::int64_t conflict_count = 0;
    std::vector<ILit> learnt;
    for (;;) {
        const int confl = propagate();
        if (confl != kNoReason) {
            ++conflicts_;
            ++conflict_count;
            if (decision_level() == 0) {
                ok_ = false;
                return SatResult::Unsat;
            }
            int bt = 0;
            analyze(confl, learnt, bt);
            cancel_until(bt);
            if (learnt.size() == 1) {
                enqueue(learnt[0], kNoReason);
            } else {
                clauses_.push_back(Clause{learnt, true, false, 0});
                const int cr = static_cast<int>(clauses_.size()) - 1;
                learnts_.push_back(cr);
                attach(cr);
                clause_bump(clauses_[cr]);
                enqueue(learnt[0], cr);
            }
            var_inc_ /= kVarDecay;
            cla_inc_ /= kClauseDecay;
            continue;
        }

        if (budget_end >= 0 && static_cast<std::int64_t>(conflicts_) >= budget_end) {
            cancel_until(0);
            return SatResult::Unknown;
        }
        if (nof_conflicts >= 0 && conflict_count >= nof_conflicts) {
            cancel_until(0);
            return SatResult::Unknown;  // restart
        }
        if (static_cast<double>(learnts_.size()) - static_cast<double>(trail_.size()) >= max_learnts_) {
            reduce_db();
        }

        ILit next = kUndefLit;
        while (static_cast<std::size_t>(decision_level()) < assumptions.size()) {
            const ILit a = assumptions[static_cast<std::size_t>(decision_level())];
            if (value(a) == kTrue) {
                trail_lim_.push_back(static_cast<int>(trail_.size()));
            } else if (value(a) == kFalse) {
                return SatResult::Unsat;
            } else {
                next = a;
                break;
            }
        }
        if (next == kUndefLit) {
            ++decisions_;
            next = pick_branch();
            if (next == kUndefLit) return SatResult::Sat;
        }
        trail_lim_.push_back(static_cast<int>(trail_.size()));
        enqueue(next, kNoReason);
    }
}

SatResult SatSolver::solve(std::span<const Lit> assumptions, std::int64_t conflict_budget) {
    model_.clear();
    if (!ok_) return SatResult::Unsat;
    std::vector<ILit> assume;
    for (Lit l : assumptions) {
        while (var_of(l) > num_vars()) new_var();
        assume.push_back(to_ilit(l));
    }
    max_learnts_ = std::max(static_cast<double>(clauses_.size()) / 3.0, 100.0);
    const std::int64_t budget_end =
        conflict_budget < 0 ? -1 : static_cast<std::int64_t>(conflicts_) + conflict_budget;

    SatResult status = SatResult::Unknown;
    for (std::int64_t restarts = 0; status == SatResult::Unknown; ++restarts) {
        const auto limit = static_cast<std::int64_t>(luby(2.0, restarts) * kRestartBase);
        status = search(limit, budget_end, assume);
        if (status == SatResult::Unknown && budget_end >= 0 && static_cast<std::int64_t>(conflicts_) >= budget_end) {
            break;
        }
        max_learnts_ *= 1.05;
    }

    if (status == SatResult::Sat) {
        model_.assign(assigns_.size() + 1, false);
        for (std::size_t v = 0; v < assigns_.size(); ++v) model_[v + 1] = assigns_[v] == kTrue;
    }
    cancel_until(0);
    return status;
}

void SatSolver::heap_insert(std::uint32_t v) {
    heap_pos_[v] = static_cast<int>(heap_.size());
    heap_.push_back(v);
    heap_up(heap_.size() - 1);
}

void SatSolver::heap_up(std::size_t i) {
    const std::uint32_t v = heap_[i];
    while (i > 0) {
        const std::size_t parent = (i - 1) / 2;
        if (!heap_less(v, heap_[parent])) break;
        heap_[i] = heap_[parent];
        heap_pos_[heap_[i]] = static_cast<int>(i);
        i = parent;
    }
    heap_[i] = v;
    heap_pos_[v] = static_cast<int>(i);
}

void SatSolver::heap_down(std::size_t i) {
    const std::uint32_t v = heap_[i];
    for (;;) {
        const std::size_t l = 2 * i + 1;
        if (l >= heap_.size()) break;
        const std::size_t r = l + 1;
        const std::size_t child = (r < heap_.size() && heap_less(heap_[r], heap_[l])) ? r : l;
        if (!heap_less(heap_[child], v)) break;
        heap_[i] = heap_[child];
        heap_pos_[heap_[i]] = static_cast<int>(i);
        i = child;
    }
    heap_[i] = v;
    heap_pos_[v] = static_cast<int>(i);
}

std::uint32_t SatSolver::heap_pop() {
    const std::uint32_t top = heap_.front();
    heap_pos_[top] = -1;
    const std::uint32_t last = heap_.back();
    heap_.pop_back();
    if (!heap_.empty()) {
        heap_[0] = last;
        heap_pos_[last] = 0;
        heap_down(0);
    }
    return top;
}

}  // namespace threatfix
