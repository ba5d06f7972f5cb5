#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "kgqa/cypher.hpp"
#include "kgqa/errors.hpp"

namespace kgqa::cypher {

namespace {

// One entity variable of the constraint network. Named slots are shared
// across patterns; every anonymous node gets a private slot.
struct Slot {
    std::string name;                       // empty for anonymous
    std::optional<EntityId> pinned;         // from resolved anchors
    bool contradictory_anchors = false;     // two anchors resolved differently
    std::vector<std::string> name_filters;  // WHERE literals, byte-exact
};

struct EdgeConstraint {
    std::size_t subject;
    RelationId relation;
    std::size_t object;
};

class Matcher {
public:
    Matcher(const GraphView& view, const CypherQuery& query)
        : view_(view), base_(view.base()) {
        collect_slots(query);
        resolve_anchors();
        collect_filters(query);
        satisfiable_ = collect_edges(query) && build_domains();
    }

    BindingTable project(const std::vector<ReturnItem>& items,
                         std::optional<std::uint64_t> limit) {
        BindingTable table;
        std::vector<std::size_t> slots;
        for (const auto& item : items) {
            table.columns.push_back(item.variable);
            slots.push_back(slot_index_.at(item.variable));
        }
        fill(table, slots, limit);
        return table;
    }

    BindingTable project_all_named() {
        BindingTable table;
        std::vector<std::size_t> slots;
        for (std::size_t i = 0; i < slots_.size(); ++i) {
            if (slots_[i].name.empty()) continue;
            table.columns.push_back(slots_[i].name);
            slots.push_back(i);
        }
        fill(table, slots, std::nullopt);
        return table;
    }

private:
    void collect_slots(const CypherQuery& query) {
        for (const auto& path : query.patterns) {
            auto& row = path_slots_.emplace_back();
            for (const auto& node : path.nodes) {
                std::size_t idx;
                if (node.variable.empty()) {
                    idx = slots_.size();
                    slots_.push_back(Slot{});
                } else if (auto it = slot_index_.find(node.variable);
                           it != slot_index_.end()) {
                    idx = it->second;
                } else {
                    idx = slots_.size();
                    slots_.push_back(Slot{node.variable, {}, false, {}});
                    slot_index_.emplace(node.variable, idx);
                }
                row.push_back(idx);
                if (node.anchor) anchors_.emplace_back(idx, *node.anchor);
            }
        }
    }

    void resolve_anchors() {
        for (const auto& [idx, surface] : anchors_) {
            auto id = base_.resolve_top(surface);
            if (!id) {
                throw ExecError(surface, "anchor '" + surface +
                                             "' does not resolve to any entity");
            }
            Slot& slot = slots_[idx];
            if (slot.pinned && *slot.pinned != *id) {
                slot.contradictory_anchors = true;
            }
            slot.pinned = *id;
        }
    }

    void collect_filters(const CypherQuery& query) {
        for (const auto& cond : query.filters) {
            slots_[slot_index_.at(cond.variable)].name_filters.push_back(
                cond.value);
        }
    }

    // False when a relation name is absent from the graph vocabulary: the
    // query then matches nothing, by contract.
    bool collect_edges(const CypherQuery& query) {
        bool ok = true;
        for (std::size_t p = 0; p < query.patterns.size(); ++p) {
            const auto& path = query.patterns[p];
            const auto& row = path_slots_[p];
            for (std::size_t i = 0; i < path.edges.size(); ++i) {
                auto rel = base_.find_relation(path.edges[i].relation);
                if (!rel) {
                    ok = false;
                } else if (path.edges[i].reversed) {
                    edges_.push_back(EdgeConstraint{row[i + 1], *rel, row[i]});
                } else {
                    edges_.push_back(EdgeConstraint{row[i], *rel, row[i + 1]});
                }
            }
        }
        return ok;
    }

    bool build_domains() {
        auto universe = view_.entities();
        domains_.resize(slots_.size());
        for (std::size_t i = 0; i < slots_.size(); ++i) {
            const Slot& slot = slots_[i];
            if (slot.contradictory_anchors) return false;
            auto passes = [&](EntityId e) {
                for (const auto& want : slot.name_filters) {
                    if (base_.name(e) != want) return false;
                }
                return true;
            };
            if (slot.pinned) {
                if (view_.contains_entity(*slot.pinned) && passes(*slot.pinned)) {
                    domains_[i].push_back(*slot.pinned);
                }
            } else {
                for (EntityId e : universe) {
                    if (passes(e)) domains_[i].push_back(e);
                }
            }
            if (domains_[i].empty()) return false;
        }
        return true;
    }

    // Candidates for `slot` consistent with every already-assigned neighbor.
    std::vector<EntityId> candidates(std::size_t slot) const {
        std::vector<EntityId> out;
        for (EntityId e : domains_[slot]) {
            bool ok = true;
            for (const auto& edge : edges_) {
                if (edge.subject == slot && edge.object == slot) {
                    ok = view_.has_triple(Triple{e, edge.relation, e});
                } else if (edge.subject == slot && assigned_[edge.object]) {
                    ok = view_.has_triple(
                        Triple{e, edge.relation, *assigned_[edge.object]});
                } else if (edge.object == slot && assigned_[edge.subject]) {
                    ok = view_.has_triple(
                        Triple{*assigned_[edge.subject], edge.relation, e});
                }
                if (!ok) break;
            }
            if (ok) out.push_back(e);
        }
        return out;
    }

    void search(std::size_t remaining, const std::vector<std::size_t>& wanted,
                std::set<std::vector<EntityId>>& rows) {
        if (remaining == 0) {
            std::vector<EntityId> row;
            row.reserve(wanted.size());
            for (std::size_t s : wanted) row.push_back(*assigned_[s]);
            rows.insert(std::move(row));
            return;
        }
        // Most-constrained-first: expand the unassigned slot with the fewest
        // consistent candidates right now.
        std::size_t best = slots_.size();
        std::vector<EntityId> best_cands;
        for (std::size_t i = 0; i < slots_.size(); ++i) {
            if (assigned_[i]) continue;
            auto cands = candidates(i);
            if (best == slots_.size() || cands.size() < best_cands.size()) {
                best = i;
                best_cands = std::move(cands);
                if (best_cands.empty()) break;
            }
        }
        for (EntityId e : best_cands) {
            assigned_[best] = e;
            search(remaining - 1, wanted, rows);
            assigned_[best] = std::nullopt;
        }
    }

    void fill(BindingTable& table, const std::vector<std::size_t>& wanted,
              std::optional<std::uint64_t> limit) {
        if (satisfiable_) {
            std::set<std::vector<EntityId>> rows;
            assigned_.assign(slots_.size(), std::nullopt);
            search(slots_.size(), wanted, rows);
            table.rows.assign(rows.begin(), rows.end());
        }
        std::sort(table.rows.begin(), table.rows.end(),
                  [&](const std::vector<EntityId>& a,
                      const std::vector<EntityId>& b) {
                      for (std::size_t i = 0; i < a.size(); ++i) {
                          const std::string& an = base_.name(a[i]);
                          const std::string& bn = base_.name(b[i]);
                          if (an != bn) return an < bn;
                      }
                      return false;
                  });
        if (limit && table.rows.size() > *limit) {
            table.rows.resize(*limit);
        }
    }

    const GraphView& view_;
    const KnowledgeGraph& base_;
    std::vector<Slot> slots_;
    std::vector<std::vector<std::size_t>> path_slots_;  // per pattern
    std::map<std::string, std::size_t> slot_index_;
    std::vector<std::pair<std::size_t, std::string>> anchors_;
    std::vector<EdgeConstraint> edges_;
    std::vector<std::vector<EntityId>> domains_;
    std::vector<std::optional<EntityId>> assigned_;
    bool satisfiable_ = false;
};

}  // namespace

BindingTable execute(const GraphView& graph, const CypherQuery& query) {
    Matcher matcher(graph, query);
    return matcher.project(query.returns, query.limit);
}

BindingTable execute_full(const GraphView& graph, const CypherQuery& query) {
    Matcher matcher(graph, query);
    return matcher.project_all_named();
}

}  // namespace kgqa::cypher
