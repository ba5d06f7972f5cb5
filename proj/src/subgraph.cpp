#include "kgqa/subgraph.hpp"

#include <algorithm>

#include "kgqa/errors.hpp"
#include "kgqa/text.hpp"

namespace kgqa {

namespace {

const std::vector<Triple>& empty_edges() {
    static const std::vector<Triple> empty;
    return empty;
}

}  // namespace

Subgraph::Subgraph(const KnowledgeGraph& parent, std::set<EntityId> seeds,
                   std::map<Triple, TripleProvenance> kept)
    : parent_(&parent), seeds_(std::move(seeds)), provenance_(std::move(kept)) {
    universe_ = seeds_;
    for (const auto& [t, prov] : provenance_) {
        triples_.push_back(t);
        universe_.insert(t.subject);
        universe_.insert(t.object);
        by_subject_[t.subject].push_back(t);
        by_object_[t.object].push_back(t);
        by_relation_[t.relation].push_back(t);
    }
    // provenance_ is ordered by triple, so triples_ arrives sorted.
}

std::optional<TripleProvenance> Subgraph::provenance(const Triple& t) const {
    auto it = provenance_.find(t);
    if (it == provenance_.end()) return std::nullopt;
    return it->second;
}

bool Subgraph::contains_entity(EntityId e) const {
    return universe_.count(e) > 0;
}

std::vector<EntityId> Subgraph::entities() const {
    return {universe_.begin(), universe_.end()};
}

std::span<const Triple> Subgraph::out_edges(EntityId e) const {
    auto it = by_subject_.find(e);
    return it == by_subject_.end() ? empty_edges() : it->second;
}

std::span<const Triple> Subgraph::in_edges(EntityId e) const {
    auto it = by_object_.find(e);
    return it == by_object_.end() ? empty_edges() : it->second;
}

std::span<const Triple> Subgraph::relation_edges(RelationId r) const {
    auto it = by_relation_.find(r);
    return it == by_relation_.end() ? empty_edges() : it->second;
}

double relevance_score(const KnowledgeGraph& kg, const Triple& triple,
                       const std::string& question, const QuerySchema& schema) {
    const std::string& relation_name = kg.name(triple.relation);
    for (const auto& step : schema.steps) {
        if (step.relation == relation_name) return 1.0;
    }
    std::set<std::string> triple_tokens = text::token_set(kg.name(triple.subject));
    for (auto& tok : text::token_set(relation_name)) triple_tokens.insert(tok);
    for (auto& tok : text::token_set(kg.name(triple.object))) {
        triple_tokens.insert(tok);
    }
    if (triple_tokens.empty()) return 0.0;
    auto question_tokens = text::token_set(question);
    std::size_t shared = 0;
    for (const auto& tok : triple_tokens) {
        if (question_tokens.count(tok)) ++shared;
    }
    return static_cast<double>(shared) / static_cast<double>(triple_tokens.size());
}

Subgraph generate_subgraph(const KnowledgeGraph& kg, const std::string& question,
                           const QuerySchema& schema,
                           std::optional<int> hop_budget, double threshold) {
    if (schema.anchors.empty()) {
        throw SubgraphError("schema has no anchored slot; nothing to expand from");
    }
    std::set<EntityId> seeds;
    for (const auto& [slot, surface] : schema.anchors) {
        if (auto id = kg.resolve_top(surface)) seeds.insert(*id);
    }
    if (seeds.empty()) {
        throw SubgraphError("no schema anchor resolves to an entity");
    }
    int budget = hop_budget.value_or(static_cast<int>(schema.steps.size()) + 1);
    if (budget < 1) {
        throw SubgraphError("hop budget must be positive");
    }

    std::map<Triple, TripleProvenance> kept;
    std::set<EntityId> visited = seeds;
    std::vector<EntityId> frontier(seeds.begin(), seeds.end());
    for (int hop = 1; hop <= budget && !frontier.empty(); ++hop) {
        std::set<EntityId> next;
        for (EntityId e : frontier) {
            for (const Triple& t : kg.neighbors(e, std::nullopt, Direction::Both)) {
                if (kept.count(t)) continue;
                double score = relevance_score(kg, t, question, schema);
                if (score < threshold) continue;
                kept.emplace(t, TripleProvenance{hop, score});
                EntityId other = t.subject == e ? t.object : t.subject;
                if (!visited.count(other)) next.insert(other);
            }
        }
        for (EntityId e : next) visited.insert(e);
        frontier.assign(next.begin(), next.end());
    }
    return Subgraph(kg, std::move(seeds), std::move(kept));
}

}  // namespace kgqa
