#pragma once
// Question-relevant slices of a KnowledgeGraph: breadth-first expansion from
// the schema's anchored entities, keeping only triples whose relevance score
// clears the threshold. A Subgraph implements GraphView, so queries and
// stepwise reasoning run on it unchanged.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kgqa/graph_store.hpp"
#include "kgqa/schema.hpp"

namespace kgqa {

struct TripleProvenance {
    int hop = 0;        // BFS layer the triple was admitted at (>= 1)
    double score = 0;   // relevance at admission time, in [0, 1]
    bool operator==(const TripleProvenance&) const = default;
};

class Subgraph final : public GraphView {
public:
    Subgraph(const KnowledgeGraph& parent, std::set<EntityId> seeds,
             std::map<Triple, TripleProvenance> kept);

    const std::set<EntityId>& seeds() const { return seeds_; }
    std::optional<TripleProvenance> provenance(const Triple& t) const;
    std::size_t triple_count() const { return triples_.size(); }

    // GraphView. The entity universe is every triple endpoint plus the
    // seeds themselves (a seed with no surviving edges still exists).
    const KnowledgeGraph& base() const override { return *parent_; }
    bool contains_entity(EntityId e) const override;
    std::vector<EntityId> entities() const override;
    const std::vector<Triple>& triples() const override { return triples_; }
    std::span<const Triple> out_edges(EntityId e) const override;
    std::span<const Triple> in_edges(EntityId e) const override;
    std::span<const Triple> relation_edges(RelationId r) const override;

private:
    const KnowledgeGraph* parent_;
    std::set<EntityId> seeds_;
    std::map<Triple, TripleProvenance> provenance_;
    std::vector<Triple> triples_;  // sorted
    std::set<EntityId> universe_;
    std::map<EntityId, std::vector<Triple>> by_subject_;
    std::map<EntityId, std::vector<Triple>> by_object_;
    std::map<RelationId, std::vector<Triple>> by_relation_;
};

// max(relation-in-schema, question-token overlap): 1.0 when the triple's
// relation appears in a schema step; otherwise the fraction of the triple's
// name tokens (subject + relation + object, deduplicated) found in the
// question.
double relevance_score(const KnowledgeGraph& kg, const Triple& triple,
                       const std::string& question, const QuerySchema& schema);

// BFS from resolved anchors, up to hop_budget layers (default: schema steps
// + 1), admitting triples scoring >= threshold; expansion only continues
// through admitted triples. Throws SubgraphError when the schema has no
// anchored slot or no anchor resolves.
Subgraph generate_subgraph(const KnowledgeGraph& kg, const std::string& question,
                           const QuerySchema& schema,
                           std::optional<int> hop_budget = std::nullopt,
                           double threshold = 0.0);

}  // namespace kgqa
