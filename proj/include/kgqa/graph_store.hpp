#pragma once
// Immutable in-memory triple store.
//
// - Entity and relation dictionaries: dense integer handles assigned in
//   first-appearance order over the source stream; name -> id is a bijection
//   per namespace (an entity and a relation may share a spelling).
// - Triple set is duplicate-free and kept sorted by (subject, relation,
//   object) ids; adjacency indexes by subject, relation and object are built
//   once at load time.
// - Aliases map surface strings to sets of entity ids; every canonical name
//   is automatically its own alias.
//
// The graph never mutates after load, so any number of readers may share it.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kgqa/errors.hpp"

namespace kgqa {

struct EntityId {
    std::uint32_t value = 0;
    auto operator<=>(const EntityId&) const = default;
};

struct RelationId {
    std::uint32_t value = 0;
    auto operator<=>(const RelationId&) const = default;
};

struct Triple {
    EntityId subject;
    RelationId relation;
    EntityId object;
    auto operator<=>(const Triple&) const = default;
};

enum class Direction { Outgoing, Incoming, Both };

class KnowledgeGraph;

// Read-only access surface shared by the full graph and extracted subgraphs.
// Query execution and stepwise reasoning run against this interface so they
// behave identically on either.
class GraphView {
public:
    virtual ~GraphView() = default;

    // The full graph that owns the id spaces (itself, for a KnowledgeGraph).
    virtual const KnowledgeGraph& base() const = 0;

    virtual bool contains_entity(EntityId e) const = 0;
    // Entity universe of this view, ascending by id.
    virtual std::vector<EntityId> entities() const = 0;
    // All triples in the view, sorted by (subject, relation, object).
    virtual const std::vector<Triple>& triples() const = 0;
    virtual std::span<const Triple> out_edges(EntityId e) const = 0;
    virtual std::span<const Triple> in_edges(EntityId e) const = 0;
    virtual std::span<const Triple> relation_edges(RelationId r) const = 0;

    bool has_triple(const Triple& t) const;
};

class KnowledgeGraph final : public GraphView {
public:
    KnowledgeGraph() = default;

    // Parse `subject\trelation\tobject` lines, then optional
    // `alias\tcanonical` lines. Throws IngestError with the 1-based line
    // number on malformed rows or aliases naming unknown canonicals.
    static KnowledgeGraph load(std::istream& triple_source,
                               std::istream* alias_source = nullptr);

    // Canonical serialization: triples ascending by id, then aliases other
    // than the automatic self-aliases, sorted.
    void save(std::ostream& triple_sink, std::ostream* alias_sink = nullptr) const;

    std::size_t entity_count() const { return entity_names_.size(); }
    std::size_t relation_count() const { return relation_names_.size(); }
    std::size_t triple_count() const { return triples_.size(); }

    const std::string& name(EntityId e) const;
    const std::string& name(RelationId r) const;
    std::optional<EntityId> find_entity(std::string_view canonical) const;
    std::optional<RelationId> find_relation(std::string_view relation) const;

    // Candidates for a surface string: exact alias matches first, then
    // case-insensitive alias matches, then entities whose aliases share word
    // tokens with the surface (overlap fraction descending); ties break by
    // ascending id. Empty when nothing shares a token.
    std::vector<EntityId> resolve(std::string_view surface) const;
    std::optional<EntityId> resolve_top(std::string_view surface) const;

    // Triples incident to `entity`, filtered by direction and optional
    // relation. Throws LookupError on ids outside this graph.
    std::vector<Triple> neighbors(EntityId entity,
                                  std::optional<RelationId> relation,
                                  Direction direction) const;

    const std::map<std::string, std::set<EntityId>>& aliases() const { return aliases_; }

    bool operator==(const KnowledgeGraph& other) const;

    // GraphView
    const KnowledgeGraph& base() const override { return *this; }
    bool contains_entity(EntityId e) const override { return e.value < entity_names_.size(); }
    std::vector<EntityId> entities() const override;
    const std::vector<Triple>& triples() const override { return triples_; }
    std::span<const Triple> out_edges(EntityId e) const override;
    std::span<const Triple> in_edges(EntityId e) const override;
    std::span<const Triple> relation_edges(RelationId r) const override;

private:
    EntityId intern_entity(const std::string& name);
    RelationId intern_relation(const std::string& name);
    void build_indexes();
    void check(EntityId e) const;
    void check(RelationId r) const;

    std::vector<std::string> entity_names_;
    std::vector<std::string> relation_names_;
    std::unordered_map<std::string, EntityId> entity_by_name_;
    std::unordered_map<std::string, RelationId> relation_by_name_;
    std::map<std::string, std::set<EntityId>> aliases_;
    std::vector<Triple> triples_;
    std::vector<std::vector<Triple>> by_subject_;
    std::vector<std::vector<Triple>> by_object_;
    std::vector<std::vector<Triple>> by_relation_;
};

}  // namespace kgqa
