#include "kgqa/graph_store.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "kgqa/text.hpp"

namespace kgqa {

namespace {

// Split a line on hard tabs. Carriage returns from CRLF sources are stripped
// by the caller before we get here.
std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    return fields;
}

}  // namespace

bool GraphView::has_triple(const Triple& t) const {
    const auto& all = triples();
    return std::binary_search(all.begin(), all.end(), t);
}

EntityId KnowledgeGraph::intern_entity(const std::string& name) {
    if (auto it = entity_by_name_.find(name); it != entity_by_name_.end()) {
        return it->second;
    }
    EntityId id{static_cast<std::uint32_t>(entity_names_.size())};
    entity_names_.push_back(name);
    entity_by_name_.emplace(name, id);
    aliases_[name].insert(id);
    return id;
}

RelationId KnowledgeGraph::intern_relation(const std::string& name) {
    if (auto it = relation_by_name_.find(name); it != relation_by_name_.end()) {
        return it->second;
    }
    RelationId id{static_cast<std::uint32_t>(relation_names_.size())};
    relation_names_.push_back(name);
    relation_by_name_.emplace(name, id);
    return id;
}

KnowledgeGraph KnowledgeGraph::load(std::istream& triple_source,
                                    std::istream* alias_source) {
    KnowledgeGraph kg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(triple_source, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_tabs(line);
        if (fields.size() != 3 || fields[0].empty() || fields[1].empty() ||
            fields[2].empty()) {
            throw IngestError(line_no, "expected 3 tab-separated fields");
        }
        EntityId s = kg.intern_entity(fields[0]);
        RelationId r = kg.intern_relation(fields[1]);
        EntityId o = kg.intern_entity(fields[2]);
        kg.triples_.push_back(Triple{s, r, o});
    }

    if (alias_source != nullptr) {
        line_no = 0;
        while (std::getline(*alias_source, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            auto fields = split_tabs(line);
            if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
                throw IngestError(line_no, "expected 2 tab-separated fields");
            }
            auto canonical = kg.entity_by_name_.find(fields[1]);
            if (canonical == kg.entity_by_name_.end()) {
                throw IngestError(line_no, "alias target '" + fields[1] +
                                               "' is not a known entity");
            }
            kg.aliases_[fields[0]].insert(canonical->second);
        }
    }

    std::sort(kg.triples_.begin(), kg.triples_.end());
    kg.triples_.erase(std::unique(kg.triples_.begin(), kg.triples_.end()),
                      kg.triples_.end());
    kg.build_indexes();
    return kg;
}

void KnowledgeGraph::save(std::ostream& triple_sink,
                          std::ostream* alias_sink) const {
    for (const Triple& t : triples_) {
        triple_sink << entity_names_[t.subject.value] << '\t'
                    << relation_names_[t.relation.value] << '\t'
                    << entity_names_[t.object.value] << '\n';
    }
    if (alias_sink == nullptr) return;
    for (const auto& [surface, ids] : aliases_) {
        for (EntityId id : ids) {
            if (surface == entity_names_[id.value]) continue;  // self-alias
            *alias_sink << surface << '\t' << entity_names_[id.value] << '\n';
        }
    }
}

void KnowledgeGraph::build_indexes() {
    by_subject_.assign(entity_names_.size(), {});
    by_object_.assign(entity_names_.size(), {});
    by_relation_.assign(relation_names_.size(), {});
    for (const Triple& t : triples_) {
        by_subject_[t.subject.value].push_back(t);
        by_object_[t.object.value].push_back(t);
        by_relation_[t.relation.value].push_back(t);
    }
}

void KnowledgeGraph::check(EntityId e) const {
    if (e.value >= entity_names_.size()) {
        throw LookupError("entity id " + std::to_string(e.value) +
                          " out of range");
    }
}

void KnowledgeGraph::check(RelationId r) const {
    if (r.value >= relation_names_.size()) {
        throw LookupError("relation id " + std::to_string(r.value) +
                          " out of range");
    }
}

const std::string& KnowledgeGraph::name(EntityId e) const {
    check(e);
    return entity_names_[e.value];
}

const std::string& KnowledgeGraph::name(RelationId r) const {
    check(r);
    return relation_names_[r.value];
}

std::optional<EntityId> KnowledgeGraph::find_entity(
    std::string_view canonical) const {
    auto it = entity_by_name_.find(std::string(canonical));
    if (it == entity_by_name_.end()) return std::nullopt;
    return it->second;
}

std::optional<RelationId> KnowledgeGraph::find_relation(
    std::string_view relation) const {
    auto it = relation_by_name_.find(std::string(relation));
    if (it == relation_by_name_.end()) return std::nullopt;
    return it->second;
}

std::vector<EntityId> KnowledgeGraph::resolve(std::string_view surface) const {
    std::string key(surface);

    // Tier 1: byte-exact alias match.
    std::set<EntityId> seen;
    std::vector<EntityId> out;
    if (auto it = aliases_.find(key); it != aliases_.end()) {
        for (EntityId id : it->second) {
            out.push_back(id);
            seen.insert(id);
        }
    }

    // Tier 2: case-insensitive alias match.
    std::string lowered = text::to_lower(key);
    std::set<EntityId> tier2;
    for (const auto& [alias, ids] : aliases_) {
        if (text::to_lower(alias) != lowered) continue;
        for (EntityId id : ids) {
            if (!seen.count(id)) tier2.insert(id);
        }
    }
    for (EntityId id : tier2) {
        out.push_back(id);
        seen.insert(id);
    }

    // Tier 3: word-token overlap against every alias; an entity scores the
    // best overlap any of its aliases achieves. Score = |shared| / |surface
    // tokens|, descending, ties by ascending id.
    auto surface_tokens = text::token_set(surface);
    if (!surface_tokens.empty()) {
        std::map<EntityId, double> score;
        for (const auto& [alias, ids] : aliases_) {
            auto alias_tokens = text::token_set(alias);
            std::size_t shared = 0;
            for (const auto& tok : surface_tokens) {
                if (alias_tokens.count(tok)) ++shared;
            }
            if (shared == 0) continue;
            double s = static_cast<double>(shared) /
                       static_cast<double>(surface_tokens.size());
            for (EntityId id : ids) {
                auto [it, inserted] = score.emplace(id, s);
                if (!inserted && s > it->second) it->second = s;
            }
        }
        std::vector<std::pair<EntityId, double>> ranked;
        for (const auto& [id, s] : score) {
            if (!seen.count(id)) ranked.emplace_back(id, s);
        }
        std::stable_sort(ranked.begin(), ranked.end(),
                         [](const auto& a, const auto& b) {
                             if (a.second != b.second) return a.second > b.second;
                             return a.first < b.first;
                         });
        for (const auto& [id, s] : ranked) out.push_back(id);
    }
    return out;
}

std::optional<EntityId> KnowledgeGraph::resolve_top(
    std::string_view surface) const {
    auto all = resolve(surface);
    if (all.empty()) return std::nullopt;
    return all.front();
}

std::vector<Triple> KnowledgeGraph::neighbors(EntityId entity,
                                              std::optional<RelationId> relation,
                                              Direction direction) const {
    check(entity);
    if (relation) check(*relation);
    std::vector<Triple> out;
    auto take = [&](const std::vector<Triple>& edges) {
        for (const Triple& t : edges) {
            if (relation && t.relation != *relation) continue;
            out.push_back(t);
        }
    };
    if (direction == Direction::Outgoing || direction == Direction::Both) {
        take(by_subject_[entity.value]);
    }
    if (direction == Direction::Incoming || direction == Direction::Both) {
        take(by_object_[entity.value]);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool KnowledgeGraph::operator==(const KnowledgeGraph& other) const {
    return entity_names_ == other.entity_names_ &&
           relation_names_ == other.relation_names_ &&
           triples_ == other.triples_ && aliases_ == other.aliases_;
}

std::vector<EntityId> KnowledgeGraph::entities() const {
    std::vector<EntityId> out;
    out.reserve(entity_names_.size());
    for (std::uint32_t i = 0; i < entity_names_.size(); ++i) {
        out.push_back(EntityId{i});
    }
    return out;
}

std::span<const Triple> KnowledgeGraph::out_edges(EntityId e) const {
    check(e);
    return by_subject_[e.value];
}

std::span<const Triple> KnowledgeGraph::in_edges(EntityId e) const {
    check(e);
    return by_object_[e.value];
}

std::span<const Triple> KnowledgeGraph::relation_edges(RelationId r) const {
    check(r);
    return by_relation_[r.value];
}

}  // namespace kgqa
