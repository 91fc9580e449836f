#include "kg/graph.hpp"

#include <algorithm>
#include <cctype>
#include <queue>

namespace kg {

std::string normalize_label(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool in_space = true; // leading whitespace is dropped
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            in_space = true;
            continue;
        }
        if (in_space && !out.empty()) out.push_back(' ');
        in_space = false;
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

NodeId KnowledgeGraph::add_node(std::string_view label) {
    std::string norm = normalize_label(label);
    if (norm.empty()) throw Error("add_node: empty label after normalization");
    auto it = label_to_id_.find(norm);
    if (it != label_to_id_.end()) return it->second;
    NodeId id = next_id_++;
    nodes_.emplace(id, NodeRecord{id, norm, {}});
    label_to_id_.emplace(std::move(norm), id);
    adj_.emplace(id, std::set<NodeId>{});
    return id;
}

namespace {

void append_relation(std::string& joined, std::string_view relation) {
    if (relation.empty()) return;
    // keep distinct relation texts only, joined by "; "
    std::string_view rest = joined;
    while (!rest.empty()) {
        auto pos = rest.find("; ");
        std::string_view head = rest.substr(0, pos);
        if (head == relation) return;
        if (pos == std::string_view::npos) break;
        rest.remove_prefix(pos + 2);
    }
    if (!joined.empty()) joined += "; ";
    joined += relation;
}

} // namespace

void KnowledgeGraph::add_edge(NodeId u, NodeId v, std::string_view relation, std::int64_t multiplicity,
                              const std::set<std::string>& sources) {
    if (!has_node(u) || !has_node(v)) throw Error("add_edge: unknown endpoint");
    if (u == v) throw Error("add_edge: self-loop rejected");
    if (multiplicity < 1) throw Error("add_edge: multiplicity must be positive");
    EdgeKey key = make_edge_key(u, v);
    auto it = edges_.find(key);
    if (it == edges_.end()) {
        edges_.emplace(key, EdgeRecord{key.first, key.second, std::string(relation), multiplicity, sources});
    } else {
        it->second.multiplicity += multiplicity;
        append_relation(it->second.relation, relation);
        it->second.sources.insert(sources.begin(), sources.end());
    }
    adj_[key.first].insert(key.second);
    adj_[key.second].insert(key.first);
}

std::optional<NodeId> KnowledgeGraph::find_label(std::string_view label) const {
    auto it = label_to_id_.find(normalize_label(label));
    if (it == label_to_id_.end()) return std::nullopt;
    return it->second;
}

const NodeRecord& KnowledgeGraph::node(NodeId id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw Error("node: unknown id " + std::to_string(id));
    return it->second;
}

NodeRecord& KnowledgeGraph::node_mutable(NodeId id) {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw Error("node: unknown id " + std::to_string(id));
    return it->second;
}

const EdgeRecord* KnowledgeGraph::find_edge(NodeId u, NodeId v) const {
    auto it = edges_.find(make_edge_key(u, v));
    return it == edges_.end() ? nullptr : &it->second;
}

const std::set<NodeId>& KnowledgeGraph::neighbors(NodeId id) const {
    auto it = adj_.find(id);
    if (it == adj_.end()) throw Error("neighbors: unknown id " + std::to_string(id));
    return it->second;
}

std::int64_t KnowledgeGraph::degree(NodeId id) const {
    return static_cast<std::int64_t>(neighbors(id).size());
}

bool KnowledgeGraph::structurally_equal(const KnowledgeGraph& other) const {
    if (node_count() != other.node_count() || edge_count() != other.edge_count()) return false;
    for (const auto& [id, rec] : nodes_) {
        if (!other.find_label(rec.label)) return false;
    }
    for (const auto& [key, edge] : edges_) {
        auto a = other.find_label(node(edge.a).label);
        auto b = other.find_label(node(edge.b).label);
        if (!a || !b) return false;
        const EdgeRecord* e = other.find_edge(*a, *b);
        if (!e || e->multiplicity != edge.multiplicity || e->relation != edge.relation) return false;
    }
    return true;
}

void KnowledgeGraph::validate() const {
    std::int64_t degree_sum = 0;
    for (const auto& [id, nbrs] : adj_) {
        if (!has_node(id)) throw Error("validate: adjacency entry for unknown node");
        degree_sum += static_cast<std::int64_t>(nbrs.size());
    }
    if (degree_sum != 2 * static_cast<std::int64_t>(edges_.size()))
        throw Error("validate: degree sum != 2 * edge count");
    for (const auto& [key, edge] : edges_) {
        if (edge.a == edge.b) throw Error("validate: self-loop edge");
        if (!has_node(edge.a) || !has_node(edge.b)) throw Error("validate: dangling edge endpoint");
        if (edge.multiplicity < 1) throw Error("validate: non-positive multiplicity");
    }
    if (label_to_id_.size() != nodes_.size()) throw Error("validate: label index out of sync");
}

KnowledgeGraph build_from_triples(const std::vector<Triple>& triples,
                                  std::vector<std::string>* rejected) {
    KnowledgeGraph g;
    std::int64_t accepted = 0;
    for (std::size_t i = 0; i < triples.size(); ++i) {
        const Triple& t = triples[i];
        std::string subject = normalize_label(t.subject);
        std::string object = normalize_label(t.object);
        if (subject.empty() || object.empty()) {
            if (rejected)
                rejected->push_back("triple " + std::to_string(i) + ": empty label");
            continue;
        }
        if (subject == object) {
            if (rejected)
                rejected->push_back("triple " + std::to_string(i) + ": self-loop '" + subject + "'");
            continue;
        }
        NodeId u = g.add_node(subject);
        NodeId v = g.add_node(object);
        std::set<std::string> sources;
        if (!t.source_chunk.empty()) sources.insert(t.source_chunk);
        g.add_edge(u, v, t.relation, 1, sources);
        ++accepted;
    }
    g.metadata()["triple_count"] = std::to_string(accepted);
    g.validate();
    return g;
}

KnowledgeGraph compose(const KnowledgeGraph& g1, const KnowledgeGraph& g2) {
    KnowledgeGraph out;
    for (const auto& [id, rec] : g1.nodes()) {
        NodeId nid = out.add_node(rec.label);
        out.node_mutable(nid).aliases = rec.aliases;
    }
    for (const auto& [key, edge] : g1.edges()) {
        out.add_edge(*out.find_label(g1.node(edge.a).label),
                     *out.find_label(g1.node(edge.b).label),
                     edge.relation, edge.multiplicity, edge.sources);
    }
    for (const auto& [id, rec] : g2.nodes()) {
        NodeId nid = out.add_node(rec.label);
        auto& aliases = out.node_mutable(nid).aliases;
        for (const auto& a : rec.aliases) {
            if (std::find(aliases.begin(), aliases.end(), a) == aliases.end()) aliases.push_back(a);
        }
    }
    for (const auto& [key, edge] : g2.edges()) {
        NodeId u = *out.find_label(g2.node(edge.a).label);
        NodeId v = *out.find_label(g2.node(edge.b).label);
        out.add_edge(u, v, edge.relation, edge.multiplicity, edge.sources);
    }
    out.metadata() = g1.metadata();
    for (const auto& [k, v] : g2.metadata()) out.metadata().emplace(k, v);
    out.validate();
    return out;
}

MergeGroup make_merge_group(const KnowledgeGraph& g, std::set<NodeId> members) {
    if (members.empty()) throw Error("make_merge_group: empty member set");
    NodeId best = -1;
    std::int64_t best_degree = -1;
    for (NodeId id : members) {
        std::int64_t d = g.degree(id);
        if (d > best_degree ||
            (d == best_degree && g.node(id).label < g.node(best).label)) {
            best = id;
            best_degree = d;
        }
    }
    return MergeGroup{std::move(members), best};
}

KnowledgeGraph merge_nodes(const KnowledgeGraph& g, const std::vector<MergeGroup>& groups) {
    std::map<NodeId, NodeId> target; // member -> canonical
    for (const auto& group : groups) {
        if (group.members.empty()) throw Error("merge_nodes: empty group");
        if (group.members.count(group.canonical) == 0)
            throw Error("merge_nodes: canonical not a member");
        for (NodeId id : group.members) {
            if (!g.has_node(id)) throw Error("merge_nodes: unknown member " + std::to_string(id));
            if (!target.emplace(id, group.canonical).second)
                throw Error("merge_nodes: overlapping groups at node " + std::to_string(id));
        }
    }
    auto resolve = [&](NodeId id) {
        auto it = target.find(id);
        return it == target.end() ? id : it->second;
    };

    KnowledgeGraph out;
    std::map<NodeId, NodeId> new_id; // surviving old id -> id in out
    for (const auto& [id, rec] : g.nodes()) {
        if (resolve(id) != id) continue;
        NodeId nid = out.add_node(rec.label);
        out.node_mutable(nid).aliases = rec.aliases;
        new_id[id] = nid;
    }
    // fold merged labels into the canonical node's alias list
    for (const auto& [member, canonical] : target) {
        if (member == canonical) continue;
        auto& aliases = out.node_mutable(new_id.at(canonical)).aliases;
        const std::string& label = g.node(member).label;
        if (std::find(aliases.begin(), aliases.end(), label) == aliases.end())
            aliases.push_back(label);
        for (const auto& a : g.node(member).aliases) {
            if (std::find(aliases.begin(), aliases.end(), a) == aliases.end()) aliases.push_back(a);
        }
    }
    for (const auto& [key, edge] : g.edges()) {
        NodeId u = resolve(edge.a);
        NodeId v = resolve(edge.b);
        if (u == v) continue; // edge collapsed into a self-loop: drop
        out.add_edge(new_id.at(u), new_id.at(v), edge.relation, edge.multiplicity, edge.sources);
    }
    out.metadata() = g.metadata();
    out.validate();
    return out;
}

std::vector<std::set<NodeId>> connected_components(const KnowledgeGraph& g) {
    std::vector<std::set<NodeId>> components;
    std::set<NodeId> seen;
    for (const auto& [start, rec] : g.nodes()) {
        if (seen.count(start)) continue;
        std::set<NodeId> component;
        std::queue<NodeId> frontier;
        frontier.push(start);
        seen.insert(start);
        while (!frontier.empty()) {
            NodeId cur = frontier.front();
            frontier.pop();
            component.insert(cur);
            for (NodeId next : g.neighbors(cur)) {
                if (seen.insert(next).second) frontier.push(next);
            }
        }
        components.push_back(std::move(component));
    }
    return components;
}

KnowledgeGraph induced_subgraph(const KnowledgeGraph& g, const std::set<NodeId>& keep) {
    KnowledgeGraph out;
    std::map<NodeId, NodeId> new_id;
    for (NodeId id : keep) {
        const NodeRecord& rec = g.node(id);
        NodeId nid = out.add_node(rec.label);
        out.node_mutable(nid).aliases = rec.aliases;
        new_id[id] = nid;
    }
    for (const auto& [key, edge] : g.edges()) {
        if (keep.count(edge.a) && keep.count(edge.b))
            out.add_edge(new_id.at(edge.a), new_id.at(edge.b), edge.relation, edge.multiplicity,
                         edge.sources);
    }
    out.metadata() = g.metadata();
    out.validate();
    return out;
}

KnowledgeGraph prune_small_components(const KnowledgeGraph& g, int threshold) {
    if (threshold < 1) throw Error("prune_small_components: threshold must be >= 1");
    std::set<NodeId> keep;
    for (const auto& component : connected_components(g)) {
        if (static_cast<int>(component.size()) >= threshold)
            keep.insert(component.begin(), component.end());
    }
    return induced_subgraph(g, keep);
}

KnowledgeGraph giant_component(const KnowledgeGraph& g) {
    if (g.node_count() == 0) throw Error("giant_component: empty graph");
    auto components = connected_components(g);
    const std::set<NodeId>* best = nullptr;
    for (const auto& component : components) {
        if (!best || component.size() > best->size() ||
            (component.size() == best->size() && *component.begin() < *best->begin())) {
            best = &component;
        }
    }
    return induced_subgraph(g, *best);
}

} // namespace kg
