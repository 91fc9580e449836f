#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kg {

using NodeId = std::int64_t;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Lowercase, trim surrounding whitespace, collapse internal runs to one space.
std::string normalize_label(std::string_view text);

/// One extracted (subject, relation, object) assertion with chunk provenance.
struct Triple {
    std::string subject;
    std::string relation;
    std::string object;
    std::string source_chunk; // empty when absent

    bool operator==(const Triple&) const = default;
};

struct NodeRecord {
    NodeId id = 0;
    std::string label;
    std::vector<std::string> aliases; // labels folded into this node by merges
};

struct EdgeRecord {
    NodeId a = 0; // a < b always
    NodeId b = 0;
    std::string relation; // distinct relation texts joined by "; "
    std::int64_t multiplicity = 1;
    std::set<std::string> sources; // chunk ids that asserted this edge
};

using EdgeKey = std::pair<NodeId, NodeId>;

inline EdgeKey make_edge_key(NodeId u, NodeId v) {
    return u < v ? EdgeKey{u, v} : EdgeKey{v, u};
}

/// A set of nodes to be collapsed into one. `canonical` must be the member
/// with maximal degree, ties broken by lexicographically smallest label.
struct MergeGroup {
    std::set<NodeId> members;
    NodeId canonical = 0;
};

/// Labeled undirected graph with collapsed parallel edges. Labels are unique
/// and act as the merge key; node ids are assigned first-seen and never reused.
class KnowledgeGraph {
public:
    NodeId add_node(std::string_view label);
    void add_edge(NodeId u, NodeId v, std::string_view relation, std::int64_t multiplicity = 1,
                  const std::set<std::string>& sources = {});

    bool has_node(NodeId id) const { return nodes_.count(id) != 0; }
    std::optional<NodeId> find_label(std::string_view label) const;
    const NodeRecord& node(NodeId id) const;
    NodeRecord& node_mutable(NodeId id);
    const EdgeRecord* find_edge(NodeId u, NodeId v) const;

    const std::map<NodeId, NodeRecord>& nodes() const { return nodes_; }
    const std::map<EdgeKey, EdgeRecord>& edges() const { return edges_; }
    const std::set<NodeId>& neighbors(NodeId id) const;

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    std::int64_t degree(NodeId id) const;

    std::map<std::string, std::string>& metadata() { return metadata_; }
    const std::map<std::string, std::string>& metadata() const { return metadata_; }

    /// Structural equality: same labels, adjacency (by label) and multiplicities.
    bool structurally_equal(const KnowledgeGraph& other) const;

    /// Throws Error if any structural invariant is violated.
    void validate() const;

private:
    std::map<NodeId, NodeRecord> nodes_;
    std::map<std::string, NodeId> label_to_id_;
    std::map<EdgeKey, EdgeRecord> edges_;
    std::map<NodeId, std::set<NodeId>> adj_;
    std::map<std::string, std::string> metadata_;
    NodeId next_id_ = 0;
};

/// One node per distinct normalized label, one edge per unordered label pair.
/// Invalid triples (empty label after normalization, self-loop) are skipped;
/// a description of each is appended to `rejected` when given.
KnowledgeGraph build_from_triples(const std::vector<Triple>& triples,
                                  std::vector<std::string>* rejected = nullptr);

/// Union by label; multiplicities summed, distinct relation texts joined.
KnowledgeGraph compose(const KnowledgeGraph& g1, const KnowledgeGraph& g2);

MergeGroup make_merge_group(const KnowledgeGraph& g, std::set<NodeId> members);

/// Collapse each group to its canonical node. Self-loops produced by the
/// rewiring are dropped, parallel edges collapse with summed multiplicity.
/// Overlapping groups are rejected before any mutation.
KnowledgeGraph merge_nodes(const KnowledgeGraph& g, const std::vector<MergeGroup>& groups);

std::vector<std::set<NodeId>> connected_components(const KnowledgeGraph& g);

KnowledgeGraph induced_subgraph(const KnowledgeGraph& g, const std::set<NodeId>& keep);

/// Drop every component with fewer than `threshold` nodes.
KnowledgeGraph prune_small_components(const KnowledgeGraph& g, int threshold);

/// Largest component, ties broken by smallest minimum node id. Throws on empty input.
KnowledgeGraph giant_component(const KnowledgeGraph& g);

} // namespace kg
