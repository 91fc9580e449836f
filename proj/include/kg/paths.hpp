#pragma once

#include "kg/embedding.hpp"
#include "kg/graph.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace kg {

struct PathQuery {
    std::string term_a;
    std::string term_b;
    int k = 2;              // top-k matches per term => up to k*k paths
    int expansion_hops = 1; // used by expand_subgraph
};

struct ReasoningPath {
    std::vector<NodeId> node_ids;
    std::vector<std::string> node_labels;
    std::vector<std::string> relations; // one per hop
    int rank_a = 0;                     // (i, j): which endpoint matches produced it
    int rank_b = 0;
    double score_a = 1.0;
    double score_b = 1.0;

    std::size_t length() const { return relations.size(); } // hops
};

struct PathBundle {
    PathQuery query;
    std::vector<ReasoningPath> paths;               // ordered by (i, j)
    std::vector<std::pair<int, int>> missing_slots; // unreachable (i, j) pairs
    KnowledgeGraph separate_view;
    KnowledgeGraph merged_view;
};

struct ContextSection {
    int rank_a = 0;
    int rank_b = 0;
    std::string path_text;
};

struct ContextDocument {
    std::string term_a;
    std::string term_b;
    ContextSection primary;
    std::vector<ContextSection> alternatives;
    std::string instruction;
};

/// Minimum-hop path; among equal-length paths the lexicographically smallest
/// node-label sequence wins. nullopt when the pair is disconnected.
std::optional<ReasoningPath> shortest_path(const KnowledgeGraph& g, NodeId source, NodeId target);

/// Match top-k nodes per term, then one shortest path per ordered match pair.
/// Throws when no node matches a term above `similarity_floor`.
PathBundle find_paths(const KnowledgeGraph& g, const NodeEmbeddingIndex& index,
                      EmbeddingProvider& provider, const PathQuery& query,
                      double similarity_floor = 0.3);

/// Induced subgraph on the path nodes plus their <= hops neighborhoods.
KnowledgeGraph expand_subgraph(const KnowledgeGraph& g, const std::vector<ReasoningPath>& paths,
                               int hops);

/// separate: per-path node copies suffixed with the path rank;
/// merged: equal labels collapse across paths.
std::pair<KnowledgeGraph, KnowledgeGraph> merge_paths(const std::vector<ReasoningPath>& paths);

/// "label --> relation --> label --> ... --> label"
std::string serialize_path(const ReasoningPath& path);

ContextDocument assemble_context(const PathBundle& bundle, const std::string& instruction);

/// Plain-text rendering with "###" section headings.
std::string render_context(const ContextDocument& doc);

} // namespace kg
