#pragma once

#include "kg/graph.hpp"

#include <chrono>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace kg {

enum class IsoScope { giant_components_only, full };

struct IsoConstraints {
    int min_nodes = 15;
    double min_avg_degree = 2.0;
    IsoScope search_scope = IsoScope::giant_components_only;
    int max_mappings = 5;
    std::chrono::milliseconds pair_timeout{5000};
};

struct CandidateSubgraph {
    std::string origin;      // which input graph it came from
    std::set<NodeId> nodes;  // connected induced subgraph
    std::size_t size = 0;
    double avg_degree = 0.0; // within the induced subgraph
};

/// Node bijection between a subgraph of g1 and a subgraph of g2 preserving
/// adjacency in both directions, with the induced edge correspondence.
struct IsoMapping {
    std::map<NodeId, NodeId> node_pairs;                 // g1 node -> g2 node
    std::vector<std::pair<EdgeKey, EdgeKey>> edge_pairs; // g1 edge -> g2 edge
};

/// Communities plus 2-hop ego networks of the top-20 betweenness nodes,
/// scoped, filtered by size and average degree, deduplicated by node set.
std::vector<CandidateSubgraph> enumerate_candidates(const KnowledgeGraph& g,
                                                    const IsoConstraints& constraints,
                                                    const std::string& origin = "g");

/// Structure-only matching over candidate pairs with equal degree sequences,
/// largest candidates first, up to constraints.max_mappings results. Pairs
/// that exceed the per-pair timeout are skipped and noted in `skipped`.
std::vector<IsoMapping> find_isomorphic_subgraphs(const KnowledgeGraph& g1,
                                                  const KnowledgeGraph& g2,
                                                  const IsoConstraints& constraints = {},
                                                  std::vector<std::string>* skipped = nullptr);

/// True iff the map is a bijection and (u,v) in E1 <=> (f(u),f(v)) in E2
/// over its domain.
bool verify_mapping(const KnowledgeGraph& g1, const KnowledgeGraph& g2,
                    const IsoMapping& mapping);

struct MappingReportRow {
    std::string g1_text;
    std::string g2_text;
};

struct MappingReport {
    std::vector<MappingReportRow> node_rows;
    std::vector<MappingReportRow> edge_rows; // labels with relation texts
};

/// Requires verify_mapping to hold. The reasoning column is left empty for
/// downstream completion.
MappingReport mapping_report(const KnowledgeGraph& g1, const KnowledgeGraph& g2,
                             const IsoMapping& mapping);

std::string mapping_report_csv(const MappingReport& report);
std::string mapping_report_latex(const MappingReport& report);

} // namespace kg
