#pragma once

#include "kg/embedding.hpp"
#include "kg/graph.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace kg {

struct DegreeStats {
    std::int64_t node_count = 0;
    std::int64_t edge_count = 0;
    double avg_degree = 0.0;
    std::int64_t max_degree = 0;
    std::int64_t min_degree = 0;
    std::int64_t median_degree = 0; // lower middle for even counts
    double density = 0.0;
};

DegreeStats degree_stats(const KnowledgeGraph& g);

struct Histogram {
    std::vector<double> bin_edges; // bins + 1 edges
    std::vector<std::int64_t> counts;
};

/// Counts over log1p(degree); edges span [log1p(min), log1p(max)].
Histogram degree_histogram_log1p(const KnowledgeGraph& g, int bins);

/// triangles / (deg choose 2); 0 for degree < 2.
double clustering_coefficient(const KnowledgeGraph& g, NodeId node);
double avg_clustering(const KnowledgeGraph& g);

/// Exact Brandes accumulation, normalized by (N-1)(N-2)/2. Deterministic
/// for any parallelism (sources are chunked, partials summed in fixed order).
std::map<NodeId, double> betweenness_centrality(const KnowledgeGraph& g, int parallelism = 1);

/// betweenness(v) * (1/deg(v)) / sum_u in N(v) (1/deg(u)); 0 for isolated nodes.
std::map<NodeId, double> bridging_centrality(const KnowledgeGraph& g);

struct PowerLawFit {
    double alpha = 0.0;
    double sigma_alpha = 0.0;
    std::int64_t x_min = 1;
    std::int64_t n_tail = 0;
    double ks_distance = 0.0;
    double loglik_ratio = 0.0; // normalized; positive favors the power law
    double p_value = 1.0;
};

/// Discrete MLE with x_min chosen by KS minimization, likelihood-ratio test
/// against a discrete exponential on the same tail. Needs >= 50 observations
/// with >= 2 distinct values.
PowerLawFit fit_power_law(const std::vector<std::int64_t>& samples);

/// CCDF table for plotting: (degree, empirical_ccdf, fitted_ccdf) rows.
struct CcdfRow {
    std::int64_t degree = 0;
    double empirical = 0.0;
    double fitted = 0.0;
};
std::vector<CcdfRow> power_law_ccdf(const std::vector<std::int64_t>& samples,
                                    const PowerLawFit& fit);

enum class CommunityMethod { greedy_modularity, girvan_newman };

struct CommunityPartition {
    std::vector<std::set<NodeId>> communities;
    double modularity = 0.0;
};

/// Q = sum_c (e_c/m - (d_c/2m)^2). Throws unless `communities` partitions the node set.
double modularity(const KnowledgeGraph& g, const std::vector<std::set<NodeId>>& communities);

/// Components are partitioned independently; no community spans components.
/// girvan_newman refuses graphs above 2000 nodes.
CommunityPartition detect_communities(const KnowledgeGraph& g,
                                      CommunityMethod method = CommunityMethod::greedy_modularity);

struct CommunitySummary {
    std::vector<NodeId> members;
    std::size_t size = 0;
    double avg_degree = 0.0;
    double avg_clustering = 0.0;
    double avg_betweenness_top5 = 0.0; // top 5 members by degree
};

struct CommunityReport {
    std::vector<CommunitySummary> communities; // sorted by size, largest first
    std::int64_t intra_edges_total = 0;
    std::int64_t inter_edges_total = 0;
    double avg_intra_edges = 0.0;
    double avg_inter_edges = 0.0;
};

CommunityReport community_report(const KnowledgeGraph& g, const CommunityPartition& partition);

struct ClusterEntry {
    std::vector<NodeId> members;
    std::vector<std::string> nearest_labels; // up to 10, nearest centroid first
};

struct ClusterReport {
    int cluster_count = 0;
    int n_components = 0;
    std::vector<ClusterEntry> clusters;
};

/// PCA projection to n_components, then seeded k-means++ (10 restarts).
ClusterReport cluster_report(const NodeEmbeddingIndex& index, int n_clusters,
                             int n_components = 2, unsigned seed = 7);

} // namespace kg
