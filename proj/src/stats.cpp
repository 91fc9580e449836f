#include "kg/stats.hpp"

#include <algorithm>
#include <cmath>
#include <atomic>
#include <numeric>
#include <queue>
#include <random>
#include <thread>

namespace kg {

DegreeStats degree_stats(const KnowledgeGraph& g) {
    if (g.node_count() == 0) throw Error("degree_stats: empty graph");
    DegreeStats s;
    s.node_count = static_cast<std::int64_t>(g.node_count());
    s.edge_count = static_cast<std::int64_t>(g.edge_count());

    std::vector<std::int64_t> degrees;
    degrees.reserve(g.node_count());
    for (const auto& [id, rec] : g.nodes()) degrees.push_back(g.degree(id));
    std::sort(degrees.begin(), degrees.end());

    s.avg_degree = 2.0 * static_cast<double>(s.edge_count) / static_cast<double>(s.node_count);
    s.min_degree = degrees.front();
    s.max_degree = degrees.back();
    s.median_degree = degrees[(degrees.size() - 1) / 2]; // lower middle when even
    s.density = s.node_count >= 2
                    ? 2.0 * static_cast<double>(s.edge_count) /
                          (static_cast<double>(s.node_count) * static_cast<double>(s.node_count - 1))
                    : 0.0;
    return s;
}

Histogram degree_histogram_log1p(const KnowledgeGraph& g, int bins) {
    if (bins < 1) throw Error("degree_histogram_log1p: bins must be >= 1");
    if (g.node_count() == 0) throw Error("degree_histogram_log1p: empty graph");

    std::vector<double> values;
    values.reserve(g.node_count());
    for (const auto& [id, rec] : g.nodes()) values.push_back(std::log1p(static_cast<double>(g.degree(id))));
    double lo = *std::min_element(values.begin(), values.end());
    double hi = *std::max_element(values.begin(), values.end());

    Histogram h;
    h.counts.assign(bins, 0);
    h.bin_edges.resize(bins + 1);
    double width = (hi - lo) / bins;
    for (int i = 0; i <= bins; ++i) h.bin_edges[i] = lo + width * i;
    h.bin_edges.back() = hi;
    for (double v : values) {
        int idx = width > 0.0 ? static_cast<int>((v - lo) / width) : 0;
        if (idx >= bins) idx = bins - 1;
        ++h.counts[idx];
    }
    return h;
}

double clustering_coefficient(const KnowledgeGraph& g, NodeId node) {
    const auto& nbrs = g.neighbors(node); // throws on unknown node
    std::size_t deg = nbrs.size();
    if (deg < 2) return 0.0;
    std::int64_t triangles = 0;
    for (auto it = nbrs.begin(); it != nbrs.end(); ++it) {
        for (auto jt = std::next(it); jt != nbrs.end(); ++jt) {
            if (g.neighbors(*it).count(*jt)) ++triangles;
        }
    }
    return 2.0 * static_cast<double>(triangles) / (static_cast<double>(deg) * (deg - 1));
}

double avg_clustering(const KnowledgeGraph& g) {
    if (g.node_count() == 0) throw Error("avg_clustering: empty graph");
    double sum = 0.0;
    for (const auto& [id, rec] : g.nodes()) sum += clustering_coefficient(g, id);
    return sum / static_cast<double>(g.node_count());
}

namespace {

struct DenseGraph {
    std::vector<NodeId> ids;
    std::map<NodeId, int> index;
    std::vector<std::vector<int>> adj;

    explicit DenseGraph(const KnowledgeGraph& g) {
        ids.reserve(g.node_count());
        for (const auto& [id, rec] : g.nodes()) {
            index.emplace(id, static_cast<int>(ids.size()));
            ids.push_back(id);
        }
        adj.resize(ids.size());
        for (const auto& [key, edge] : g.edges()) {
            adj[index.at(edge.a)].push_back(index.at(edge.b));
            adj[index.at(edge.b)].push_back(index.at(edge.a));
        }
    }
};

// one Brandes pass: node-betweenness contributions from sources [begin, end)
std::vector<double> brandes_range(const DenseGraph& d, int begin, int end) {
    const int n = static_cast<int>(d.ids.size());
    std::vector<double> score(n, 0.0);
    std::vector<int> dist(n), stack_order;
    std::vector<double> sigma(n), delta(n);
    std::vector<std::vector<int>> preds(n);
    stack_order.reserve(n);

    for (int s = begin; s < end; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        std::fill(sigma.begin(), sigma.end(), 0.0);
        std::fill(delta.begin(), delta.end(), 0.0);
        for (auto& p : preds) p.clear();
        stack_order.clear();

        std::queue<int> q;
        dist[s] = 0;
        sigma[s] = 1.0;
        q.push(s);
        while (!q.empty()) {
            int v = q.front();
            q.pop();
            stack_order.push_back(v);
            for (int w : d.adj[v]) {
                if (dist[w] < 0) {
                    dist[w] = dist[v] + 1;
                    q.push(w);
                }
                if (dist[w] == dist[v] + 1) {
                    sigma[w] += sigma[v];
                    preds[w].push_back(v);
                }
            }
        }
        for (auto it = stack_order.rbegin(); it != stack_order.rend(); ++it) {
            int w = *it;
            for (int v : preds[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            if (w != s) score[w] += delta[w];
        }
    }
    return score;
}

} // namespace

std::map<NodeId, double> betweenness_centrality(const KnowledgeGraph& g, int parallelism) {
    DenseGraph d(g);
    const int n = static_cast<int>(d.ids.size());
    std::map<NodeId, double> out;
    for (NodeId id : d.ids) out[id] = 0.0;
    if (n < 3) return out;

    if (parallelism < 1) parallelism = 1;
    parallelism = std::min<int>(parallelism, n);
    // fixed chunk size: the reduction structure (and thus the floating-point
    // result) does not depend on the number of worker threads
    constexpr int kChunk = 64;
    const int n_chunks = (n + kChunk - 1) / kChunk;
    std::vector<std::vector<double>> partials(n_chunks);
    std::atomic<int> next_chunk{0};
    std::vector<std::thread> workers;
    for (int t = 0; t < parallelism; ++t) {
        workers.emplace_back([&] {
            while (true) {
                int c = next_chunk.fetch_add(1);
                if (c >= n_chunks) break;
                partials[c] = brandes_range(d, c * kChunk, std::min(n, (c + 1) * kChunk));
            }
        });
    }
    for (auto& w : workers) w.join();

    std::vector<double> score(n, 0.0);
    for (const auto& partial : partials) { // fixed chunk order
        for (int i = 0; i < n; ++i) score[i] += partial[i];
    }
    // each unordered pair was counted from both endpoints
    double norm = static_cast<double>(n - 1) * static_cast<double>(n - 2);
    for (int i = 0; i < n; ++i) out[d.ids[i]] = score[i] / norm;
    return out;
}

std::map<NodeId, double> bridging_centrality(const KnowledgeGraph& g) {
    auto betweenness = betweenness_centrality(g);
    std::map<NodeId, double> out;
    for (const auto& [id, rec] : g.nodes()) {
        std::int64_t deg = g.degree(id);
        if (deg == 0) {
            out[id] = 0.0;
            continue;
        }
        double inv_sum = 0.0;
        for (NodeId u : g.neighbors(id)) inv_sum += 1.0 / static_cast<double>(g.degree(u));
        double coefficient = (1.0 / static_cast<double>(deg)) / inv_sum;
        out[id] = betweenness.at(id) * coefficient;
    }
    return out;
}

// ---------------------------------------------------------------------------
// communities

double modularity(const KnowledgeGraph& g, const std::vector<std::set<NodeId>>& communities) {
    std::map<NodeId, int> community_of;
    for (std::size_t c = 0; c < communities.size(); ++c) {
        for (NodeId id : communities[c]) {
            if (!g.has_node(id)) throw Error("modularity: unknown node in partition");
            if (!community_of.emplace(id, static_cast<int>(c)).second)
                throw Error("modularity: node appears in two communities");
        }
    }
    if (community_of.size() != g.node_count())
        throw Error("modularity: partition does not cover the node set");

    double m = static_cast<double>(g.edge_count());
    if (m == 0.0) return 0.0;

    std::vector<double> intra(communities.size(), 0.0), degree_sum(communities.size(), 0.0);
    for (const auto& [key, edge] : g.edges()) {
        int ca = community_of.at(edge.a);
        int cb = community_of.at(edge.b);
        if (ca == cb) intra[ca] += 1.0;
    }
    for (const auto& [id, c] : community_of) degree_sum[c] += static_cast<double>(g.degree(id));

    double q = 0.0;
    for (std::size_t c = 0; c < communities.size(); ++c) {
        double frac = degree_sum[c] / (2.0 * m);
        q += intra[c] / m - frac * frac;
    }
    return q;
}

namespace {

// Agglomerative modularity maximization over adjacent community pairs,
// followed by single-node moves until no move improves Q.
class GreedyCommunities {
public:
    explicit GreedyCommunities(const KnowledgeGraph& g) : g_(g), m_(static_cast<double>(g.edge_count())) {
        for (const auto& [id, rec] : g.nodes()) {
            community_of_[id] = id;
            members_[id] = {id};
            degree_sum_[id] = static_cast<double>(g.degree(id));
        }
        for (const auto& [key, edge] : g.edges()) {
            between_[edge.a][edge.b] += 1.0;
            between_[edge.b][edge.a] += 1.0;
        }
    }

    std::vector<std::set<NodeId>> run() {
        if (m_ > 0.0) {
            agglomerate();
            refine();
        }
        std::vector<std::set<NodeId>> out;
        for (auto& [root, nodes] : members_)
            if (!nodes.empty()) out.push_back(nodes);
        return out;
    }

private:
    void agglomerate() {
        while (true) {
            double best = 1e-12;
            NodeId best_a = -1, best_b = -1;
            for (const auto& [a, nbrs] : between_) {
                if (members_[a].empty()) continue;
                for (const auto& [b, count] : nbrs) {
                    if (b <= a || members_[b].empty()) continue;
                    double gain = count / m_ -
                                  2.0 * (degree_sum_[a] / (2.0 * m_)) * (degree_sum_[b] / (2.0 * m_));
                    if (gain > best) {
                        best = gain;
                        best_a = a;
                        best_b = b;
                    }
                }
            }
            if (best_a < 0) break;
            merge_communities(best_a, best_b);
        }
    }

    void merge_communities(NodeId a, NodeId b) { // b folds into a
        for (NodeId id : members_[b]) {
            community_of_[id] = a;
            members_[a].insert(id);
        }
        members_[b].clear();
        degree_sum_[a] += degree_sum_[b];
        degree_sum_[b] = 0.0;
        for (const auto& [other, count] : between_[b]) {
            if (other == a) continue;
            between_[a][other] += count;
            between_[other][a] += count;
            between_[other].erase(b);
        }
        between_[a].erase(b);
        between_.erase(b);
    }

    // single-node moves; Delta Q for moving v from A to B:
    //   (k_vB - k_vA)/m - k_v (d_B - (d_A - k_v)) / (2 m^2)
    void refine() {
        for (int pass = 0; pass < 100; ++pass) {
            bool moved = false;
            for (const auto& [v, rec] : g_.nodes()) {
                NodeId from = community_of_[v];
                double k_v = static_cast<double>(g_.degree(v));
                if (k_v == 0.0) continue;
                std::map<NodeId, double> links; // community -> edges from v
                for (NodeId u : g_.neighbors(v)) links[community_of_[u]] += 1.0;
                double k_v_from = links.count(from) ? links[from] : 0.0;

                double best_gain = 1e-12;
                NodeId best_to = -1;
                for (const auto& [to, k_v_to] : links) {
                    if (to == from) continue;
                    double gain = (k_v_to - k_v_from) / m_ -
                                  k_v * (degree_sum_[to] - (degree_sum_[from] - k_v)) /
                                      (2.0 * m_ * m_);
                    if (gain > best_gain || (gain == best_gain && best_to >= 0 && to < best_to)) {
                        best_gain = gain;
                        best_to = to;
                    }
                }
                if (best_to >= 0) {
                    members_[from].erase(v);
                    members_[best_to].insert(v);
                    degree_sum_[from] -= k_v;
                    degree_sum_[best_to] += k_v;
                    community_of_[v] = best_to;
                    moved = true;
                }
            }
            if (!moved) break;
        }
    }

    const KnowledgeGraph& g_;
    double m_;
    std::map<NodeId, NodeId> community_of_;
    std::map<NodeId, std::set<NodeId>> members_;
    std::map<NodeId, double> degree_sum_;
    std::map<NodeId, std::map<NodeId, double>> between_;
};

// mutable adjacency restricted to one component, for edge removal
struct LocalGraph {
    std::map<NodeId, std::set<NodeId>> adj;

    static LocalGraph induced(const KnowledgeGraph& g, const std::set<NodeId>& nodes) {
        LocalGraph lg;
        for (NodeId id : nodes) lg.adj[id] = {};
        for (const auto& [key, edge] : g.edges()) {
            if (nodes.count(edge.a) && nodes.count(edge.b)) {
                lg.adj[edge.a].insert(edge.b);
                lg.adj[edge.b].insert(edge.a);
            }
        }
        return lg;
    }

    std::size_t edge_count() const {
        std::size_t twice = 0;
        for (const auto& [id, nbrs] : adj) twice += nbrs.size();
        return twice / 2;
    }

    std::vector<std::set<NodeId>> components() const {
        std::vector<std::set<NodeId>> out;
        std::set<NodeId> seen;
        for (const auto& [start, nbrs] : adj) {
            if (seen.count(start)) continue;
            std::set<NodeId> comp;
            std::queue<NodeId> q;
            q.push(start);
            seen.insert(start);
            while (!q.empty()) {
                NodeId cur = q.front();
                q.pop();
                comp.insert(cur);
                for (NodeId nb : adj.at(cur))
                    if (seen.insert(nb).second) q.push(nb);
            }
            out.push_back(std::move(comp));
        }
        return out;
    }

    std::map<EdgeKey, double> edge_betweenness() const {
        std::map<EdgeKey, double> score;
        for (const auto& [id, nbrs] : adj)
            for (NodeId nb : nbrs)
                if (id < nb) score[{id, nb}] = 0.0;

        std::map<NodeId, int> dist;
        std::map<NodeId, double> sigma, delta;
        for (const auto& [s, ignored] : adj) {
            dist.clear();
            sigma.clear();
            delta.clear();
            std::vector<NodeId> order;
            std::queue<NodeId> q;
            dist[s] = 0;
            sigma[s] = 1.0;
            q.push(s);
            while (!q.empty()) {
                NodeId v = q.front();
                q.pop();
                order.push_back(v);
                for (NodeId w : adj.at(v)) {
                    if (!dist.count(w)) {
                        dist[w] = dist[v] + 1;
                        q.push(w);
                    }
                    if (dist[w] == dist[v] + 1) sigma[w] += sigma[v];
                }
            }
            for (auto it = order.rbegin(); it != order.rend(); ++it) {
                NodeId w = *it;
                for (NodeId v : adj.at(w)) {
                    if (dist.count(v) && dist.at(v) == dist.at(w) - 1) {
                        double c = sigma[v] / sigma[w] * (1.0 + delta[w]);
                        score[make_edge_key(v, w)] += c;
                        delta[v] += c;
                    }
                }
            }
        }
        return score;
    }
};

// remove highest-betweenness edges until the component splits
std::vector<std::set<NodeId>> girvan_newman_split(LocalGraph lg) {
    if (lg.adj.size() < 2) {
        std::vector<std::set<NodeId>> single;
        std::set<NodeId> all;
        for (const auto& [id, nbrs] : lg.adj) all.insert(id);
        single.push_back(all);
        return single;
    }
    while (lg.edge_count() > 0) {
        auto scores = lg.edge_betweenness();
        EdgeKey best{};
        double best_score = -1.0;
        for (const auto& [key, s] : scores) {
            if (s > best_score) {
                best_score = s;
                best = key;
            }
        }
        lg.adj[best.first].erase(best.second);
        lg.adj[best.second].erase(best.first);
        auto comps = lg.components();
        if (comps.size() > 1) return comps;
    }
    return lg.components();
}

} // namespace

CommunityPartition detect_communities(const KnowledgeGraph& g, CommunityMethod method) {
    if (g.node_count() == 0) return {{}, 0.0};

    std::vector<std::set<NodeId>> communities;
    auto graph_components = connected_components(g);

    if (method == CommunityMethod::greedy_modularity) {
        GreedyCommunities greedy(g);
        communities = greedy.run();
    } else {
        if (g.node_count() > 2000)
            throw Error("detect_communities: girvan_newman is limited to 2000 nodes; "
                        "use greedy_modularity");
        // coarse split per component, then one refinement level kept only
        // when it improves global modularity
        std::vector<std::set<NodeId>> coarse;
        for (const auto& comp : graph_components) {
            auto split = girvan_newman_split(LocalGraph::induced(g, comp));
            for (auto& part : split) coarse.push_back(std::move(part));
        }
        communities = coarse;
        double q = modularity(g, communities);
        for (std::size_t i = 0; i < communities.size(); ++i) {
            if (communities[i].size() < 4) continue;
            auto refined = girvan_newman_split(LocalGraph::induced(g, communities[i]));
            if (refined.size() < 2) continue;
            std::vector<std::set<NodeId>> candidate;
            for (std::size_t j = 0; j < communities.size(); ++j)
                if (j != i) candidate.push_back(communities[j]);
            for (auto& part : refined) candidate.push_back(std::move(part));
            double q2 = modularity(g, candidate);
            if (q2 > q + 1e-12) {
                communities = std::move(candidate);
                q = q2;
            }
        }
    }

    // deterministic ordering: by size descending, then smallest member id
    std::sort(communities.begin(), communities.end(),
              [](const std::set<NodeId>& a, const std::set<NodeId>& b) {
                  if (a.size() != b.size()) return a.size() > b.size();
                  return *a.begin() < *b.begin();
              });
    return {communities, modularity(g, communities)};
}

CommunityReport community_report(const KnowledgeGraph& g, const CommunityPartition& partition) {
    std::map<NodeId, int> community_of;
    for (std::size_t c = 0; c < partition.communities.size(); ++c)
        for (NodeId id : partition.communities[c]) community_of[id] = static_cast<int>(c);
    if (community_of.size() != g.node_count())
        throw Error("community_report: partition does not cover the node set");

    auto betweenness = betweenness_centrality(g);

    CommunityReport report;
    for (const auto& community : partition.communities) {
        CommunitySummary s;
        s.members.assign(community.begin(), community.end());
        s.size = community.size();
        double deg_sum = 0.0, clust_sum = 0.0;
        for (NodeId id : community) {
            deg_sum += static_cast<double>(g.degree(id));
            clust_sum += clustering_coefficient(g, id);
        }
        s.avg_degree = deg_sum / static_cast<double>(s.size);
        s.avg_clustering = clust_sum / static_cast<double>(s.size);

        std::vector<NodeId> by_degree(s.members);
        std::sort(by_degree.begin(), by_degree.end(), [&](NodeId a, NodeId b) {
            if (g.degree(a) != g.degree(b)) return g.degree(a) > g.degree(b);
            return a < b;
        });
        std::size_t top = std::min<std::size_t>(5, by_degree.size());
        double b_sum = 0.0;
        for (std::size_t i = 0; i < top; ++i) b_sum += betweenness.at(by_degree[i]);
        s.avg_betweenness_top5 = top > 0 ? b_sum / static_cast<double>(top) : 0.0;
        report.communities.push_back(std::move(s));
    }
    std::sort(report.communities.begin(), report.communities.end(),
              [](const CommunitySummary& a, const CommunitySummary& b) {
                  if (a.size != b.size) return a.size > b.size;
                  return a.members.front() < b.members.front();
              });

    for (const auto& [key, edge] : g.edges()) {
        if (community_of.at(edge.a) == community_of.at(edge.b))
            ++report.intra_edges_total;
        else
            ++report.inter_edges_total;
    }
    double k = static_cast<double>(partition.communities.size());
    if (k > 0) {
        report.avg_intra_edges = static_cast<double>(report.intra_edges_total) / k;
        report.avg_inter_edges = static_cast<double>(report.inter_edges_total) / k;
    }
    return report;
}

// ---------------------------------------------------------------------------
// embedding clusters

namespace {

struct KMeansResult {
    std::vector<int> assignment;
    Eigen::MatrixXd centroids;
    double sse = 0.0;
};

KMeansResult kmeans_once(const Eigen::MatrixXd& points, int k, std::mt19937_64& rng) {
    const int n = static_cast<int>(points.rows());
    Eigen::MatrixXd centroids(k, points.cols());

    // k-means++ seeding
    std::vector<double> dist2(n, std::numeric_limits<double>::max());
    std::uniform_int_distribution<int> first(0, n - 1);
    centroids.row(0) = points.row(first(rng));
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            double d = (points.row(i) - centroids.row(c - 1)).squaredNorm();
            dist2[i] = std::min(dist2[i], d);
            total += dist2[i];
        }
        double target = std::uniform_real_distribution<double>(0.0, total)(rng);
        int chosen = n - 1;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            acc += dist2[i];
            if (acc >= target) {
                chosen = i;
                break;
            }
        }
        centroids.row(c) = points.row(chosen);
    }

    std::vector<int> assignment(n, -1);
    for (int iter = 0; iter < 200; ++iter) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_d = (points.row(i) - centroids.row(0)).squaredNorm();
            for (int c = 1; c < k; ++c) {
                double d = (points.row(i) - centroids.row(c)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (assignment[i] != best) {
                assignment[i] = best;
                changed = true;
            }
        }
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
        std::vector<int> counts(k, 0);
        for (int i = 0; i < n; ++i) {
            sums.row(assignment[i]) += points.row(i);
            ++counts[assignment[i]];
        }
        for (int c = 0; c < k; ++c)
            if (counts[c] > 0) centroids.row(c) = sums.row(c) / counts[c];
        if (!changed) break;
    }

    double sse = 0.0;
    for (int i = 0; i < n; ++i) sse += (points.row(i) - centroids.row(assignment[i])).squaredNorm();
    return {std::move(assignment), std::move(centroids), sse};
}

} // namespace

ClusterReport cluster_report(const NodeEmbeddingIndex& index, int n_clusters, int n_components,
                             unsigned seed) {
    const int n = static_cast<int>(index.size());
    if (n_clusters < 1) throw Error("cluster_report: n_clusters must be >= 1");
    if (n_clusters > n) throw Error("cluster_report: n_clusters exceeds indexed nodes");
    if (n_components < 1) throw Error("cluster_report: n_components must be >= 1");

    std::vector<NodeId> ids;
    ids.reserve(n);
    Eigen::MatrixXd data(n, index.dimension());
    int row = 0;
    for (const auto& [id, entry] : index.entries()) {
        ids.push_back(id);
        data.row(row++) = entry.vector.transpose();
    }

    n_components = std::min<int>({n_components, static_cast<int>(data.cols()), n});
    Eigen::RowVectorXd mean = data.colwise().mean();
    Eigen::MatrixXd centered = data.rowwise() - mean;
    Eigen::MatrixXd cov = centered.transpose() * centered / std::max(1, n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw Error("cluster_report: eigendecomposition failed");

    // eigenvalues ascend; take the top components, sign-fixed for stability
    Eigen::MatrixXd basis(data.cols(), n_components);
    for (int c = 0; c < n_components; ++c) {
        Eigen::VectorXd axis = solver.eigenvectors().col(static_cast<int>(data.cols()) - 1 - c);
        int arg_max = 0;
        for (int i = 1; i < axis.size(); ++i)
            if (std::abs(axis[i]) > std::abs(axis[arg_max])) arg_max = i;
        if (axis[arg_max] < 0) axis = -axis;
        basis.col(c) = axis;
    }
    Eigen::MatrixXd projected = centered * basis;

    std::mt19937_64 rng(seed);
    KMeansResult best;
    best.sse = std::numeric_limits<double>::max();
    for (int restart = 0; restart < 10; ++restart) {
        KMeansResult run = kmeans_once(projected, n_clusters, rng);
        if (run.sse < best.sse) best = std::move(run);
    }

    ClusterReport report;
    report.cluster_count = n_clusters;
    report.n_components = n_components;
    report.clusters.resize(n_clusters);
    for (int i = 0; i < n; ++i) report.clusters[best.assignment[i]].members.push_back(ids[i]);

    for (int c = 0; c < n_clusters; ++c) {
        auto& cluster = report.clusters[c];
        std::vector<std::pair<double, std::string>> by_distance;
        for (int i = 0; i < n; ++i) {
            if (best.assignment[i] != c) continue;
            double d = (projected.row(i) - best.centroids.row(c)).norm();
            by_distance.emplace_back(d, index.entries().at(ids[i]).label);
        }
        std::sort(by_distance.begin(), by_distance.end());
        for (std::size_t i = 0; i < by_distance.size() && i < 10; ++i)
            cluster.nearest_labels.push_back(by_distance[i].second);
    }
    // largest clusters first
    std::sort(report.clusters.begin(), report.clusters.end(),
              [](const ClusterEntry& a, const ClusterEntry& b) {
                  if (a.members.size() != b.members.size()) return a.members.size() > b.members.size();
                  return a.members.front() < b.members.front();
              });
    return report;
}

} // namespace kg
