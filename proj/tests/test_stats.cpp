#include "kg/stats.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace kg;

namespace {

KnowledgeGraph triangle() {
    return build_from_triples({{"a", "r", "b", ""}, {"b", "r", "c", ""}, {"c", "r", "a", ""}});
}

// two triangles joined by one bridge edge: {a,b,c} - {d,e,f}
KnowledgeGraph two_triangles_bridge() {
    return build_from_triples({
        {"a", "r", "b", ""}, {"b", "r", "c", ""}, {"c", "r", "a", ""},
        {"d", "r", "e", ""}, {"e", "r", "f", ""}, {"f", "r", "d", ""},
        {"c", "bridge", "d", ""},
    });
}

// two triangles joined by a 3-edge path through a dedicated bridge node:
// (a,b,c) - c-d, d-e - (e,f,g)
KnowledgeGraph barbell() {
    return build_from_triples({
        {"a", "r", "b", ""}, {"b", "r", "c", ""}, {"c", "r", "a", ""},
        {"e", "r", "f", ""}, {"f", "r", "g", ""}, {"g", "r", "e", ""},
        {"c", "r", "d", ""}, {"d", "r", "e", ""},
    });
}

KnowledgeGraph complete_graph(int n) {
    KnowledgeGraph g;
    std::vector<NodeId> ids;
    for (int i = 0; i < n; ++i) ids.push_back(g.add_node(kgtest::label_of(i)));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) g.add_edge(ids[i], ids[j], "r");
    return g;
}

KnowledgeGraph star(int leaves) {
    KnowledgeGraph g;
    NodeId center = g.add_node("center");
    for (int i = 0; i < leaves; ++i) g.add_edge(center, g.add_node("leaf" + std::to_string(i)), "r");
    return g;
}

// graph with exactly n nodes and m distinct random edges
KnowledgeGraph exact_size_graph(int n, int m, unsigned seed) {
    std::mt19937 rng(seed);
    KnowledgeGraph g;
    std::vector<NodeId> ids;
    for (int i = 0; i < n; ++i) ids.push_back(g.add_node(kgtest::label_of(i)));
    std::uniform_int_distribution<int> pick(0, n - 1);
    while (static_cast<int>(g.edge_count()) < m) {
        int u = pick(rng), v = pick(rng);
        if (u == v || g.find_edge(ids[u], ids[v])) continue;
        g.add_edge(ids[u], ids[v], "r");
    }
    return g;
}

} // namespace

TEST_CASE("degree_stats reproduces the published formula values") {
    KnowledgeGraph global = exact_size_graph(12319, 15752, 1);
    DegreeStats s = degree_stats(global);
    CHECK(std::round(s.avg_degree * 100) / 100 == 2.56);
    CHECK(s.density == doctest::Approx(2.0761e-4).epsilon(1e-3));

    KnowledgeGraph giant = exact_size_graph(11878, 15396, 2);
    DegreeStats t = degree_stats(giant);
    CHECK(std::round(t.avg_degree * 100) / 100 == 2.59);
    CHECK(t.density == doctest::Approx(2.1827e-4).epsilon(1e-3));
}

TEST_CASE("degree_stats on a triangle") {
    DegreeStats s = degree_stats(triangle());
    CHECK(s.avg_degree == 2.0);
    CHECK(s.max_degree == 2);
    CHECK(s.min_degree == 2);
    CHECK(s.median_degree == 2);
    CHECK(s.density == 1.0);

    CHECK_THROWS_AS(degree_stats(KnowledgeGraph{}), Error);
}

TEST_CASE("degree_stats identities on random graphs") {
    for (unsigned seed = 0; seed < 6; ++seed) {
        KnowledgeGraph g = kgtest::random_graph(40, 70, seed);
        DegreeStats s = degree_stats(g);
        CHECK(s.avg_degree == 2.0 * s.edge_count / s.node_count);
        CHECK(s.density ==
              doctest::Approx(2.0 * s.edge_count / (double(s.node_count) * (s.node_count - 1))));
        CHECK(s.min_degree <= s.median_degree);
        CHECK(s.median_degree <= s.max_degree);
    }
}

TEST_CASE("degree histogram over log1p") {
    Histogram h = degree_histogram_log1p(star(5), 4);
    CHECK(std::accumulate(h.counts.begin(), h.counts.end(), std::int64_t{0}) == 6);
    int nonzero = 0;
    for (auto c : h.counts) nonzero += c > 0;
    CHECK(nonzero == 2);
    CHECK(h.bin_edges.front() == doctest::Approx(std::log1p(1.0)));
    CHECK(h.bin_edges.back() == doctest::Approx(std::log1p(5.0)));

    // all degrees equal: single nonzero bin
    Histogram t = degree_histogram_log1p(triangle(), 5);
    nonzero = 0;
    for (auto c : t.counts) nonzero += c > 0;
    CHECK(nonzero == 1);

    // matches a direct binning loop on a random graph
    KnowledgeGraph g = kgtest::random_connected_graph(100, 80, 3);
    int bins = 7;
    Histogram got = degree_histogram_log1p(g, bins);
    std::vector<std::int64_t> want(bins, 0);
    double lo = 1e300, hi = -1e300;
    for (const auto& [id, rec] : g.nodes()) {
        lo = std::min(lo, std::log1p(double(g.degree(id))));
        hi = std::max(hi, std::log1p(double(g.degree(id))));
    }
    for (const auto& [id, rec] : g.nodes()) {
        double v = std::log1p(double(g.degree(id)));
        int idx = std::min(bins - 1, int((v - lo) / ((hi - lo) / bins)));
        ++want[idx];
    }
    CHECK(got.counts == want);
}

TEST_CASE("clustering coefficient") {
    KnowledgeGraph t = triangle();
    for (const auto& [id, rec] : t.nodes()) CHECK(clustering_coefficient(t, id) == 1.0);

    KnowledgeGraph s = star(5);
    CHECK(clustering_coefficient(s, *s.find_label("center")) == 0.0);

    CHECK_THROWS_AS(clustering_coefficient(t, 999), Error);

    // triple-loop triangle enumeration oracle
    KnowledgeGraph g = kgtest::random_graph(20, 40, 9);
    double oracle_sum = 0.0;
    for (const auto& [v, rec] : g.nodes()) {
        std::vector<NodeId> nbrs(g.neighbors(v).begin(), g.neighbors(v).end());
        if (nbrs.size() < 2) continue;
        int closed = 0, total = 0;
        for (std::size_t i = 0; i < nbrs.size(); ++i) {
            for (std::size_t j = i + 1; j < nbrs.size(); ++j) {
                ++total;
                if (g.find_edge(nbrs[i], nbrs[j])) ++closed;
            }
        }
        oracle_sum += double(closed) / total;
    }
    CHECK(avg_clustering(g) ==
          doctest::Approx(oracle_sum / double(g.node_count())).epsilon(1e-12));
}

namespace {

// all-pairs shortest-path enumeration oracle for normalized betweenness
std::map<NodeId, double> betweenness_oracle(const KnowledgeGraph& g) {
    std::vector<NodeId> ids;
    for (const auto& [id, rec] : g.nodes()) ids.push_back(id);
    const int n = static_cast<int>(ids.size());
    std::map<NodeId, double> out;
    for (NodeId id : ids) out[id] = 0.0;
    if (n < 3) return out;

    auto bfs_counts = [&](NodeId s) {
        std::map<NodeId, int> dist;
        std::map<NodeId, double> count;
        std::queue<NodeId> q;
        dist[s] = 0;
        count[s] = 1.0;
        q.push(s);
        while (!q.empty()) {
            NodeId v = q.front();
            q.pop();
            for (NodeId w : g.neighbors(v)) {
                if (!dist.count(w)) {
                    dist[w] = dist[v] + 1;
                    q.push(w);
                }
                if (dist[w] == dist[v] + 1) count[w] += count[v];
            }
        }
        return std::pair{dist, count};
    };

    std::map<NodeId, std::pair<std::map<NodeId, int>, std::map<NodeId, double>>> from;
    for (NodeId id : ids) from[id] = bfs_counts(id);

    for (int si = 0; si < n; ++si) {
        for (int ti = si + 1; ti < n; ++ti) {
            NodeId s = ids[si], t = ids[ti];
            const auto& [dist_s, count_s] = from[s];
            const auto& [dist_t, count_t] = from[t];
            if (!dist_s.count(t)) continue;
            double total = count_s.at(t);
            for (NodeId v : ids) {
                if (v == s || v == t) continue;
                if (dist_s.count(v) && dist_t.count(v) &&
                    dist_s.at(v) + dist_t.at(v) == dist_s.at(t)) {
                    out[v] += count_s.at(v) * count_t.at(v) / total;
                }
            }
        }
    }
    double norm = double(n - 1) * double(n - 2) / 2.0;
    for (auto& [id, val] : out) val /= norm;
    return out;
}

} // namespace

TEST_CASE("betweenness centrality") {
    KnowledgeGraph path = build_from_triples({{"a", "r", "b", ""}, {"b", "r", "c", ""}});
    auto b = betweenness_centrality(path);
    CHECK(b.at(*path.find_label("b")) == 1.0);
    CHECK(b.at(*path.find_label("a")) == 0.0);
    CHECK(b.at(*path.find_label("c")) == 0.0);

    auto complete = complete_graph(6);
    for (const auto& [id, val] : betweenness_centrality(complete)) CHECK(val == 0.0);

    for (unsigned seed = 0; seed < 25; ++seed) {
        KnowledgeGraph g = kgtest::random_graph(12 + int(seed % 19), 30, seed);
        auto got = betweenness_centrality(g);
        auto want = betweenness_oracle(g);
        for (const auto& [id, val] : want) CHECK(got.at(id) == doctest::Approx(val).epsilon(1e-9));
    }
}

TEST_CASE("betweenness is deterministic under parallelism") {
    KnowledgeGraph g = kgtest::random_connected_graph(60, 60, 4);
    auto seq = betweenness_centrality(g, 1);
    auto par = betweenness_centrality(g, 4);
    for (const auto& [id, val] : seq) CHECK(par.at(id) == val);
}

TEST_CASE("bridging centrality") {
    // K1,5: center betweenness 1, coefficient (1/5)/5 = 1/25
    KnowledgeGraph s = star(5);
    auto bridging = bridging_centrality(s);
    CHECK(bridging.at(*s.find_label("center")) == doctest::Approx(0.04));
    for (int i = 0; i < 5; ++i) CHECK(bridging.at(*s.find_label("leaf" + std::to_string(i))) == 0.0);

    for (const auto& [id, val] : bridging_centrality(complete_graph(5))) CHECK(val == 0.0);

    // direct formula evaluation on the barbell: the path interior node wins
    KnowledgeGraph bb = barbell();
    auto scores = bridging_centrality(bb);
    auto betweenness = betweenness_centrality(bb);
    NodeId d = *bb.find_label("d");
    for (const auto& [id, val] : scores) {
        double inv_sum = 0.0;
        for (NodeId u : bb.neighbors(id)) inv_sum += 1.0 / double(bb.degree(u));
        double expected = betweenness.at(id) * (1.0 / double(bb.degree(id))) / inv_sum;
        CHECK(val == doctest::Approx(expected).epsilon(1e-12));
        if (id != d) CHECK(scores.at(d) > val);
    }

    KnowledgeGraph lonely;
    lonely.add_node("x");
    CHECK(bridging_centrality(lonely).at(0) == 0.0);
}

TEST_CASE("modularity") {
    KnowledgeGraph g = two_triangles_bridge();
    std::set<NodeId> t1 = {*g.find_label("a"), *g.find_label("b"), *g.find_label("c")};
    std::set<NodeId> t2 = {*g.find_label("d"), *g.find_label("e"), *g.find_label("f")};

    std::set<NodeId> all;
    for (const auto& [id, rec] : g.nodes()) all.insert(id);
    CHECK(modularity(g, {all}) == doctest::Approx(0.0).epsilon(1e-15));

    CHECK(modularity(g, {t1, t2}) == doctest::Approx(5.0 / 14.0).epsilon(1e-12));

    CHECK_THROWS_AS(modularity(g, {t1}), Error);            // not covering
    CHECK_THROWS_AS(modularity(g, {all, t1}), Error);       // overlapping

    for (unsigned seed = 0; seed < 5; ++seed) {
        KnowledgeGraph r = kgtest::random_graph(20, 35, seed);
        std::mt19937 rng(seed);
        std::vector<std::set<NodeId>> parts(3);
        for (const auto& [id, rec] : r.nodes()) parts[rng() % 3].insert(id);
        parts.erase(std::remove_if(parts.begin(), parts.end(),
                                   [](const auto& p) { return p.empty(); }),
                    parts.end());
        double q = modularity(r, parts);
        CHECK(q >= -0.5);
        CHECK(q <= 1.0);
    }
}

TEST_CASE("detect_communities recovers the two triangles under both methods") {
    KnowledgeGraph g = two_triangles_bridge();
    std::set<NodeId> t1 = {*g.find_label("a"), *g.find_label("b"), *g.find_label("c")};
    std::set<NodeId> t2 = {*g.find_label("d"), *g.find_label("e"), *g.find_label("f")};

    // exhaustive 2-partition scan confirms the triangle split is optimal
    std::vector<NodeId> ids;
    for (const auto& [id, rec] : g.nodes()) ids.push_back(id);
    double best_q = -1.0;
    std::pair<std::set<NodeId>, std::set<NodeId>> best_split;
    for (int mask = 1; mask < (1 << 6) - 1; ++mask) {
        std::set<NodeId> left, right;
        for (int i = 0; i < 6; ++i) (mask >> i & 1 ? left : right).insert(ids[i]);
        double q = modularity(g, {left, right});
        if (q > best_q) {
            best_q = q;
            best_split = {left, right};
        }
    }
    CHECK(((best_split.first == t1 && best_split.second == t2) ||
           (best_split.first == t2 && best_split.second == t1)));

    for (auto method : {CommunityMethod::greedy_modularity, CommunityMethod::girvan_newman}) {
        CommunityPartition p = detect_communities(g, method);
        REQUIRE(p.communities.size() == 2);
        CHECK(((p.communities[0] == t1 && p.communities[1] == t2) ||
               (p.communities[0] == t2 && p.communities[1] == t1)));
        CHECK(p.modularity == doctest::Approx(5.0 / 14.0).epsilon(1e-12));
    }
}

TEST_CASE("communities never span components") {
    KnowledgeGraph g = build_from_triples({
        {"a", "r", "b", ""}, {"b", "r", "c", ""}, {"c", "r", "a", ""},
        {"x", "r", "y", ""}, {"y", "r", "z", ""}, {"z", "r", "x", ""},
    });
    for (auto method : {CommunityMethod::greedy_modularity, CommunityMethod::girvan_newman}) {
        CommunityPartition p = detect_communities(g, method);
        auto components = connected_components(g);
        for (const auto& community : p.communities) {
            bool inside_one = false;
            for (const auto& comp : components) {
                bool all = std::all_of(community.begin(), community.end(),
                                       [&](NodeId id) { return comp.count(id) > 0; });
                if (all) inside_one = true;
            }
            CHECK(inside_one);
        }
    }
}

TEST_CASE("girvan_newman rejects oversized graphs") {
    KnowledgeGraph g = kgtest::random_graph(2001, 100, 5);
    CHECK_THROWS_AS(detect_communities(g, CommunityMethod::girvan_newman), Error);
}

TEST_CASE("greedy partition is single-move optimal at termination") {
    for (unsigned seed = 0; seed < 4; ++seed) {
        KnowledgeGraph g = kgtest::random_connected_graph(30 + 5 * seed, 25, seed);
        CommunityPartition p = detect_communities(g, CommunityMethod::greedy_modularity);
        double q = modularity(g, p.communities);
        CHECK(p.modularity == doctest::Approx(q).epsilon(1e-12));

        for (const auto& [v, rec] : g.nodes()) {
            std::size_t home = 0;
            for (std::size_t c = 0; c < p.communities.size(); ++c)
                if (p.communities[c].count(v)) home = c;
            for (std::size_t c = 0; c < p.communities.size(); ++c) {
                if (c == home) continue;
                auto moved = p.communities;
                moved[home].erase(v);
                moved[c].insert(v);
                if (moved[home].empty()) moved.erase(moved.begin() + home);
                CHECK(modularity(g, moved) <= q + 1e-12);
            }
        }
    }
}

TEST_CASE("community report") {
    // two disjoint triangles as two communities
    KnowledgeGraph g = build_from_triples({
        {"a", "r", "b", ""}, {"b", "r", "c", ""}, {"c", "r", "a", ""},
        {"x", "r", "y", ""}, {"y", "r", "z", ""}, {"z", "r", "x", ""},
    });
    CommunityPartition p = detect_communities(g);
    REQUIRE(p.communities.size() == 2);
    CommunityReport report = community_report(g, p);
    CHECK(report.avg_intra_edges == 3.0);
    CHECK(report.avg_inter_edges == 0.0);
    std::size_t total = 0;
    for (const auto& c : report.communities) total += c.size;
    CHECK(total == g.node_count());

    // singleton communities: intra 0, inter = E (explicit classification oracle)
    std::vector<std::set<NodeId>> singletons;
    for (const auto& [id, rec] : g.nodes()) singletons.push_back({id});
    CommunityReport singles = community_report(g, {singletons, 0.0});
    CHECK(singles.intra_edges_total == 0);
    CHECK(singles.inter_edges_total == std::int64_t(g.edge_count()));

    // intra + inter always sums to E
    for (unsigned seed = 0; seed < 4; ++seed) {
        KnowledgeGraph r = kgtest::random_graph(25, 40, seed);
        CommunityPartition rp = detect_communities(r);
        CommunityReport rr = community_report(r, rp);
        CHECK(rr.intra_edges_total + rr.inter_edges_total == std::int64_t(r.edge_count()));
    }
}

TEST_CASE("cluster report") {
    KnowledgeGraph g;
    for (int i = 0; i < 10; ++i) g.add_node("alpha " + std::to_string(i));
    for (int i = 0; i < 10; ++i) g.add_node("beta " + std::to_string(i));

    HashEmbeddingProvider provider(8);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> noise(0.0, 0.01);
    for (const auto& [id, rec] : g.nodes()) {
        EmbeddingVector v = EmbeddingVector::Zero(8);
        v[rec.label[0] == 'a' ? 0 : 1] = 1.0;
        for (int d = 0; d < 8; ++d) v[d] += noise(rng);
        provider.set_override(rec.label, v);
    }
    NodeEmbeddingIndex index = embed_nodes(g, provider);

    ClusterReport one = cluster_report(index, 1);
    REQUIRE(one.clusters.size() == 1);
    CHECK(one.clusters[0].members.size() == 20);
    CHECK(one.clusters[0].nearest_labels.size() == 10);

    ClusterReport two = cluster_report(index, 2);
    REQUIRE(two.clusters.size() == 2);
    for (const auto& cluster : two.clusters) {
        REQUIRE(cluster.members.size() == 10);
        char prefix = index.entries().at(cluster.members[0]).label[0];
        for (NodeId id : cluster.members)
            CHECK(index.entries().at(id).label[0] == prefix);
    }

    std::size_t covered = 0;
    for (const auto& cluster : two.clusters) covered += cluster.members.size();
    CHECK(covered == index.size());

    CHECK_THROWS_AS(cluster_report(index, 21), Error);
}
