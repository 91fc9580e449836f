#include "kg/paths.hpp"

#include <algorithm>
#include <map>
#include <queue>

namespace kg {

std::optional<ReasoningPath> shortest_path(const KnowledgeGraph& g, NodeId source, NodeId target) {
    if (!g.has_node(source) || !g.has_node(target)) throw Error("shortest_path: unknown node");

    // hop distances to the target
    std::map<NodeId, int> dist;
    std::queue<NodeId> q;
    dist[target] = 0;
    q.push(target);
    while (!q.empty()) {
        NodeId cur = q.front();
        q.pop();
        for (NodeId nb : g.neighbors(cur)) {
            if (!dist.count(nb)) {
                dist[nb] = dist[cur] + 1;
                q.push(nb);
            }
        }
    }
    if (!dist.count(source)) return std::nullopt;

    // walk downhill choosing the smallest label at every step; this yields the
    // lexicographically smallest node-label sequence among shortest paths
    ReasoningPath path;
    NodeId cur = source;
    path.node_ids.push_back(cur);
    path.node_labels.push_back(g.node(cur).label);
    while (cur != target) {
        NodeId best = -1;
        for (NodeId nb : g.neighbors(cur)) {
            auto it = dist.find(nb);
            if (it == dist.end() || it->second != dist.at(cur) - 1) continue;
            if (best < 0 || g.node(nb).label < g.node(best).label) best = nb;
        }
        const EdgeRecord* edge = g.find_edge(cur, best);
        path.relations.push_back(edge->relation);
        cur = best;
        path.node_ids.push_back(cur);
        path.node_labels.push_back(g.node(cur).label);
    }
    return path;
}

PathBundle find_paths(const KnowledgeGraph& g, const NodeEmbeddingIndex& index,
                      EmbeddingProvider& provider, const PathQuery& query,
                      double similarity_floor) {
    if (query.k < 1) throw Error("find_paths: k must be >= 1");
    if (g.node_count() == 0) throw Error("find_paths: empty graph");
    if (!index.covers(g)) throw Error("find_paths: index does not cover the graph");

    auto matches_for = [&](const std::string& term) {
        auto matches = match_nodes(index, term, query.k, provider);
        if (matches.empty() || matches.front().score <= similarity_floor)
            throw Error("find_paths: no node matches '" + term + "' above the similarity floor");
        return matches;
    };
    auto matches_a = matches_for(query.term_a);
    auto matches_b = matches_for(query.term_b);

    PathBundle bundle;
    bundle.query = query;
    for (int i = 0; i < static_cast<int>(matches_a.size()); ++i) {
        for (int j = 0; j < static_cast<int>(matches_b.size()); ++j) {
            auto path = shortest_path(g, matches_a[i].id, matches_b[j].id);
            if (!path) {
                bundle.missing_slots.emplace_back(i, j);
                continue;
            }
            path->rank_a = i;
            path->rank_b = j;
            path->score_a = matches_a[i].score;
            path->score_b = matches_b[j].score;
            bundle.paths.push_back(std::move(*path));
        }
    }
    if (!bundle.paths.empty()) {
        auto views = merge_paths(bundle.paths);
        bundle.separate_view = std::move(views.first);
        bundle.merged_view = std::move(views.second);
    }
    return bundle;
}

KnowledgeGraph expand_subgraph(const KnowledgeGraph& g, const std::vector<ReasoningPath>& paths,
                               int hops) {
    if (hops < 0 || hops > 2) throw Error("expand_subgraph: hops must be 0, 1 or 2");
    std::set<NodeId> nodes;
    for (const auto& path : paths) nodes.insert(path.node_ids.begin(), path.node_ids.end());
    std::set<NodeId> frontier = nodes;
    for (int h = 0; h < hops; ++h) {
        std::set<NodeId> next;
        for (NodeId id : frontier) {
            for (NodeId nb : g.neighbors(id)) {
                if (!nodes.count(nb)) next.insert(nb);
            }
        }
        nodes.insert(next.begin(), next.end());
        frontier = std::move(next);
    }
    return induced_subgraph(g, nodes);
}

std::pair<KnowledgeGraph, KnowledgeGraph> merge_paths(const std::vector<ReasoningPath>& paths) {
    if (paths.empty()) throw Error("merge_paths: need at least one path");
    KnowledgeGraph separate;
    KnowledgeGraph merged;
    for (const auto& path : paths) {
        std::string suffix =
            "#" + std::to_string(path.rank_a) + "-" + std::to_string(path.rank_b);
        NodeId prev_sep = separate.add_node(path.node_labels[0] + suffix);
        NodeId prev_merged = merged.add_node(path.node_labels[0]);
        for (std::size_t hop = 0; hop < path.relations.size(); ++hop) {
            NodeId next_sep = separate.add_node(path.node_labels[hop + 1] + suffix);
            separate.add_edge(prev_sep, next_sep, path.relations[hop]);
            NodeId next_merged = merged.add_node(path.node_labels[hop + 1]);
            if (!merged.find_edge(prev_merged, next_merged))
                merged.add_edge(prev_merged, next_merged, path.relations[hop]);
            prev_sep = next_sep;
            prev_merged = next_merged;
        }
    }
    return {std::move(separate), std::move(merged)};
}

std::string serialize_path(const ReasoningPath& path) {
    if (path.node_labels.empty()) throw Error("serialize_path: empty path");
    if (path.relations.size() + 1 != path.node_labels.size())
        throw Error("serialize_path: relation count does not match node count");
    std::string out = path.node_labels[0];
    for (std::size_t hop = 0; hop < path.relations.size(); ++hop) {
        out += " --> " + path.relations[hop] + " --> " + path.node_labels[hop + 1];
    }
    return out;
}

ContextDocument assemble_context(const PathBundle& bundle, const std::string& instruction) {
    if (bundle.paths.empty()) throw Error("assemble_context: bundle has no paths");

    // primary is (0,0) when present, otherwise the lowest (i+j, then i) pair
    std::size_t primary_idx = 0;
    for (std::size_t p = 1; p < bundle.paths.size(); ++p) {
        const auto& cur = bundle.paths[p];
        const auto& best = bundle.paths[primary_idx];
        int cur_key = cur.rank_a + cur.rank_b;
        int best_key = best.rank_a + best.rank_b;
        if (cur_key < best_key || (cur_key == best_key && cur.rank_a < best.rank_a))
            primary_idx = p;
    }

    ContextDocument doc;
    doc.term_a = bundle.query.term_a;
    doc.term_b = bundle.query.term_b;
    doc.instruction = instruction;
    const auto& primary = bundle.paths[primary_idx];
    doc.primary = {primary.rank_a, primary.rank_b, serialize_path(primary)};
    for (std::size_t p = 0; p < bundle.paths.size(); ++p) {
        if (p == primary_idx) continue;
        const auto& path = bundle.paths[p];
        doc.alternatives.push_back({path.rank_a, path.rank_b, serialize_path(path)});
    }
    return doc;
}

std::string render_context(const ContextDocument& doc) {
    std::string out =
        "You are given a set of information from a graph that describes the relationship "
        "between materials, structure, properties, and properties. You analyze these "
        "logically through reasoning.\n\n";
    out += "### Primary combination (path from " + std::to_string(doc.primary.rank_a) +
           " to " + std::to_string(doc.primary.rank_b) + "):\n\n";
    out += doc.primary.path_text + "\n\n";
    out += "This represents the main combination of nodes in the knowledge graph between " +
           doc.term_a + " and " + doc.term_b + ".\n";
    if (!doc.alternatives.empty()) {
        out += "\nThe following represent another possible combination of paths, providing "
               "different insights or complementing the primary path.\n";
        for (const auto& alt : doc.alternatives) {
            out += "\n### Alternative combination (path from " + std::to_string(alt.rank_a) +
                   " to " + std::to_string(alt.rank_b) + "):\n\n";
            out += alt.path_text + "\n";
        }
    }
    out += "\n" + doc.instruction + "\n";
    return out;
}

} // namespace kg
