#include "splitree/tree.hpp"

#include <algorithm>
#include <cmath>

namespace splitree {

namespace {

// substream labels
constexpr std::uint64_t kRootTag = 0x526f6f74;  // node address chain
constexpr std::uint64_t kItemTag = 0x4974656d;  // per-item insertion stream
constexpr std::uint64_t kGrowTag = 0x47726f77;
constexpr std::uint64_t kIncrTag = 0x496e6372;

void split_into(std::int64_t n_v, const std::vector<double>& draw, const SplitParams& p,
                RngStream& rng, std::vector<std::int64_t>& out) {
    const std::int64_t trials = n_v - p.s0 - static_cast<std::int64_t>(p.b) * p.s1;
    multinomial(rng, trials, draw, out);
    if (p.s1 > 0)
        for (auto& k : out) k += p.s1;
}

}  // namespace

std::vector<std::int64_t> split_cardinalities(std::int64_t n_v,
                                              const std::vector<double>& draw,
                                              const SplitParams& params, RngStream& rng) {
    params.validate();
    if (n_v <= params.s)
        throw std::invalid_argument("split_cardinalities: node is not over capacity");
    validate_split_draw(draw, params.b);
    std::vector<std::int64_t> out;
    split_into(n_v, draw, params, rng, out);
    return out;
}

void grow_size_tree_into(TreeWorkspace& ws, std::int64_t n, const ModelSpec& model,
                         std::uint64_t seed, bool annotate_lengths) {
    if (n < 0) throw std::invalid_argument("grow_size_tree: n < 0");
    const SplitParams& p = model.params;
    ws.tree.nodes.clear();
    ws.tree.lengths.clear();
    ws.stack.clear();
    if (n == 0) return;

    ws.tree.nodes.push_back({n, -1, 0});
    if (annotate_lengths) ws.tree.lengths.push_back(1.0);
    ws.stack.push_back({0, mix64(mix64(seed, kGrowTag), kRootTag)});

    while (!ws.stack.empty()) {
        const auto [idx, node_seed] = ws.stack.back();
        ws.stack.pop_back();
        const std::int64_t count = ws.tree.nodes[idx].count;
        if (count <= p.s) continue;  // leaf

        RngStream rng(node_seed);
        model.draw(rng, ws.draw);
        split_into(count, ws.draw, p, rng, ws.counts);

        const auto first = static_cast<std::int32_t>(ws.tree.nodes.size());
        std::int32_t created = 0;
        const double plen = annotate_lengths ? ws.tree.lengths[idx] : 0.0;
        for (int slot = 0; slot < p.b; ++slot) {
            if (ws.counts[slot] == 0) continue;  // never materialized
            ws.tree.nodes.push_back({ws.counts[slot], -1, 0});
            if (annotate_lengths) ws.tree.lengths.push_back(plen * ws.draw[slot]);
            ++created;
        }
        ws.tree.nodes[idx].first_child = first;
        ws.tree.nodes[idx].num_children = created;
        // push right-to-left so children are processed left-to-right
        std::int32_t child = first + created;
        for (int slot = p.b; slot-- > 0;) {
            if (ws.counts[slot] == 0) continue;
            --child;
            ws.stack.push_back({child, mix64(node_seed, static_cast<std::uint64_t>(slot) + 1)});
        }
    }
}

SizeTree grow_size_tree(std::int64_t n, const ModelSpec& model, std::uint64_t seed,
                        bool annotate_lengths) {
    TreeWorkspace ws;
    grow_size_tree_into(ws, n, model, seed, annotate_lengths);
    return std::move(ws.tree);
}

std::int64_t path_length_items(const SizeTree& tree) {
    std::int64_t psi = 0;
    for (std::size_t i = 1; i < tree.nodes.size(); ++i) psi += tree.nodes[i].count;
    return psi;
}

std::int64_t path_length_nodes(const SizeTree& tree) {
    if (tree.nodes.size() <= 1) return 0;
    // children come after parents, so a reverse sweep aggregates subtree
    // node counts in one pass
    std::vector<std::int64_t> sub(tree.nodes.size(), 1);
    std::int64_t upsilon = 0;
    for (std::size_t i = tree.nodes.size(); i-- > 0;) {
        const auto& nd = tree.nodes[i];
        for (std::int32_t c = 0; c < nd.num_children; ++c) sub[i] += sub[nd.first_child + c];
        if (i > 0) upsilon += sub[i];
    }
    return upsilon;
}

std::int64_t ItemTree::sum_item_depths() const {
    std::int64_t s = 0;
    for (const auto node : item_node) s += nodes[node].depth;
    return s;
}

std::int64_t ItemTree::path_length_items() const {
    std::int64_t s = 0;
    for (std::size_t i = 1; i < nodes.size(); ++i) s += nodes[i].count;
    return s;
}

namespace {

struct IncrementalBuilder {
    const ModelSpec& model;
    std::uint64_t tree_seed;
    std::int64_t round_cap;
    ItemTree t;
    std::vector<double> vbuf;
    std::vector<std::int32_t> group;  // scratch item lists during overflow

    IncrementalBuilder(const ModelSpec& m, std::uint64_t seed, std::int64_t cap)
        : model(m), tree_seed(seed), round_cap(cap) {
        t.branch = m.params.b;
    }

    std::int32_t make_node(std::int32_t parent, int slot) {
        const auto idx = static_cast<std::int32_t>(t.nodes.size());
        ItemTree::Node nd;
        if (parent < 0) {
            nd.seed = mix64(mix64(tree_seed, kIncrTag), kRootTag);
            nd.parent = -1;
            nd.depth = 0;
        } else {
            nd.seed = mix64(t.nodes[parent].seed, static_cast<std::uint64_t>(slot) + 1);
            nd.parent = parent;
            nd.depth = t.nodes[parent].depth + 1;
            t.nodes[parent].children[slot] = idx;
        }
        nd.count = 0;
        nd.children.assign(model.params.b, -1);
        t.nodes.push_back(std::move(nd));
        return idx;
    }

    void node_vector(std::int32_t idx) {
        RngStream rng(t.nodes[idx].seed);
        model.draw(rng, vbuf);
    }

    std::int32_t child_by_probability(double u) const {
        double acc = 0.0;
        for (int slot = 0; slot + 1 < model.params.b; ++slot) {
            acc += vbuf[slot];
            if (u < acc) return slot;
        }
        return model.params.b - 1;
    }

    void place(std::int32_t node, std::int32_t item) {
        t.nodes[node].items.push_back(item);
        t.item_node[item] = node;
    }

    // uniform without-replacement pick of `take` entries, moved to the front
    void pick_front(std::vector<std::int32_t>& v, int take, RngStream& rng) {
        for (int i = 0; i < take; ++i) {
            const auto j = i + static_cast<std::int32_t>(rng.uniform_index(v.size() - i));
            std::swap(v[i], v[j]);
        }
    }

    void insert(std::int32_t item) {
        RngStream irng = RngStream::derived(mix64(tree_seed, kIncrTag), kItemTag,
                                            static_cast<std::uint64_t>(item));
        if (t.nodes.empty()) make_node(-1, 0);
        std::int32_t cur = 0;
        // trickle down until a node with all children empty
        for (;;) {
            t.nodes[cur].count += 1;
            bool leaf = true;
            for (auto c : t.nodes[cur].children)
                if (c >= 0) {
                    leaf = false;
                    break;
                }
            if (leaf) break;
            node_vector(cur);
            const int slot = child_by_probability(irng.u01());
            std::int32_t next = t.nodes[cur].children[slot];
            if (next < 0) next = make_node(cur, slot);
            cur = next;
        }

        const int s = model.params.s, s0 = model.params.s0, s1 = model.params.s1;
        const int b = model.params.b;
        if (static_cast<std::int64_t>(t.nodes[cur].items.size()) < s) {
            place(cur, item);
            return;
        }

        // overflow: cur holds s items plus the new one
        group = t.nodes[cur].items;
        group.push_back(item);
        t.nodes[cur].items.clear();
        std::int64_t rounds = 0;
        for (;;) {
            if (++rounds > round_cap)
                throw NonTerminatingRedistribution(
                    "build_incremental: overflow redistribution exceeded " +
                    std::to_string(round_cap) + " rounds (degenerate split law?)");
            // s0 randomly chosen items remain
            pick_front(group, s0, irng);
            for (int i = 0; i < s0; ++i) place(cur, group[i]);
            group.erase(group.begin(), group.begin() + s0);

            // each child receives s1 items chosen at random
            std::vector<std::int32_t> dest(group.size(), -1);
            pick_front(group, b * s1, irng);
            for (int j = 0; j < b * s1; ++j) dest[j] = j / s1;
            // the rest choose children independently with probabilities V_i
            node_vector(cur);
            for (std::size_t j = b * s1; j < group.size(); ++j)
                dest[j] = child_by_probability(irng.u01());

            if (s0 == 0 && s1 == 0 && !group.empty()) {
                const bool all_same =
                    std::all_of(dest.begin(), dest.end(), [&](int d) { return d == dest[0]; });
                if (all_same) {
                    // every item at one child: descend and repeat there
                    std::int32_t next = t.nodes[cur].children[dest[0]];
                    if (next < 0) next = make_node(cur, dest[0]);
                    t.nodes[next].count += static_cast<std::int64_t>(group.size());
                    cur = next;
                    continue;
                }
            }
            for (std::size_t j = 0; j < group.size(); ++j) {
                std::int32_t next = t.nodes[cur].children[dest[j]];
                if (next < 0) next = make_node(cur, dest[j]);
                t.nodes[next].count += 1;
                place(next, group[j]);
            }
            return;
        }
    }
};

}  // namespace

ItemTree build_incremental(std::int64_t n, const ModelSpec& model, std::uint64_t seed,
                           std::int64_t max_redistribution_rounds) {
    if (n < 0) throw std::invalid_argument("build_incremental: n < 0");
    IncrementalBuilder builder(model, seed, max_redistribution_rounds);
    builder.t.item_node.assign(n, -1);
    for (std::int32_t i = 0; i < n; ++i) builder.insert(i);
    return std::move(builder.t);
}

int sample_last_depth(std::int64_t n, const ModelSpec& model, std::uint64_t seed,
                      std::int64_t max_redistribution_rounds) {
    if (n < 1) throw std::invalid_argument("sample_last_depth: n < 1");
    const SplitParams& p = model.params;
    RngStream rng(mix64(seed, 0xDeA7));
    std::vector<double> v;
    std::int64_t size = n - 1;  // items already in the subtree along the path
    int depth = 0;
    // descend through internal nodes of T^{n-1}
    while (size > p.s) {
        model.draw(rng, v);
        const double u = rng.u01();
        double acc = 0.0;
        int slot = p.b - 1;
        for (int i = 0; i + 1 < p.b; ++i) {
            acc += v[i];
            if (u < acc) {
                slot = i;
                break;
            }
        }
        const std::int64_t trials = size - p.s0 - static_cast<std::int64_t>(p.b) * p.s1;
        size = p.s1 + binomial(rng, trials, v[slot]);
        ++depth;
    }
    if (size < p.s) return depth;  // room at the leaf

    // landing leaf holds exactly s items; run the overflow for the new item
    std::int64_t rounds = 0;
    for (;;) {
        if (++rounds > max_redistribution_rounds)
            throw NonTerminatingRedistribution(
                "sample_last_depth: overflow redistribution exceeded cap");
        // stays with probability s0/(s+1)
        if (rng.u01() * (p.s + 1) < p.s0) return depth;
        if (p.s0 != 0 || p.s1 != 0) return depth + 1;  // moves exactly one level
        // s0 = s1 = 0: all s+1 items choose children; repeat while they stay
        // together with the new item
        model.draw(rng, v);
        const double u = rng.u01();
        double acc = 0.0;
        int mine = p.b - 1;
        for (int i = 0; i + 1 < p.b; ++i) {
            acc += v[i];
            if (u < acc) {
                mine = i;
                break;
            }
        }
        bool together = true;
        for (int j = 0; j < p.s; ++j) {
            const double uj = rng.u01();
            double a2 = 0.0;
            int slot = p.b - 1;
            for (int i = 0; i + 1 < p.b; ++i) {
                a2 += v[i];
                if (uj < a2) {
                    slot = i;
                    break;
                }
            }
            if (slot != mine) together = false;
        }
        ++depth;
        if (!together) return depth;
    }
}

EquivalenceSample construction_equivalence_sample(std::int64_t n, const ModelSpec& model,
                                                  std::int64_t replicas, std::uint64_t seed) {
    if (n < 1 || replicas < 1)
        throw std::invalid_argument("construction_equivalence_sample: n, replicas >= 1");
    EquivalenceSample out;
    out.recursive.reserve(replicas);
    out.incremental.reserve(replicas);
    TreeWorkspace ws;
    for (std::int64_t r = 0; r < replicas; ++r) {
        grow_size_tree_into(ws, n, model, mix64(seed, 0xA, static_cast<std::uint64_t>(r)));
        out.recursive.push_back(static_cast<double>(path_length_items(ws.tree)));
        const auto it =
            build_incremental(n, model, mix64(seed, 0xB, static_cast<std::uint64_t>(r)));
        out.incremental.push_back(static_cast<double>(it.sum_item_depths()));
    }
    return out;
}

}  // namespace splitree
