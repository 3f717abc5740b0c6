#pragma once

#include <cstdint>
#include <vector>

#include "splitree/model.hpp"

namespace splitree {

// Tree of subtree cardinalities n_u, optionally annotated with interval
// lengths L_u. Nodes are stored in DFS order (children contiguous, parent
// index < child index); nodes with n_u = 0 are never materialized.
struct SizeTree {
    struct Node {
        std::int64_t count;
        std::int32_t first_child;  // -1 for leaves
        std::int32_t num_children;
    };
    std::vector<Node> nodes;
    std::vector<double> lengths;  // parallel to nodes when annotated, else empty

    bool empty() const { return nodes.empty(); }
    bool annotated() const { return !lengths.empty(); }
};

// Reusable buffers so replica loops do not reallocate.
struct TreeWorkspace {
    SizeTree tree;
    std::vector<double> draw;
    std::vector<std::int64_t> counts;
    std::vector<std::int64_t> subtree_nodes;
    struct Frame {
        std::int32_t index;
        std::uint64_t seed;
    };
    std::vector<Frame> stack;
};

// Child cardinalities of a node: Mult(n_v - s0 - b*s1, draw) + (s1,...,s1).
// Requires n_v > s. Consumes exactly b-1 uniforms.
std::vector<std::int64_t> split_cardinalities(std::int64_t n_v,
                                              const std::vector<double>& draw,
                                              const SplitParams& params, RngStream& rng);

// Full recursive construction from cardinality n. Explicit work stack,
// per-node substreams keyed by the node's address, bit-identical for a given
// (model, seed) and independent of thread count.
SizeTree grow_size_tree(std::int64_t n, const ModelSpec& model, std::uint64_t seed,
                        bool annotate_lengths = false);
void grow_size_tree_into(TreeWorkspace& ws, std::int64_t n, const ModelSpec& model,
                         std::uint64_t seed, bool annotate_lengths = false);

// Psi = sum of n_u over non-root nodes (= sum of item depths).
std::int64_t path_length_items(const SizeTree& tree);

// Upsilon = sum over non-root nodes of the subtree node count (= sum of node
// depths).
std::int64_t path_length_nodes(const SizeTree& tree);

// Explicit item-level tree built by incremental insertion.
struct ItemTree {
    struct Node {
        std::uint64_t seed;
        std::int32_t parent;
        std::int32_t depth;
        std::int64_t count;                   // n_u
        std::vector<std::int32_t> children;   // slot -> node index, -1 absent
        std::vector<std::int32_t> items;      // 0-based labels stored here
    };
    std::vector<Node> nodes;
    std::vector<std::int32_t> item_node;  // item -> holding node
    int branch = 0;

    std::int64_t size() const { return static_cast<std::int64_t>(item_node.size()); }
    std::int32_t depth_of_item(std::int32_t i) const { return nodes[item_node[i]].depth; }
    std::int64_t sum_item_depths() const;
    std::int64_t path_length_items() const;  // sum of n_u over non-root nodes
};

// Incremental insertion of items 1..n per the trickle-down / overflow rules.
// Throws NonTerminatingRedistribution if one overflow exceeds the round cap.
ItemTree build_incremental(std::int64_t n, const ModelSpec& model, std::uint64_t seed,
                           std::int64_t max_redistribution_rounds = 1000000);

// Depth of the last inserted item, sampled by walking the insertion path with
// binomial child-size marginals; O(log n) and equal in law to the depth in
// build_incremental.
int sample_last_depth(std::int64_t n, const ModelSpec& model, std::uint64_t seed,
                      std::int64_t max_redistribution_rounds = 1000000);

// Paired Psi samples from the two constructions, for two-sample testing.
struct EquivalenceSample {
    std::vector<double> recursive;
    std::vector<double> incremental;
};
EquivalenceSample construction_equivalence_sample(std::int64_t n, const ModelSpec& model,
                                                  std::int64_t replicas, std::uint64_t seed);

}  // namespace splitree
