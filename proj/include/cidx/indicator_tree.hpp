#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cidx {

/// Sibling weights must sum to one within this tolerance.
inline constexpr double kWeightSumTolerance = 1e-6;
inline constexpr double kScale = 100.0;

struct AnchorPair {
    double low = 0.0;
    double high = 0.0;
};

enum class Direction { higher_better, lower_better };

const char* to_string(Direction d) noexcept;

struct IndicatorNode;

struct Branch {
    std::vector<IndicatorNode> children;
};

struct Leaf {
    AnchorPair anchors;
    Direction direction = Direction::higher_better;
};

struct IndicatorNode {
    std::string id;
    std::string name;
    double weight = 1.0;
    std::variant<Branch, Leaf> body;

    bool is_leaf() const noexcept { return std::holds_alternative<Leaf>(body); }
    const Leaf& leaf() const { return std::get<Leaf>(body); }
    const std::vector<IndicatorNode>& children() const;
};

/// The root is the index itself; its children are the dimensions.
struct IndicatorTree {
    IndicatorNode root;
    double scale = kScale;

    const std::vector<IndicatorNode>& dimensions() const { return root.children(); }
};

struct Violation {
    std::string path;
    std::string kind;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const noexcept { return violations.empty(); }
};

/// Structural parse only: syntax errors and missing or mistyped fields
/// throw, rule violations (weight sums, anchors, ids) are left for
/// validate_tree.
IndicatorTree parse_tree_unchecked(std::string_view document);

/// parse_tree_unchecked followed by validate_tree; any violation throws a
/// semantic Error carrying every message.
IndicatorTree parse_tree(std::string_view document);

IndicatorTree load_tree_file(const std::string& path);

ValidationReport validate_tree(const IndicatorTree& tree);

/// Canonical JSON encoding; parse_tree(serialize_tree(t)) reproduces t.
std::string serialize_tree(const IndicatorTree& tree);

/// Stable hex digest of the canonical encoding. Scorecards carry it so
/// cards from different trees are never mixed.
std::string tree_fingerprint(const IndicatorTree& tree);

bool structurally_equal(const IndicatorNode& a, const IndicatorNode& b);

struct WeightedLeaf {
    std::string id;
    double effective_weight = 0.0;
};

/// Leaves in depth-first document order with the product of weights along
/// the root-to-leaf path.
std::vector<WeightedLeaf> flatten_leaves(const IndicatorTree& tree);

/// nullptr when no node carries `id`.
const IndicatorNode* find_node(const IndicatorTree& tree, std::string_view id);

/// Depth-first pre-order list of every node (root first).
std::vector<const IndicatorNode*> nodes_preorder(const IndicatorTree& tree);

Eigen::VectorXd dimension_weights(const IndicatorTree& tree);

std::vector<std::string> dimension_ids(const IndicatorTree& tree);

}  // namespace cidx
