#include "cidx/indicator_tree.hpp"

#include "cidx/error.hpp"

#include <json.hpp>
#include <fmt/format.h>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace cidx {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const json& require(const json& obj, const char* key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end())
        throw Error(ErrorKind::semantic, fmt::format("{}: missing field '{}'", path, key), path);
    return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_string())
        throw Error(ErrorKind::semantic, fmt::format("{}: field '{}' must be a string", path, key), path);
    return v.get<std::string>();
}

double require_number(const json& obj, const char* key, const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_number())
        throw Error(ErrorKind::semantic, fmt::format("{}: field '{}' must be a number", path, key), path);
    return v.get<double>();
}

IndicatorNode parse_node(const json& j, const std::string& path) {
    if (!j.is_object())
        throw Error(ErrorKind::semantic, fmt::format("{}: node must be an object", path), path);

    IndicatorNode node;
    node.id = require_string(j, "id", path);
    node.name = require_string(j, "name", path);
    node.weight = require_number(j, "weight", path);

    const bool has_children = j.contains("children");
    const bool has_anchors = j.contains("anchors");
    if (has_children == has_anchors)
        throw Error(ErrorKind::semantic,
                    fmt::format("{}: node needs exactly one of 'children' or 'anchors'", path), path);

    if (has_children) {
        const json& kids = j.at("children");
        if (!kids.is_array())
            throw Error(ErrorKind::semantic, fmt::format("{}: 'children' must be an array", path), path);
        Branch branch;
        branch.children.reserve(kids.size());
        for (std::size_t i = 0; i < kids.size(); ++i)
            branch.children.push_back(parse_node(kids[i], fmt::format("{}.children[{}]", path, i)));
        node.body = std::move(branch);
        if (j.contains("direction"))
            throw Error(ErrorKind::semantic, fmt::format("{}: 'direction' is only valid on leaves", path), path);
        return node;
    }

    const json& anchors = j.at("anchors");
    const std::string apath = path + ".anchors";
    if (!anchors.is_object())
        throw Error(ErrorKind::semantic, fmt::format("{}: must be an object", apath), apath);
    Leaf leaf;
    leaf.anchors.low = require_number(anchors, "low", apath);
    leaf.anchors.high = require_number(anchors, "high", apath);
    if (auto it = j.find("direction"); it != j.end()) {
        if (!it->is_string())
            throw Error(ErrorKind::semantic, fmt::format("{}: 'direction' must be a string", path), path);
        const auto d = it->get<std::string>();
        if (d == "higher_better")
            leaf.direction = Direction::higher_better;
        else if (d == "lower_better")
            leaf.direction = Direction::lower_better;
        else
            throw Error(ErrorKind::semantic, fmt::format("{}: unknown direction '{}'", path, d), path);
    }
    node.body = leaf;
    return node;
}

ordered_json encode_node(const IndicatorNode& node) {
    ordered_json j;
    j["id"] = node.id;
    j["name"] = node.name;
    j["weight"] = node.weight;
    if (node.is_leaf()) {
        const Leaf& leaf = node.leaf();
        j["anchors"] = {{"low", leaf.anchors.low}, {"high", leaf.anchors.high}};
        j["direction"] = to_string(leaf.direction);
    } else {
        ordered_json kids = ordered_json::array();
        for (const auto& c : node.children())
            kids.push_back(encode_node(c));
        j["children"] = std::move(kids);
    }
    return j;
}

void check_node(const IndicatorNode& node, const std::string& path, std::set<std::string>& seen,
                std::vector<Violation>& out) {
    if (node.id.empty())
        out.push_back({path, "empty id", "node id must be nonempty"});
    else if (!seen.insert(node.id).second)
        out.push_back({path, "duplicate id", fmt::format("id '{}' appears more than once", node.id)});

    if (!std::isfinite(node.weight) || node.weight <= 0.0 || node.weight > 1.0)
        out.push_back({path, "invalid weight", fmt::format("weight {} is outside (0, 1]", node.weight)});

    if (node.is_leaf()) {
        const AnchorPair& a = node.leaf().anchors;
        if (!std::isfinite(a.low) || !std::isfinite(a.high))
            out.push_back({path, "non-finite anchors", "anchors must be finite"});
        else if (!(a.low < a.high))
            out.push_back({path, "degenerate anchors",
                           fmt::format("anchor low {} must be strictly below high {}", a.low, a.high)});
        return;
    }

    const auto& kids = node.children();
    if (kids.empty()) {
        out.push_back({path, "empty branch", "branch has no children"});
        return;
    }
    double sum = 0.0;
    for (const auto& c : kids)
        sum += c.weight;
    if (!(std::abs(sum - 1.0) <= kWeightSumTolerance))
        out.push_back({path, "weight sum",
                       fmt::format("children of '{}' have weights summing to {} (expected 1)", node.id, sum)});
    for (const auto& c : kids)
        check_node(c, path + "/" + c.id, seen, out);
}

}  // namespace

const char* to_string(Direction d) noexcept {
    return d == Direction::lower_better ? "lower_better" : "higher_better";
}

const std::vector<IndicatorNode>& IndicatorNode::children() const {
    static const std::vector<IndicatorNode> none;
    if (const auto* b = std::get_if<Branch>(&body))
        return b->children;
    return none;
}

IndicatorTree parse_tree_unchecked(std::string_view document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::syntax, fmt::format("malformed document: {}", e.what()), "");
    }
    if (!doc.is_object())
        throw Error(ErrorKind::semantic, "document must be an object", "$");
    const json& index = require(doc, "index", "$");
    if (!index.is_object())
        throw Error(ErrorKind::semantic, "'index' must be an object", "index");

    IndicatorTree tree;
    tree.root.id = require_string(index, "id", "index");
    tree.root.name = require_string(index, "name", "index");
    tree.root.weight = 1.0;
    tree.scale = require_number(index, "scale", "index");

    const json& dims = require(index, "dimensions", "index");
    if (!dims.is_array())
        throw Error(ErrorKind::semantic, "index: 'dimensions' must be an array", "index");
    Branch branch;
    for (std::size_t i = 0; i < dims.size(); ++i)
        branch.children.push_back(parse_node(dims[i], fmt::format("index.dimensions[{}]", i)));
    tree.root.body = std::move(branch);
    return tree;
}

IndicatorTree parse_tree(std::string_view document) {
    IndicatorTree tree = parse_tree_unchecked(document);
    const ValidationReport report = validate_tree(tree);
    if (!report.ok()) {
        std::string msg = "invalid indicator tree:";
        for (const auto& v : report.violations)
            msg += fmt::format("\n  {}: {}: {}", v.path, v.kind, v.message);
        throw Error(ErrorKind::semantic, msg, report.violations.front().path);
    }
    return tree;
}

IndicatorTree load_tree_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::io, fmt::format("cannot open tree file '{}': file not found or unreadable", path), path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_tree(buf.str());
}

ValidationReport validate_tree(const IndicatorTree& tree) {
    ValidationReport report;
    if (tree.scale != kScale)
        report.violations.push_back({tree.root.id, "scale", fmt::format("scale must be 100, got {}", tree.scale)});
    if (tree.root.weight != 1.0)
        report.violations.push_back({tree.root.id, "root weight", "root weight must be 1"});
    if (tree.root.is_leaf())
        report.violations.push_back({tree.root.id, "root leaf", "the index root must hold dimensions"});
    std::set<std::string> seen;
    check_node(tree.root, tree.root.id, seen, report.violations);
    return report;
}

std::string serialize_tree(const IndicatorTree& tree) {
    ordered_json index;
    index["id"] = tree.root.id;
    index["name"] = tree.root.name;
    index["scale"] = tree.scale;
    ordered_json dims = ordered_json::array();
    for (const auto& d : tree.root.children())
        dims.push_back(encode_node(d));
    index["dimensions"] = std::move(dims);
    ordered_json doc;
    doc["index"] = std::move(index);
    return doc.dump(2) + "\n";
}

std::string tree_fingerprint(const IndicatorTree& tree) {
    // FNV-1a over the canonical encoding.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : serialize_tree(tree)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

bool structurally_equal(const IndicatorNode& a, const IndicatorNode& b) {
    if (a.id != b.id || a.name != b.name || a.weight != b.weight || a.is_leaf() != b.is_leaf())
        return false;
    if (a.is_leaf()) {
        const Leaf& la = a.leaf();
        const Leaf& lb = b.leaf();
        return la.anchors.low == lb.anchors.low && la.anchors.high == lb.anchors.high &&
               la.direction == lb.direction;
    }
    const auto& ca = a.children();
    const auto& cb = b.children();
    if (ca.size() != cb.size())
        return false;
    for (std::size_t i = 0; i < ca.size(); ++i)
        if (!structurally_equal(ca[i], cb[i]))
            return false;
    return true;
}

std::vector<WeightedLeaf> flatten_leaves(const IndicatorTree& tree) {
    if (!validate_tree(tree).ok())
        throw Error(ErrorKind::contract, "flatten_leaves requires a valid tree", tree.root.id);
    std::vector<WeightedLeaf> out;
    std::function<void(const IndicatorNode&, double)> walk = [&](const IndicatorNode& n, double w) {
        if (n.is_leaf()) {
            out.push_back({n.id, w});
            return;
        }
        for (const auto& c : n.children())
            walk(c, w * c.weight);
    };
    walk(tree.root, tree.root.weight);
    return out;
}

const IndicatorNode* find_node(const IndicatorTree& tree, std::string_view id) {
    for (const IndicatorNode* n : nodes_preorder(tree))
        if (n->id == id)
            return n;
    return nullptr;
}

std::vector<const IndicatorNode*> nodes_preorder(const IndicatorTree& tree) {
    std::vector<const IndicatorNode*> out;
    std::function<void(const IndicatorNode&)> walk = [&](const IndicatorNode& n) {
        out.push_back(&n);
        for (const auto& c : n.children())
            walk(c);
    };
    walk(tree.root);
    return out;
}

Eigen::VectorXd dimension_weights(const IndicatorTree& tree) {
    const auto& dims = tree.dimensions();
    Eigen::VectorXd w(static_cast<Eigen::Index>(dims.size()));
    for (std::size_t i = 0; i < dims.size(); ++i)
        w(static_cast<Eigen::Index>(i)) = dims[i].weight;
    return w;
}

std::vector<std::string> dimension_ids(const IndicatorTree& tree) {
    std::vector<std::string> ids;
    for (const auto& d : tree.dimensions())
        ids.push_back(d.id);
    return ids;
}

}  // namespace cidx
