#include "cidx/scoring.hpp"

#include "cidx/error.hpp"
#include "cidx/normalize.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <unordered_map>

namespace cidx {

const char* to_string(MissingPolicy p) noexcept {
    switch (p) {
        case MissingPolicy::fail: return "fail";
        case MissingPolicy::reweight: return "reweight";
        case MissingPolicy::zero_fill: return "zero_fill";
    }
    return "reweight";
}

const char* to_string(InputMode m) noexcept {
    return m == InputMode::pre_normalized ? "pre_normalized" : "raw_values";
}

MissingPolicy parse_policy(std::string_view s) {
    if (s == "fail") return MissingPolicy::fail;
    if (s == "reweight") return MissingPolicy::reweight;
    if (s == "zero_fill") return MissingPolicy::zero_fill;
    throw Error(ErrorKind::invalid_value, fmt::format("unknown missing-data policy '{}'", s));
}

InputMode parse_mode(std::string_view s) {
    if (s == "raw_values") return InputMode::raw_values;
    if (s == "pre_normalized") return InputMode::pre_normalized;
    throw Error(ErrorKind::invalid_value, fmt::format("unknown input mode '{}'", s));
}

const NodeScore* ScoreCard::find(std::string_view node_id) const {
    auto it = node_scores.find(std::string(node_id));
    return it == node_scores.end() ? nullptr : &it->second;
}

double normalize_value(double value, const AnchorPair& anchors, Direction direction) {
    if (!std::isfinite(value))
        throw Error(ErrorKind::invalid_value, fmt::format("observation value {} is not finite", value));
    return normalize_value<double>(value, anchors.low, anchors.high, direction);
}

NodeScore aggregate_node(const IndicatorNode& node, std::span<const ChildScore> children, MissingPolicy policy) {
    if (children.size() != node.children().size())
        throw Error(ErrorKind::contract,
                    fmt::format("node '{}' has {} children, got {} child scores", node.id,
                                node.children().size(), children.size()),
                    node.id);

    double weighted = 0.0;
    double present_weight = 0.0;
    double coverage = 0.0;
    std::size_t present = 0;
    for (const ChildScore& c : children) {
        if (!c.score) {
            if (policy == MissingPolicy::fail)
                throw Error(ErrorKind::missing_indicator,
                            fmt::format("missing indicator '{}' beneath '{}'", c.id, node.id), c.id);
            continue;
        }
        weighted += c.weight * *c.score;
        present_weight += c.weight;
        coverage += c.weight * c.coverage;
        ++present;
    }

    double score = weighted;
    if (present < children.size() && policy == MissingPolicy::reweight) {
        if (present == 0)
            throw Error(ErrorKind::no_data, fmt::format("no data beneath node '{}'", node.id), node.id);
        score = weighted / present_weight;
    }
    score = std::clamp(score, 0.0, kScale);
    return NodeScore{node.id, score, node.weight * score, std::clamp(coverage, 0.0, 1.0)};
}

namespace {

struct Scorer {
    const IndicatorTree& tree;
    const ScoringOptions& options;
    const std::unordered_map<std::string, double>& inputs;
    ScoreCard& card;

    std::optional<NodeScore> eval(const IndicatorNode& node, bool is_root) {
        if (auto it = inputs.find(node.id); it != inputs.end()) {
            double score = it->second;
            if (options.mode == InputMode::raw_values)
                score = normalize_value(score, node.leaf().anchors, node.leaf().direction);
            NodeScore ns{node.id, score, node.weight * score, 1.0};
            card.node_scores.emplace(node.id, ns);
            return ns;
        }
        if (node.is_leaf())
            return std::nullopt;

        std::vector<ChildScore> kids;
        kids.reserve(node.children().size());
        bool any = false;
        for (const auto& c : node.children()) {
            auto r = eval(c, false);
            any = any || r.has_value();
            if (r)
                kids.push_back({c.id, c.weight, r->score, r->coverage});
            else
                kids.push_back({c.id, c.weight, std::nullopt, 0.0});
        }
        if (!any && !is_root && options.policy != MissingPolicy::fail)
            return std::nullopt;

        NodeScore ns = aggregate_node(node, kids, options.policy);
        card.node_scores.emplace(node.id, ns);
        return ns;
    }
};

void reject_nested_inputs(const IndicatorNode& node, const std::unordered_map<std::string, double>& inputs,
                          const std::string* injected_ancestor) {
    const bool injected = inputs.count(node.id) > 0;
    if (injected && injected_ancestor)
        throw Error(ErrorKind::contract,
                    fmt::format("score for '{}' conflicts with a score injected at its ancestor '{}'", node.id,
                                *injected_ancestor),
                    node.id);
    const std::string* next = injected ? &node.id : injected_ancestor;
    for (const auto& c : node.children())
        reject_nested_inputs(c, inputs, next);
}

}  // namespace

ScoreCard score_entity(const IndicatorTree& tree, std::string_view entity_id,
                       std::span<const Observation> observations, const ScoringOptions& options) {
    ScoreCard card;
    card.entity_id = std::string(entity_id);
    card.policy_used = options.policy;
    card.tree_fingerprint = tree_fingerprint(tree);

    std::unordered_map<std::string, const IndicatorNode*> by_id;
    for (const IndicatorNode* n : nodes_preorder(tree))
        by_id.emplace(n->id, n);

    std::unordered_map<std::string, double> inputs;
    for (const Observation& obs : observations) {
        if (obs.entity_id != entity_id)
            throw Error(ErrorKind::contract,
                        fmt::format("observation for entity '{}' passed while scoring '{}'", obs.entity_id, entity_id),
                        obs.entity_id);
        auto it = by_id.find(obs.indicator_id);
        if (it == by_id.end())
            throw Error(ErrorKind::unknown_id, fmt::format("unknown indicator '{}'", obs.indicator_id),
                        obs.indicator_id);
        if (!std::isfinite(obs.value))
            throw Error(ErrorKind::invalid_value,
                        fmt::format("value for '{}' is not finite", obs.indicator_id), obs.indicator_id);
        if (options.mode == InputMode::raw_values && !it->second->is_leaf())
            throw Error(ErrorKind::unknown_id,
                        fmt::format("'{}' is not a leaf indicator; raw values attach to leaves only",
                                    obs.indicator_id),
                        obs.indicator_id);
        if (options.mode == InputMode::pre_normalized && (obs.value < 0.0 || obs.value > tree.scale))
            throw Error(ErrorKind::invalid_value,
                        fmt::format("pre-normalized score {} for '{}' is outside [0, 100]", obs.value,
                                    obs.indicator_id),
                        obs.indicator_id);
        auto [slot, inserted] = inputs.try_emplace(obs.indicator_id, obs.value);
        if (!inserted) {
            if (options.strict)
                throw Error(ErrorKind::duplicate,
                            fmt::format("duplicate observation ({}, {})", obs.entity_id, obs.indicator_id),
                            obs.indicator_id);
            slot->second = obs.value;
            card.warnings.push_back(
                fmt::format("duplicate observation ({}, {}): last value wins", obs.entity_id, obs.indicator_id));
        }
    }
    reject_nested_inputs(tree.root, inputs, nullptr);

    Scorer scorer{tree, options, inputs, card};
    const auto root = scorer.eval(tree.root, true);
    card.composite = root ? root->score : 0.0;
    return card;
}

std::vector<ScoreCard> score_all(const IndicatorTree& tree, std::span<const Observation> observations,
                                 const ScoringOptions& options) {
    std::vector<std::string> order;
    std::unordered_map<std::string, std::vector<Observation>> grouped;
    for (const Observation& o : observations) {
        auto [it, inserted] = grouped.try_emplace(o.entity_id);
        if (inserted)
            order.push_back(o.entity_id);
        it->second.push_back(o);
    }
    std::vector<ScoreCard> cards;
    cards.reserve(order.size());
    for (const auto& id : order)
        cards.push_back(score_entity(tree, id, grouped.at(id), options));
    return cards;
}

std::vector<DimensionContribution> dimension_contributions(const ScoreCard& card, const IndicatorTree& tree) {
    std::vector<DimensionContribution> out;
    for (const auto& d : tree.dimensions())
        if (const NodeScore* ns = card.find(d.id))
            out.push_back({d.id, ns->contribution});
    return out;
}

}  // namespace cidx
