#pragma once

#include "cidx/indicator_tree.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cidx {

struct Entity {
    std::string id;
    std::string name;
    std::optional<std::string> group;
};

struct Observation {
    std::string entity_id;
    std::string indicator_id;
    double value = 0.0;
    std::string period;  // carried, never interpreted
};

enum class MissingPolicy { fail, reweight, zero_fill };
enum class InputMode { raw_values, pre_normalized };

const char* to_string(MissingPolicy p) noexcept;
const char* to_string(InputMode m) noexcept;
MissingPolicy parse_policy(std::string_view s);
InputMode parse_mode(std::string_view s);

struct NodeScore {
    std::string node_id;
    double score = 0.0;         // [0, 100]
    double contribution = 0.0;  // node weight × score
    double coverage = 0.0;      // weight share of leaves with data beneath
};

struct ScoreCard {
    std::string entity_id;
    std::map<std::string, NodeScore> node_scores;  // only nodes with data
    double composite = 0.0;
    MissingPolicy policy_used = MissingPolicy::reweight;
    std::string tree_fingerprint;
    std::vector<std::string> warnings;

    const NodeScore* find(std::string_view node_id) const;
};

/// Input to aggregate_node, one entry per child in document order.
struct ChildScore {
    std::string id;
    double weight = 0.0;
    std::optional<double> score;
    double coverage = 1.0;
};

NodeScore aggregate_node(const IndicatorNode& node, std::span<const ChildScore> children,
                         MissingPolicy policy);

struct ScoringOptions {
    MissingPolicy policy = MissingPolicy::reweight;
    InputMode mode = InputMode::raw_values;
    bool strict = false;  // duplicate (entity, indicator) observations fail instead of last-wins
};

/// Scores one entity. Every observation must carry `entity_id`.
///
/// raw_values: observations name leaves and are normalized against their
/// anchors. pre_normalized: observations are scores in [0, 100] attached to
/// any node; an injected node is not descended into, so observations
/// beneath it are rejected.
///
/// Under reweight and zero_fill a subtree with no data at all is simply
/// absent from its parent; the root with no data is an error for reweight
/// and a zero composite for zero_fill.
ScoreCard score_entity(const IndicatorTree& tree, std::string_view entity_id,
                       std::span<const Observation> observations, const ScoringOptions& options = {});

/// Groups observations by entity (first-appearance order) and scores each.
std::vector<ScoreCard> score_all(const IndicatorTree& tree, std::span<const Observation> observations,
                                 const ScoringOptions& options = {});

struct DimensionContribution {
    std::string dimension_id;
    double contribution = 0.0;
};

/// Top-level contributions w_d × score_d in tree order; dimensions without
/// data are omitted.
std::vector<DimensionContribution> dimension_contributions(const ScoreCard& card, const IndicatorTree& tree);

}  // namespace cidx
