#pragma once

#include "cidx/indicator_tree.hpp"
#include "cidx/scoring.hpp"

#include <span>
#include <string>
#include <vector>

namespace cidx {

struct RankedEntity {
    int rank = 1;
    std::string entity_id;
    double composite = 0.0;
};

/// Descending by composite with competition ranking ("1, 1, 3"); equal
/// composites are ordered by entity id.
std::vector<RankedEntity> rank_entities(std::span<const ScoreCard> cards);

struct DimensionGap {
    std::string dimension_id;
    double contribution_a = 0.0;
    double contribution_b = 0.0;
    double delta = 0.0;  // a − b
};

struct GapReport {
    std::string entity_a;
    std::string entity_b;
    std::vector<DimensionGap> per_dimension;
    double total_gap = 0.0;
};

/// Decomposes composite_a − composite_b into per-dimension contribution
/// deltas. Both cards need full coverage on every dimension.
GapReport gap_decompose(const ScoreCard& card_a, const ScoreCard& card_b, const IndicatorTree& tree);

struct TierAssignment {
    std::string entity_id;
    int tier = 1;
    int rank = 1;
};

/// tier = 1 + number of thresholds strictly above the composite, so an
/// entity sitting exactly on a cutoff lands in the better tier.
std::vector<TierAssignment> assign_tiers(std::span<const RankedEntity> ranked, std::span<const double> thresholds);

}  // namespace cidx
