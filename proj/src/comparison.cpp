#include "cidx/comparison.hpp"

#include "cidx/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace cidx {

namespace {

constexpr double kFullCoverage = 1.0 - 1e-9;

const NodeScore& require_full(const ScoreCard& card, const std::string& dim) {
    const NodeScore* ns = card.find(dim);
    if (!ns || ns->coverage < kFullCoverage)
        throw Error(ErrorKind::incomplete_coverage,
                    fmt::format("entity '{}' lacks full data for dimension '{}'", card.entity_id, dim), dim);
    return *ns;
}

}  // namespace

std::vector<RankedEntity> rank_entities(std::span<const ScoreCard> cards) {
    if (cards.empty())
        throw Error(ErrorKind::contract, "rank_entities needs at least one scorecard");
    for (const auto& c : cards)
        if (c.tree_fingerprint != cards.front().tree_fingerprint)
            throw Error(ErrorKind::contract,
                        fmt::format("scorecard '{}' was produced against a different tree", c.entity_id),
                        c.entity_id);

    std::vector<RankedEntity> out;
    out.reserve(cards.size());
    for (const auto& c : cards)
        out.push_back({0, c.entity_id, c.composite});
    std::sort(out.begin(), out.end(), [](const RankedEntity& a, const RankedEntity& b) {
        if (a.composite != b.composite)
            return a.composite > b.composite;
        return a.entity_id < b.entity_id;
    });
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i].rank = (i > 0 && out[i].composite == out[i - 1].composite) ? out[i - 1].rank
                                                                          : static_cast<int>(i) + 1;
    return out;
}

GapReport gap_decompose(const ScoreCard& card_a, const ScoreCard& card_b, const IndicatorTree& tree) {
    GapReport report{card_a.entity_id, card_b.entity_id, {}, 0.0};
    for (const auto& d : tree.dimensions()) {
        const double ca = require_full(card_a, d.id).contribution;
        const double cb = require_full(card_b, d.id).contribution;
        report.per_dimension.push_back({d.id, ca, cb, ca - cb});
        report.total_gap += ca - cb;
    }
    return report;
}

std::vector<TierAssignment> assign_tiers(std::span<const RankedEntity> ranked, std::span<const double> thresholds) {
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (!std::isfinite(thresholds[i]))
            throw Error(ErrorKind::invalid_value, "tier thresholds must be finite");
        if (i > 0 && !(thresholds[i] < thresholds[i - 1]))
            throw Error(ErrorKind::invalid_value,
                        fmt::format("tier thresholds must be strictly descending ({} follows {})", thresholds[i],
                                    thresholds[i - 1]));
    }
    std::vector<TierAssignment> out;
    out.reserve(ranked.size());
    for (const auto& r : ranked) {
        const auto above = std::count_if(thresholds.begin(), thresholds.end(),
                                         [&](double t) { return t > r.composite; });
        out.push_back({r.entity_id, 1 + static_cast<int>(above), r.rank});
    }
    return out;
}

}  // namespace cidx
