#pragma once

#include "cidx/indicator_tree.hpp"
#include "cidx/scoring.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cidx {

struct PublishedValue {
    std::string entity_id;
    double composite = 0.0;
};

/// A published dimension contribution (weight × score) for one entity.
struct PublishedContribution {
    std::string entity_id;
    std::string dimension_id;
    double contribution = 0.0;
};

struct ReproductionCase {
    std::string name;
    IndicatorTree tree;                 // seven weighted dimensions as 0..100 leaves
    std::vector<Entity> entities;
    std::vector<Observation> inputs;    // pre-normalized dimension scores
    std::vector<PublishedValue> expected;
    std::vector<PublishedContribution> contributions;  // us-china only
    double tolerance = 0.05;
};

std::vector<std::string> builtin_case_names();

/// The fixed seven-dimension weight tree both cases share.
IndicatorTree ai_index_tree();

ReproductionCase builtin_case(std::string_view name);

struct EntityVerification {
    std::string entity_id;
    double recomputed = 0.0;
    double expected = 0.0;
    double delta = 0.0;  // recomputed − expected
    bool pass = false;
    std::string note;
};

struct VerificationReport {
    std::string case_name;
    double tolerance = 0.0;
    std::vector<EntityVerification> entities;
    bool pass = false;

    std::size_t passed() const;
};

VerificationReport verify_case(std::string_view name, std::optional<double> tolerance_override = std::nullopt);

std::string format_verification(const VerificationReport& report);

}  // namespace cidx
