#pragma once

#include "cidx/indicator_tree.hpp"
#include "cidx/scoring.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cidx {

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

struct SensitivityOptions {
    double magnitude = 0.0;  // multipliers drawn from [1 − magnitude, 1 + magnitude]
    std::size_t n_samples = 1000;
    std::uint64_t seed = 0;
    bool all_levels = false;  // perturb every sibling group, not only the dimensions
    ScoringOptions scoring{MissingPolicy::reweight, InputMode::pre_normalized, false};
};

struct CompositeBand {
    double min = 0.0;
    double mean = 0.0;
    double max = 0.0;
};

struct SensitivityReport {
    std::uint64_t seed = 0;
    std::size_t n_samples = 0;
    double magnitude = 0.0;
    bool all_levels = false;

    std::vector<std::string> entities;          // input order; indexes every matrix below
    std::vector<std::string> baseline_ranking;  // entity ids, best first
    CountMatrix rank_counts;                    // (entity, rank − 1) → samples
    CountMatrix outrank_counts;                 // (a, b) → samples where a scored strictly above b
    std::vector<CompositeBand> composite_bands;

    std::size_t index_of(const std::string& entity_id) const;
    std::vector<std::int64_t> rank_histogram(const std::string& entity_id) const;
    // Fraction of samples in which `a` scored strictly above `b`.
    double flip_fraction(const std::string& a, const std::string& b) const;
    double tie_fraction(const std::string& a, const std::string& b) const;

    bool operator==(const SensitivityReport&) const;
};

/// Multipliers for one sample. Each sample owns a generator derived from
/// (seed, sample_index), so samples can be drawn in any order.
Eigen::VectorXd sample_multipliers(Eigen::Index count, double magnitude, std::uint64_t seed,
                                   std::uint64_t sample_index);

/// Dimension weights of one perturbed sample, renormalized to sum to one.
Eigen::VectorXd perturbed_dimension_weights(const IndicatorTree& tree, double magnitude, std::uint64_t seed,
                                            std::uint64_t sample_index);

/// Copy of `tree` with every sibling group perturbed and renormalized.
IndicatorTree perturbed_tree(const IndicatorTree& tree, double magnitude, std::uint64_t seed,
                             std::uint64_t sample_index);

/// Monte-Carlo weight perturbation. The baseline ranking uses the
/// unperturbed weights. Entities are rescored on every sample; with
/// top-level perturbation only the fixed dimension scores are reweighted.
SensitivityReport perturb_weights(const IndicatorTree& tree, std::span<const Observation> observations,
                                  const SensitivityOptions& options);

/// Same, from an entity-by-dimension matrix of pre-normalized scores
/// (columns in tree dimension order). Top-level perturbation only.
SensitivityReport perturb_weights(const IndicatorTree& tree, const std::vector<std::string>& entity_ids,
                                  const Eigen::MatrixXd& dimension_scores, const SensitivityOptions& options);

struct FlipMatrix {
    std::vector<std::string> entities;
    Eigen::MatrixXd outranks;  // (a, b): fraction of samples a above b; NaN on the diagonal
    Eigen::MatrixXd ties;      // NaN on the diagonal
};

FlipMatrix rank_flip_matrix(const SensitivityReport& report);

}  // namespace cidx
