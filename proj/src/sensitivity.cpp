#include "cidx/sensitivity.hpp"

#include "cidx/comparison.hpp"
#include "cidx/error.hpp"
#include "cidx/normalize.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>

namespace cidx {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::mt19937_64 sample_engine(std::uint64_t seed, std::uint64_t sample_index) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(sample_index)));
}

// 53 random bits onto [0, 1); independent of the standard library's
// distribution implementations.
double unit_draw(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

void check_options(const SensitivityOptions& o) {
    if (!std::isfinite(o.magnitude) || o.magnitude < 0.0 || o.magnitude > 1.0)
        throw Error(ErrorKind::invalid_value,
                    fmt::format("perturbation magnitude {} is outside [0, 1]", o.magnitude));
    if (o.n_samples == 0)
        throw Error(ErrorKind::invalid_value, "sensitivity needs at least one sample");
}

void perturb_group(IndicatorNode& node, double magnitude, std::mt19937_64& gen) {
    auto* branch = std::get_if<Branch>(&node.body);
    if (!branch)
        return;
    double sum = 0.0;
    for (auto& c : branch->children) {
        c.weight *= 1.0 - magnitude + 2.0 * magnitude * unit_draw(gen);
        sum += c.weight;
    }
    for (auto& c : branch->children)
        c.weight /= sum;
    for (auto& c : branch->children)
        perturb_group(c, magnitude, gen);
}

// Competition ranks (1-based) of a composite vector.
std::vector<int> competition_ranks(const Eigen::VectorXd& c) {
    const auto n = static_cast<std::size_t>(c.size());
    std::vector<int> ranks(n);
    for (std::size_t i = 0; i < n; ++i) {
        int above = 0;
        for (std::size_t j = 0; j < n; ++j)
            above += c(static_cast<Eigen::Index>(j)) > c(static_cast<Eigen::Index>(i));
        ranks[i] = above + 1;
    }
    return ranks;
}

using Evaluator = std::function<Eigen::VectorXd(std::uint64_t sample_index)>;

SensitivityReport run(const std::vector<std::string>& ids, const Eigen::VectorXd& baseline,
                      const SensitivityOptions& options, const Evaluator& eval) {
    const auto n = static_cast<Eigen::Index>(ids.size());
    SensitivityReport r;
    r.seed = options.seed;
    r.n_samples = options.n_samples;
    r.magnitude = options.magnitude;
    r.all_levels = options.all_levels;
    r.entities = ids;

    std::vector<std::size_t> order(ids.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double ca = baseline(static_cast<Eigen::Index>(a));
        const double cb = baseline(static_cast<Eigen::Index>(b));
        return ca != cb ? ca > cb : ids[a] < ids[b];
    });
    for (std::size_t i : order)
        r.baseline_ranking.push_back(ids[i]);

    r.rank_counts = CountMatrix::Zero(n, n);
    r.outrank_counts = CountMatrix::Zero(n, n);
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
    Eigen::VectorXd hi = Eigen::VectorXd::Constant(n, -std::numeric_limits<double>::infinity());
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(n);

    for (std::size_t s = 0; s < options.n_samples; ++s) {
        const Eigen::VectorXd c = eval(s);
        const auto ranks = competition_ranks(c);
        for (Eigen::Index a = 0; a < n; ++a) {
            r.rank_counts(a, ranks[static_cast<std::size_t>(a)] - 1) += 1;
            for (Eigen::Index b = 0; b < n; ++b)
                r.outrank_counts(a, b) += c(a) > c(b);
        }
        lo = lo.cwiseMin(c);
        hi = hi.cwiseMax(c);
        sum += c;
    }
    for (Eigen::Index e = 0; e < n; ++e)
        r.composite_bands.push_back({lo(e), sum(e) / static_cast<double>(options.n_samples), hi(e)});
    return r;
}

// Dimension scores with a presence mask, so partially covered entities are
// reweighted exactly as score_entity would at the root.
struct DimensionTable {
    Eigen::MatrixXd scores;
    Eigen::MatrixXd present;
    Eigen::VectorXd fixed;  // composite for rows with no dimension data (root injected)
};

Eigen::VectorXd table_composites(const DimensionTable& t, const Eigen::VectorXd& w, MissingPolicy policy) {
    Eigen::VectorXd c = composites(t.scores.cwiseProduct(t.present), w);
    for (Eigen::Index e = 0; e < c.size(); ++e) {
        const double covered = t.present.row(e).sum();
        if (covered == 0.0) {
            c(e) = t.fixed(e);
        } else if (covered < static_cast<double>(t.present.cols()) && policy == MissingPolicy::reweight) {
            c(e) /= t.present.row(e).dot(w);
        }
        c(e) = std::clamp(c(e), 0.0, kScale);
    }
    return c;
}

SensitivityReport run_top_level(const IndicatorTree& tree, const std::vector<std::string>& ids,
                                const DimensionTable& table, const SensitivityOptions& options) {
    const Eigen::VectorXd w = dimension_weights(tree);
    const MissingPolicy policy = options.scoring.policy;
    const Eigen::VectorXd baseline = table_composites(table, w, policy);
    return run(ids, baseline, options, [&](std::uint64_t s) {
        return table_composites(table, perturbed_dimension_weights(tree, options.magnitude, options.seed, s),
                                policy);
    });
}

}  // namespace

std::size_t SensitivityReport::index_of(const std::string& entity_id) const {
    auto it = std::find(entities.begin(), entities.end(), entity_id);
    if (it == entities.end())
        throw Error(ErrorKind::unknown_id, fmt::format("entity '{}' is not in the report", entity_id), entity_id);
    return static_cast<std::size_t>(it - entities.begin());
}

std::vector<std::int64_t> SensitivityReport::rank_histogram(const std::string& entity_id) const {
    const auto e = static_cast<Eigen::Index>(index_of(entity_id));
    std::vector<std::int64_t> h(static_cast<std::size_t>(rank_counts.cols()));
    for (Eigen::Index k = 0; k < rank_counts.cols(); ++k)
        h[static_cast<std::size_t>(k)] = rank_counts(e, k);
    return h;
}

double SensitivityReport::flip_fraction(const std::string& a, const std::string& b) const {
    const auto i = static_cast<Eigen::Index>(index_of(a));
    const auto j = static_cast<Eigen::Index>(index_of(b));
    return static_cast<double>(outrank_counts(i, j)) / static_cast<double>(n_samples);
}

double SensitivityReport::tie_fraction(const std::string& a, const std::string& b) const {
    const auto i = static_cast<Eigen::Index>(index_of(a));
    const auto j = static_cast<Eigen::Index>(index_of(b));
    const auto ties = static_cast<std::int64_t>(n_samples) - outrank_counts(i, j) - outrank_counts(j, i);
    return static_cast<double>(ties) / static_cast<double>(n_samples);
}

bool SensitivityReport::operator==(const SensitivityReport& o) const {
    if (seed != o.seed || n_samples != o.n_samples || magnitude != o.magnitude || all_levels != o.all_levels ||
        entities != o.entities || baseline_ranking != o.baseline_ranking || rank_counts != o.rank_counts ||
        outrank_counts != o.outrank_counts || composite_bands.size() != o.composite_bands.size())
        return false;
    for (std::size_t i = 0; i < composite_bands.size(); ++i) {
        const auto& a = composite_bands[i];
        const auto& b = o.composite_bands[i];
        if (a.min != b.min || a.mean != b.mean || a.max != b.max)
            return false;
    }
    return true;
}

Eigen::VectorXd sample_multipliers(Eigen::Index count, double magnitude, std::uint64_t seed,
                                   std::uint64_t sample_index) {
    auto gen = sample_engine(seed, sample_index);
    Eigen::VectorXd u(count);
    for (Eigen::Index i = 0; i < count; ++i)
        u(i) = 1.0 - magnitude + 2.0 * magnitude * unit_draw(gen);
    return u;
}

Eigen::VectorXd perturbed_dimension_weights(const IndicatorTree& tree, double magnitude, std::uint64_t seed,
                                            std::uint64_t sample_index) {
    const Eigen::VectorXd w = dimension_weights(tree);
    return renormalized(w.cwiseProduct(sample_multipliers(w.size(), magnitude, seed, sample_index)));
}

IndicatorTree perturbed_tree(const IndicatorTree& tree, double magnitude, std::uint64_t seed,
                             std::uint64_t sample_index) {
    IndicatorTree copy = tree;
    auto gen = sample_engine(seed, sample_index);
    perturb_group(copy.root, magnitude, gen);
    return copy;
}

SensitivityReport perturb_weights(const IndicatorTree& tree, std::span<const Observation> observations,
                                  const SensitivityOptions& options) {
    check_options(options);
    const std::vector<ScoreCard> cards = score_all(tree, observations, options.scoring);
    if (cards.empty())
        throw Error(ErrorKind::no_data, "sensitivity needs at least one entity");
    std::vector<std::string> ids;
    for (const auto& c : cards)
        ids.push_back(c.entity_id);

    if (!options.all_levels) {
        const auto& dims = tree.dimensions();
        const auto n = static_cast<Eigen::Index>(cards.size());
        const auto d = static_cast<Eigen::Index>(dims.size());
        DimensionTable table{Eigen::MatrixXd::Zero(n, d), Eigen::MatrixXd::Zero(n, d), Eigen::VectorXd::Zero(n)};
        for (Eigen::Index e = 0; e < n; ++e) {
            const ScoreCard& card = cards[static_cast<std::size_t>(e)];
            table.fixed(e) = card.composite;
            for (Eigen::Index k = 0; k < d; ++k)
                if (const NodeScore* ns = card.find(dims[static_cast<std::size_t>(k)].id)) {
                    table.scores(e, k) = ns->score;
                    table.present(e, k) = 1.0;
                }
        }
        return run_top_level(tree, ids, table, options);
    }

    Eigen::VectorXd baseline(static_cast<Eigen::Index>(cards.size()));
    for (std::size_t e = 0; e < cards.size(); ++e)
        baseline(static_cast<Eigen::Index>(e)) = cards[e].composite;
    return run(ids, baseline, options, [&](std::uint64_t s) {
        const IndicatorTree t = perturbed_tree(tree, options.magnitude, options.seed, s);
        const auto sample_cards = score_all(t, observations, options.scoring);
        Eigen::VectorXd c(static_cast<Eigen::Index>(sample_cards.size()));
        for (std::size_t e = 0; e < sample_cards.size(); ++e)
            c(static_cast<Eigen::Index>(e)) = sample_cards[e].composite;
        return c;
    });
}

SensitivityReport perturb_weights(const IndicatorTree& tree, const std::vector<std::string>& entity_ids,
                                  const Eigen::MatrixXd& dimension_scores, const SensitivityOptions& options) {
    check_options(options);
    const auto d = static_cast<Eigen::Index>(tree.dimensions().size());
    if (dimension_scores.rows() != static_cast<Eigen::Index>(entity_ids.size()) || dimension_scores.cols() != d)
        throw Error(ErrorKind::contract,
                    fmt::format("score matrix is {}x{}, expected {}x{}", dimension_scores.rows(),
                                dimension_scores.cols(), entity_ids.size(), d));
    if (entity_ids.empty())
        throw Error(ErrorKind::no_data, "sensitivity needs at least one entity");
    if (options.all_levels)
        throw Error(ErrorKind::contract, "all-level perturbation needs observations, not a dimension matrix");
    if ((dimension_scores.array() < 0.0).any() || (dimension_scores.array() > kScale).any() ||
        !dimension_scores.allFinite())
        throw Error(ErrorKind::invalid_value, "dimension scores must lie in [0, 100]");
    DimensionTable table{dimension_scores, Eigen::MatrixXd::Ones(dimension_scores.rows(), d),
                         Eigen::VectorXd::Zero(dimension_scores.rows())};
    return run_top_level(tree, entity_ids, table, options);
}

FlipMatrix rank_flip_matrix(const SensitivityReport& report) {
    const auto n = static_cast<Eigen::Index>(report.entities.size());
    const double samples = static_cast<double>(report.n_samples);
    FlipMatrix m{report.entities, Eigen::MatrixXd(n, n), Eigen::MatrixXd(n, n)};
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) {
            if (a == b) {
                m.outranks(a, b) = nan;
                m.ties(a, b) = nan;
                continue;
            }
            const auto up = report.outrank_counts(a, b);
            const auto down = report.outrank_counts(b, a);
            m.outranks(a, b) = static_cast<double>(up) / samples;
            m.ties(a, b) = static_cast<double>(static_cast<std::int64_t>(report.n_samples) - up - down) / samples;
        }
    return m;
}

}  // namespace cidx
