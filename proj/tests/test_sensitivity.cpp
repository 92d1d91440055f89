#include <doctest.h>

#include "cidx/error.hpp"
#include "cidx/reproduction.hpp"
#include "cidx/sensitivity.hpp"

#include "oracles.hpp"

#include <cmath>

using namespace cidx;

namespace {

struct Regions {
    ReproductionCase c = builtin_case("china-regions");

    // Dimension scores in tree order for one region.
    std::vector<double> row(const std::string& id) const {
        std::vector<double> out;
        for (const auto& d : c.tree.dimensions())
            for (const auto& o : c.inputs)
                if (o.entity_id == id && o.indicator_id == d.id)
                    out.push_back(o.value);
        return out;
    }
};

SensitivityOptions opts(double magnitude, std::size_t n, std::uint64_t seed) {
    SensitivityOptions o;
    o.magnitude = magnitude;
    o.n_samples = n;
    o.seed = seed;
    return o;
}

std::vector<double> tree_weights(const IndicatorTree& t) {
    std::vector<double> w;
    for (const auto& d : t.dimensions())
        w.push_back(d.weight);
    return w;
}

}  // namespace

TEST_SUITE("sensitivity") {

TEST_CASE("magnitude 0 reproduces the baseline in every sample") {
    const Regions r;
    const SensitivityReport rep = perturb_weights(r.c.tree, r.c.inputs, opts(0.0, 200, 11));
    REQUIRE(rep.baseline_ranking.size() == 7);
    CHECK(rep.baseline_ranking.front() == "east_china");
    for (std::size_t pos = 0; pos < rep.baseline_ranking.size(); ++pos) {
        const auto hist = rep.rank_histogram(rep.baseline_ranking[pos]);
        CHECK(hist[pos] == 200);
    }
    const FlipMatrix m = rank_flip_matrix(rep);
    for (Eigen::Index a = 0; a < m.outranks.rows(); ++a)
        for (Eigen::Index b = 0; b < m.outranks.cols(); ++b) {
            if (a == b) {
                CHECK(std::isnan(m.outranks(a, b)));
                continue;
            }
            CHECK((m.outranks(a, b) == 0.0 || m.outranks(a, b) == 1.0));
        }
}

TEST_CASE("identical entities always tie") {
    const IndicatorTree t = ai_index_tree();
    Eigen::MatrixXd s(3, 7);
    s.row(0) << 10, 20, 30, 40, 50, 60, 70;
    s.row(1) = s.row(0);
    s.row(2) << 70, 60, 50, 40, 30, 20, 10;
    const SensitivityReport rep = perturb_weights(t, {"twin_a", "twin_b", "other"}, s, opts(0.8, 500, 3));
    CHECK(rep.tie_fraction("twin_a", "twin_b") == 1.0);
    CHECK(rep.flip_fraction("twin_a", "twin_b") == 0.0);
    CHECK(rep.flip_fraction("twin_b", "twin_a") == 0.0);
    const FlipMatrix m = rank_flip_matrix(rep);
    CHECK(m.outranks(0, 1) == 0.0);
    CHECK(m.ties(0, 1) == 1.0);
}

TEST_CASE("East vs North agrees with the exhaustive multiplier grid") {
    const Regions r;
    const auto w = tree_weights(r.c.tree);
    const auto east = r.row("east_china");
    const auto north = r.row("north_china");

    // At 0.5 the worst-case multipliers still leave East ahead, so East
    // outranks North everywhere on the grid and in every sample.
    const double grid_half = testing::grid_outrank_fraction(w, east, north, 0.5, 6);
    CHECK(grid_half == 1.0);
    const SensitivityReport half = perturb_weights(r.c.tree, r.c.inputs, opts(0.5, 10000, 2024));
    CHECK(half.flip_fraction("east_china", "north_china") == grid_half);

    // At magnitude 1 the reachable weights include North-favouring ones.
    const double grid_full = testing::grid_outrank_fraction(w, east, north, 1.0, 8);
    CHECK(grid_full > 0.0);
    CHECK(grid_full < 1.0);
    const SensitivityReport full = perturb_weights(r.c.tree, r.c.inputs, opts(1.0, 10000, 2024));
    const double mc = full.flip_fraction("east_china", "north_china");
    CHECK(mc > 0.0);
    CHECK(mc < 1.0);
    CHECK(std::abs(mc - grid_full) < 0.02);

    // Over the whole simplex both orders occur.
    const auto simplex = testing::simplex_grid_orderings(east, north, 10);
    CHECK(simplex.a_above > 0);
    CHECK(simplex.b_above > 0);
}

TEST_CASE("dominance survives any magnitude") {
    const Regions r;
    const auto east = r.row("east_china");
    const auto nw = r.row("northwest_china");
    for (std::size_t i = 0; i < east.size(); ++i)
        REQUIRE(east[i] > nw[i]);
    for (double m : {0.0, 0.3, 0.7, 1.0}) {
        const SensitivityReport rep = perturb_weights(r.c.tree, r.c.inputs, opts(m, 2000, 5));
        CHECK(rep.flip_fraction("northwest_china", "east_china") == 0.0);
        CHECK(rep.flip_fraction("east_china", "northwest_china") == 1.0);
    }
}

TEST_CASE("reports are reproducible from the seed") {
    const Regions r;
    const auto a = perturb_weights(r.c.tree, r.c.inputs, opts(0.4, 3000, 99));
    const auto b = perturb_weights(r.c.tree, r.c.inputs, opts(0.4, 3000, 99));
    const auto c = perturb_weights(r.c.tree, r.c.inputs, opts(0.4, 3000, 100));
    CHECK(a == b);
    CHECK_FALSE(a == c);
    CHECK(sample_multipliers(7, 0.4, 99, 17) == sample_multipliers(7, 0.4, 99, 17));
    CHECK(sample_multipliers(7, 0.4, 99, 17) != sample_multipliers(7, 0.4, 99, 18));
}

TEST_CASE("report invariants") {
    const Regions r;
    const auto rep = perturb_weights(r.c.tree, r.c.inputs, opts(0.9, 1500, 8));
    CHECK(rep.seed == 8);
    CHECK(rep.n_samples == 1500);
    for (Eigen::Index e = 0; e < rep.rank_counts.rows(); ++e)
        CHECK(rep.rank_counts.row(e).sum() == 1500);
    for (const auto& a : rep.entities)
        for (const auto& b : rep.entities) {
            if (a == b)
                continue;
            CHECK(rep.flip_fraction(a, b) + rep.flip_fraction(b, a) + rep.tie_fraction(a, b) ==
                  doctest::Approx(1.0).epsilon(1e-15));
        }
    for (const auto& band : rep.composite_bands) {
        CHECK(band.min <= band.mean);
        CHECK(band.mean <= band.max);
    }
}

TEST_CASE("perturbed weights stay renormalized") {
    const IndicatorTree t = ai_index_tree();
    for (std::uint64_t s = 0; s < 500; ++s) {
        const Eigen::VectorXd w = perturbed_dimension_weights(t, 1.0, 42, s);
        CHECK(std::abs(w.sum() - 1.0) <= 1e-9);
        CHECK((w.array() >= 0.0).all());
    }
    const Eigen::VectorXd u = sample_multipliers(1000, 0.25, 1, 0);
    CHECK(u.minCoeff() >= 0.75);
    CHECK(u.maxCoeff() <= 1.25);
    CHECK(sample_multipliers(5, 0.0, 1, 0) == Eigen::VectorXd::Ones(5));
}

TEST_CASE("all-level perturbation") {
    IndicatorTree t;
    auto leaf = [](std::string id, double w) {
        return IndicatorNode{std::move(id), "l", w, Leaf{{0, 100}, Direction::higher_better}};
    };
    t.root = IndicatorNode{"root", "Root", 1.0,
                           Branch{{IndicatorNode{"g", "G", 0.5, Branch{{leaf("g1", 0.3), leaf("g2", 0.7)}}},
                                   leaf("h", 0.5)}}};
    const std::vector<Observation> obs{{"p", "g1", 90, {}}, {"p", "g2", 10, {}}, {"p", "h", 50, {}},
                                       {"q", "g1", 10, {}}, {"q", "g2", 60, {}}, {"q", "h", 50, {}}};
    SensitivityOptions o = opts(0.0, 50, 1);
    o.all_levels = true;
    o.scoring.mode = InputMode::raw_values;
    const auto still = perturb_weights(t, obs, o);
    CHECK(still.flip_fraction(still.baseline_ranking[0], still.baseline_ranking[1]) == 1.0);

    // Only the nested weights separate p from q; dimension-only
    // perturbation cannot flip them, full perturbation can.
    o.magnitude = 1.0;
    o.n_samples = 2000;
    const auto deep = perturb_weights(t, obs, o);
    const double f = deep.flip_fraction("p", "q");
    CHECK(f > 0.0);
    CHECK(f < 1.0);
    o.all_levels = false;
    const auto shallow = perturb_weights(t, obs, o);
    CHECK((shallow.flip_fraction("p", "q") == 0.0 || shallow.flip_fraction("p", "q") == 1.0));

    const IndicatorTree pt = perturbed_tree(t, 0.9, 7, 3);
    CHECK(validate_tree(pt).ok());
    CHECK(tree_fingerprint(pt) != tree_fingerprint(t));
}

TEST_CASE("invalid options are rejected") {
    const Regions r;
    CHECK_THROWS_AS(perturb_weights(r.c.tree, r.c.inputs, opts(1.5, 10, 1)), Error);
    CHECK_THROWS_AS(perturb_weights(r.c.tree, r.c.inputs, opts(-0.1, 10, 1)), Error);
    CHECK_THROWS_AS(perturb_weights(r.c.tree, r.c.inputs, opts(0.1, 0, 1)), Error);
    CHECK_THROWS_AS(perturb_weights(r.c.tree, {"a"}, Eigen::MatrixXd::Zero(2, 7), opts(0.1, 10, 1)), Error);
}

}
