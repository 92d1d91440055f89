#include "cidx/reproduction.hpp"

#include "cidx/error.hpp"
#include "cidx/io.hpp"

#include <fmt/format.h>

#include <array>
#include <cmath>

namespace cidx {

namespace {

struct DimensionDef {
    const char* id;
    const char* name;
    double weight;
};

// Tree order.
constexpr std::array<DimensionDef, 7> kDimensions{{
    {"research_development", "Research & Development", 0.20},
    {"industry_economy", "Industry & Economy", 0.20},
    {"technical_performance", "Technical Performance", 0.15},
    {"education_talent", "Education & Talent", 0.15},
    {"ai_for_science", "AI for Science", 0.10},
    {"policy_governance", "Policy & Governance", 0.10},
    {"social_impact", "Social Impact", 0.10},
}};

// Column order of the regional table as printed.
constexpr std::array<const char*, 7> kRegionalColumns{
    "technical_performance", "research_development", "ai_for_science", "industry_economy",
    "education_talent",      "policy_governance",    "social_impact",
};

struct RegionRow {
    const char* id;
    const char* name;
    std::array<double, 7> cells;  // kRegionalColumns order
    double composite;
};

constexpr std::array<RegionRow, 7> kRegions{{
    {"east_china", "East China (Shanghai & East)", {71.7, 27.5, 31.7, 35.5, 31.7, 38.5, 48.8}, 40.0},
    {"north_china", "North China (Beijing & North)", {64.3, 28.5, 37.3, 24.6, 28.4, 39.1, 37.0}, 35.9},
    {"south_china", "South China (Guangdong)", {62.9, 19.3, 14.3, 20.8, 27.8, 25.1, 28.2}, 28.4},
    {"southwest_china", "Southwest China (Sichuan/Chongqing)", {27.3, 7.0, 3.3, 6.8, 2.7, 13.0, 12.3}, 10.1},
    {"central_china", "Central China (Hubei/Hunan)", {25.4, 7.7, 6.5, 6.8, 4.2, 11.9, 16.3}, 10.8},
    {"northwest_china", "Northwest China (Shaanxi)", {26.7, 6.2, 4.0, 3.3, 2.9, 9.4, 9.4}, 8.6},
    {"northeast_china", "Northeast China (Liaoning etc)", {37.6, 3.9, 2.9, 2.2, 2.3, 6.8, 7.3}, 8.9},
}};

struct NationalRow {
    const char* id;
    const char* name;
    std::array<double, 7> contributions;  // tree order
    double composite;
};

constexpr std::array<NationalRow, 2> kNational{{
    {"us", "United States", {11.3, 14.8, 12.9, 9.03, 7.15, 8.9, 4.1}, 68.1},
    {"china", "China", {10.3, 11.2, 9.98, 8.72, 6.91, 5.3, 7.0}, 59.4},
}};

ReproductionCase china_regions() {
    ReproductionCase c;
    c.name = "china-regions";
    c.tree = ai_index_tree();
    c.tolerance = 0.05;
    for (const RegionRow& r : kRegions) {
        c.entities.push_back({r.id, r.name, std::string("China")});
        for (std::size_t k = 0; k < kRegionalColumns.size(); ++k)
            c.inputs.push_back({r.id, kRegionalColumns[k], r.cells[k], {}});
        c.expected.push_back({r.id, r.composite});
    }
    return c;
}

ReproductionCase us_china() {
    ReproductionCase c;
    c.name = "us-china";
    c.tree = ai_index_tree();
    c.tolerance = 0.10;
    for (const NationalRow& r : kNational) {
        c.entities.push_back({r.id, r.name, std::nullopt});
        for (std::size_t k = 0; k < kDimensions.size(); ++k) {
            // The published values are contributions; the score is recovered
            // by dividing out the dimension weight.
            c.inputs.push_back({r.id, kDimensions[k].id, r.contributions[k] / kDimensions[k].weight, {}});
            c.contributions.push_back({r.id, kDimensions[k].id, r.contributions[k]});
        }
        c.expected.push_back({r.id, r.composite});
    }
    return c;
}

}  // namespace

std::vector<std::string> builtin_case_names() { return {"us-china", "china-regions"}; }

IndicatorTree ai_index_tree() {
    IndicatorTree tree;
    tree.root.id = "ai_index";
    tree.root.name = "AI Index";
    tree.root.weight = 1.0;
    Branch dims;
    for (const DimensionDef& d : kDimensions)
        dims.children.push_back({d.id, d.name, d.weight, Leaf{{0.0, 100.0}, Direction::higher_better}});
    tree.root.body = std::move(dims);
    return tree;
}

ReproductionCase builtin_case(std::string_view name) {
    if (name == "china-regions")
        return china_regions();
    if (name == "us-china")
        return us_china();
    throw Error(ErrorKind::unknown_case,
                fmt::format("unknown reproduction case '{}' (known: us-china, china-regions)", name),
                std::string(name));
}

std::size_t VerificationReport::passed() const {
    std::size_t n = 0;
    for (const auto& e : entities)
        n += e.pass;
    return n;
}

VerificationReport verify_case(std::string_view name, std::optional<double> tolerance_override) {
    const ReproductionCase c = builtin_case(name);
    VerificationReport report;
    report.case_name = c.name;
    report.tolerance = tolerance_override.value_or(c.tolerance);

    const ScoringOptions options{MissingPolicy::fail, InputMode::pre_normalized, true};
    const auto cards = score_all(c.tree, c.inputs, options);
    report.pass = true;
    for (const PublishedValue& p : c.expected) {
        EntityVerification v;
        v.entity_id = p.entity_id;
        v.expected = p.composite;
        for (const auto& card : cards)
            if (card.entity_id == p.entity_id)
                v.recomputed = card.composite;
        v.delta = v.recomputed - v.expected;
        v.pass = std::abs(v.delta) <= report.tolerance;
        if (format_one_decimal(v.recomputed) != format_one_decimal(v.expected))
            v.note = fmt::format("rounding note: recomputed value rounds to {}, published {}",
                                 format_one_decimal(v.recomputed), format_one_decimal(v.expected));
        report.pass = report.pass && v.pass;
        report.entities.push_back(std::move(v));
    }
    return report;
}

std::string format_verification(const VerificationReport& report) {
    std::string out = fmt::format("case {}  tolerance {}\n", report.case_name, format_exact(report.tolerance));
    out += fmt::format("{:<18} {:>12} {:>10} {:>9}  {}\n", "entity", "recomputed", "published", "delta", "result");
    for (const auto& e : report.entities) {
        out += fmt::format("{:<18} {:>12.4f} {:>10.1f} {:>+9.4f}  {}", e.entity_id, e.recomputed, e.expected, e.delta,
                           e.pass ? "pass" : "FAIL");
        if (!e.note.empty())
            out += "  (" + e.note + ")";
        out += "\n";
    }
    out += fmt::format("{}: {}/{} entities within tolerance\n", report.pass ? "PASS" : "FAIL", report.passed(),
                       report.entities.size());
    return out;
}

}  // namespace cidx
