#include "cidx/reports.hpp"

#include <json.hpp>
#include <fmt/format.h>

#include <algorithm>

namespace cidx {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fixed(double v, int decimals) {
    double r = round_half_away(v, decimals);
    if (r == 0.0)
        r = 0.0;
    return fmt::format("{:.{}f}", r, decimals);
}

std::string signed_fixed(double v, int decimals) {
    const std::string s = fixed(v, decimals);
    return s.front() == '-' ? s : "+" + s;
}

std::size_t id_width(std::span<const std::string> ids, std::size_t at_least) {
    std::size_t w = at_least;
    for (const auto& s : ids)
        w = std::max(w, s.size());
    return w;
}

}  // namespace

std::string export_ranking(std::span<const RankedEntity> ranked, ExportFormat format) {
    if (format == ExportFormat::machine) {
        ordered_json a = ordered_json::array();
        for (const auto& r : ranked)
            a.push_back({{"rank", r.rank}, {"entity_id", r.entity_id}, {"composite", r.composite}});
        return ordered_json{{"ranking", a}}.dump(2) + "\n";
    }
    std::vector<std::string> ids;
    for (const auto& r : ranked)
        ids.push_back(r.entity_id);
    const auto w = id_width(ids, 6);
    std::string out = fmt::format("{:>4}  {:<{}}  {:>9}\n", "rank", "entity", w, "composite");
    for (const auto& r : ranked)
        out += fmt::format("{:>4}  {:<{}}  {:>9}\n", r.rank, r.entity_id, w, fixed(r.composite, 1));
    return out;
}

std::string export_tiers(std::span<const TierAssignment> tiers, std::span<const RankedEntity> ranked,
                         ExportFormat format) {
    auto composite_of = [&](const std::string& id) {
        for (const auto& r : ranked)
            if (r.entity_id == id)
                return r.composite;
        return 0.0;
    };
    if (format == ExportFormat::machine) {
        ordered_json a = ordered_json::array();
        for (const auto& t : tiers)
            a.push_back({{"tier", t.tier}, {"rank", t.rank}, {"entity_id", t.entity_id},
                         {"composite", composite_of(t.entity_id)}});
        return ordered_json{{"tiers", a}}.dump(2) + "\n";
    }
    std::vector<std::string> ids;
    for (const auto& t : tiers)
        ids.push_back(t.entity_id);
    const auto w = id_width(ids, 6);
    std::string out = fmt::format("{:>4}  {:>4}  {:<{}}  {:>9}\n", "tier", "rank", "entity", w, "composite");
    for (const auto& t : tiers)
        out += fmt::format("{:>4}  {:>4}  {:<{}}  {:>9}\n", t.tier, t.rank, t.entity_id, w,
                           fixed(composite_of(t.entity_id), 1));
    return out;
}

std::string export_gap(const GapReport& gap, ExportFormat format) {
    if (format == ExportFormat::machine) {
        ordered_json dims = ordered_json::array();
        for (const auto& d : gap.per_dimension)
            dims.push_back({{"dimension_id", d.dimension_id},
                            {"contribution_a", d.contribution_a},
                            {"contribution_b", d.contribution_b},
                            {"delta", d.delta}});
        ordered_json doc;
        doc["entity_a"] = gap.entity_a;
        doc["entity_b"] = gap.entity_b;
        doc["per_dimension"] = std::move(dims);
        doc["total_gap"] = gap.total_gap;
        return doc.dump(2) + "\n";
    }
    std::vector<std::string> ids;
    for (const auto& d : gap.per_dimension)
        ids.push_back(d.dimension_id);
    const auto w = id_width(ids, 9);
    const auto ca = std::max<std::size_t>(gap.entity_a.size(), 8);
    const auto cb = std::max<std::size_t>(gap.entity_b.size(), 8);
    std::string out =
        fmt::format("{:<{}}  {:>{}}  {:>{}}  {:>8}\n", "dimension", w, gap.entity_a, ca, gap.entity_b, cb, "delta");
    for (const auto& d : gap.per_dimension)
        out += fmt::format("{:<{}}  {:>{}}  {:>{}}  {:>8}\n", d.dimension_id, w, fixed(d.contribution_a, 2), ca,
                           fixed(d.contribution_b, 2), cb, signed_fixed(d.delta, 2));
    out += fmt::format("{:<{}}  {:>{}}  {:>{}}  {:>8}\n", "total", w, "", ca, "", cb, signed_fixed(gap.total_gap, 2));
    return out;
}

std::string export_sensitivity(const SensitivityReport& r, ExportFormat format) {
    if (format == ExportFormat::machine) {
        ordered_json doc;
        doc["seed"] = r.seed;
        doc["n_samples"] = r.n_samples;
        doc["magnitude"] = r.magnitude;
        doc["all_levels"] = r.all_levels;
        doc["baseline_ranking"] = r.baseline_ranking;
        ordered_json hist = ordered_json::object();
        ordered_json bands = ordered_json::object();
        ordered_json flips = ordered_json::object();
        ordered_json ties = ordered_json::object();
        for (const auto& a : r.entities) {
            hist[a] = r.rank_histogram(a);
            const auto& b = r.composite_bands[r.index_of(a)];
            bands[a] = {{"min", b.min}, {"mean", b.mean}, {"max", b.max}};
            ordered_json row = ordered_json::object();
            ordered_json tie_row = ordered_json::object();
            for (const auto& other : r.entities) {
                if (other == a)
                    continue;
                row[other] = r.flip_fraction(a, other);
                tie_row[other] = r.tie_fraction(a, other);
            }
            flips[a] = std::move(row);
            ties[a] = std::move(tie_row);
        }
        doc["rank_distribution"] = std::move(hist);
        doc["flip_matrix"] = std::move(flips);
        doc["tie_matrix"] = std::move(ties);
        doc["composite_bands"] = std::move(bands);
        return doc.dump(2) + "\n";
    }

    const auto w = id_width(r.entities, 6);
    std::string out = fmt::format("seed {}  samples {}  magnitude {}{}\n\n", r.seed, r.n_samples,
                                  format_exact(r.magnitude), r.all_levels ? "  (all levels)" : "");
    out += fmt::format("{:>4}  {:<{}}  {:>8} {:>8} {:>8}  rank histogram\n", "base", "entity", w, "min", "mean",
                       "max");
    for (std::size_t i = 0; i < r.baseline_ranking.size(); ++i) {
        const auto& id = r.baseline_ranking[i];
        const auto& b = r.composite_bands[r.index_of(id)];
        std::string hist;
        for (auto c : r.rank_histogram(id))
            hist += fmt::format(" {}", c);
        out += fmt::format("{:>4}  {:<{}}  {:>8} {:>8} {:>8} {}\n", i + 1, id, w, fixed(b.min, 1), fixed(b.mean, 1),
                           fixed(b.max, 1), hist);
    }
    out += "\nP(row outranks column)\n";
    out += fmt::format("{:<{}}", "", w);
    for (const auto& id : r.baseline_ranking)
        out += fmt::format("  {:>{}}", id, std::max<std::size_t>(id.size(), 5));
    out += "\n";
    for (const auto& a : r.baseline_ranking) {
        out += fmt::format("{:<{}}", a, w);
        for (const auto& b : r.baseline_ranking) {
            const auto cw = std::max<std::size_t>(b.size(), 5);
            out += a == b ? fmt::format("  {:>{}}", "-", cw)
                          : fmt::format("  {:>{}}", fmt::format("{:.3f}", r.flip_fraction(a, b)), cw);
        }
        out += "\n";
    }
    return out;
}

}  // namespace cidx
