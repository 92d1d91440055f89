#include "cidx/io.hpp"

#include "cidx/error.hpp"

#include <json.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace cidx {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::string_view kHeader3 = "entity_id,indicator_id,value";
constexpr std::string_view kHeader4 = "entity_id,indicator_id,value,period";
constexpr double kFullCoverage = 1.0 - 1e-9;

std::vector<std::string> split_csv(std::string_view line, bool& ok) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    ok = true;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    fields.back() += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                fields.back() += ch;
            }
        } else if (ch == '"' && fields.back().empty()) {
            quoted = true;
        } else if (ch == ',') {
            fields.emplace_back();
        } else {
            fields.back() += ch;
        }
    }
    if (quoted)
        ok = false;
    return fields;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"')
            q += '"';
        q += c;
    }
    return q + '"';
}

bool parse_double(std::string_view text, double& out) {
    if (text.empty())
        return false;
    if (text.front() == '+')
        text.remove_prefix(1);
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, out, std::chars_format::general);
    return ec == std::errc{} && ptr == end;
}

Error strict_failure(const IngestIssue& issue) {
    const ErrorKind kind = issue.kind == IssueKind::duplicate           ? ErrorKind::duplicate
                         : issue.kind == IssueKind::unknown_indicator ? ErrorKind::unknown_id
                         : issue.kind == IssueKind::malformed_row     ? ErrorKind::syntax
                                                                      : ErrorKind::invalid_value;
    return Error(kind, fmt::format("row {}: {}", issue.row, issue.message), fmt::format("row {}", issue.row));
}

const NodeScore& require_full(const ScoreCard& card, const std::string& dim) {
    const NodeScore* ns = card.find(dim);
    if (!ns || ns->coverage < kFullCoverage)
        throw Error(ErrorKind::incomplete_coverage,
                    fmt::format("entity '{}' lacks full data for dimension '{}'", card.entity_id, dim), dim);
    return *ns;
}

std::string export_machine(std::span<const ScoreCard> cards, const IndicatorTree& tree) {
    ordered_json doc;
    doc["index"] = tree.root.id;
    doc["fingerprint"] = tree_fingerprint(tree);
    ordered_json entities = ordered_json::array();
    const auto nodes = nodes_preorder(tree);
    for (const ScoreCard& card : cards) {
        ordered_json e;
        e["entity_id"] = card.entity_id;
        e["policy"] = to_string(card.policy_used);
        e["composite"] = card.composite;
        ordered_json scores = ordered_json::object();
        for (const IndicatorNode* n : nodes)
            if (const NodeScore* ns = card.find(n->id))
                scores[n->id] = {{"score", ns->score}, {"contribution", ns->contribution}, {"coverage", ns->coverage}};
        e["nodes"] = std::move(scores);
        entities.push_back(std::move(e));
    }
    doc["entities"] = std::move(entities);
    return doc.dump(2) + "\n";
}

std::string export_table(std::span<const ScoreCard> cards, const IndicatorTree& tree) {
    std::vector<std::string> header{"entity"};
    for (const auto& d : tree.dimensions())
        header.push_back(d.id);
    header.emplace_back("composite");

    std::vector<std::vector<std::string>> rows;
    for (const ScoreCard& card : cards) {
        std::vector<std::string> row{card.entity_id};
        for (const auto& d : tree.dimensions()) {
            const NodeScore* ns = card.find(d.id);
            row.push_back(ns ? format_one_decimal(ns->score) : "-");
        }
        row.push_back(format_one_decimal(card.composite));
        rows.push_back(std::move(row));
    }

    std::vector<std::size_t> width(header.size());
    for (std::size_t i = 0; i < header.size(); ++i) {
        width[i] = header[i].size();
        for (const auto& r : rows)
            width[i] = std::max(width[i], r[i].size());
    }
    std::string out;
    auto emit = [&](const std::vector<std::string>& cells) {
        std::string line;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0)
                line += "  ";
            line += i == 0 ? fmt::format("{:<{}}", cells[i], width[i]) : fmt::format("{:>{}}", cells[i], width[i]);
        }
        while (!line.empty() && line.back() == ' ')
            line.pop_back();
        out += line + "\n";
    };
    emit(header);
    for (const auto& r : rows)
        emit(r);
    return out;
}

}  // namespace

const char* to_string(IssueKind kind) noexcept {
    switch (kind) {
        case IssueKind::malformed_row: return "malformed row";
        case IssueKind::empty_id: return "empty id";
        case IssueKind::unknown_indicator: return "unknown indicator";
        case IssueKind::non_numeric_value: return "non-numeric value";
        case IssueKind::out_of_range: return "out of range";
        case IssueKind::duplicate: return "duplicate";
    }
    return "issue";
}

std::size_t IngestDiagnostics::rows_rejected() const {
    return static_cast<std::size_t>(
        std::count_if(issues.begin(), issues.end(), [](const IngestIssue& i) { return i.severity == Severity::error; }));
}

IngestResult load_observations(std::istream& in, const IndicatorTree& tree, InputMode mode, bool strict) {
    IngestResult result;
    std::map<std::string, const IndicatorNode*> by_id;
    for (const IndicatorNode* n : nodes_preorder(tree))
        by_id.emplace(n->id, n);
    std::map<std::pair<std::string, std::string>, std::size_t> seen;

    std::string line;
    std::size_t line_no = 0;
    std::size_t columns = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0)
            line.erase(0, 3);
        if (line.empty())
            continue;
        if (columns == 0) {
            if (line == kHeader4)
                columns = 4;
            else if (line == kHeader3)
                columns = 3;
            else
                throw Error(ErrorKind::syntax,
                            fmt::format("line {}: expected header '{}', got '{}'", line_no, kHeader4, line),
                            fmt::format("row {}", line_no));
            continue;
        }

        ++result.diagnostics.rows_read;
        auto reject = [&](IssueKind kind, std::string msg, Severity sev = Severity::error) {
            IngestIssue issue{line_no, kind, sev, std::move(msg)};
            if (strict)
                throw strict_failure(issue);
            result.diagnostics.issues.push_back(std::move(issue));
        };

        bool ok = true;
        const auto fields = split_csv(line, ok);
        if (!ok || fields.size() != columns) {
            reject(IssueKind::malformed_row, fmt::format("expected {} fields, got {}", columns, fields.size()));
            continue;
        }
        Observation obs{fields[0], fields[1], 0.0, columns == 4 ? fields[3] : std::string{}};
        if (obs.entity_id.empty() || obs.indicator_id.empty()) {
            reject(IssueKind::empty_id, "entity_id and indicator_id must be nonempty");
            continue;
        }
        auto node = by_id.find(obs.indicator_id);
        if (node == by_id.end()) {
            reject(IssueKind::unknown_indicator, fmt::format("unknown indicator '{}'", obs.indicator_id));
            continue;
        }
        if (mode == InputMode::raw_values && !node->second->is_leaf()) {
            reject(IssueKind::unknown_indicator,
                   fmt::format("unknown indicator '{}': raw values attach to leaves only", obs.indicator_id));
            continue;
        }
        if (!parse_double(fields[2], obs.value) || !std::isfinite(obs.value)) {
            reject(IssueKind::non_numeric_value, fmt::format("value '{}' is not a finite number", fields[2]));
            continue;
        }
        if (mode == InputMode::pre_normalized && (obs.value < 0.0 || obs.value > tree.scale)) {
            reject(IssueKind::out_of_range, fmt::format("pre-normalized score {} is outside [0, 100]", fields[2]));
            continue;
        }

        auto key = std::make_pair(obs.entity_id, obs.indicator_id);
        if (auto prev = seen.find(key); prev != seen.end()) {
            reject(IssueKind::duplicate,
                   fmt::format("duplicate observation ({}, {}): last value wins", obs.entity_id, obs.indicator_id),
                   Severity::warning);
            result.observations[prev->second] = std::move(obs);
        } else {
            seen.emplace(std::move(key), result.observations.size());
            result.observations.push_back(std::move(obs));
        }
        ++result.diagnostics.rows_accepted;
    }
    if (columns == 0)
        throw Error(ErrorKind::syntax, fmt::format("missing header '{}'", kHeader4), "row 1");
    return result;
}

IngestResult load_observations_file(const std::string& path, const IndicatorTree& tree, InputMode mode,
                                    bool strict) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::io, fmt::format("cannot open data file '{}': file not found or unreadable", path), path);
    return load_observations(in, tree, mode, strict);
}

void write_observations_csv(std::ostream& out, std::span<const Observation> observations) {
    out << kHeader4 << '\n';
    for (const auto& o : observations)
        out << csv_field(o.entity_id) << ',' << csv_field(o.indicator_id) << ',' << format_exact(o.value) << ','
            << csv_field(o.period) << '\n';
}

std::string export_scorecards(std::span<const ScoreCard> cards, const IndicatorTree& tree, ExportFormat format) {
    return format == ExportFormat::machine ? export_machine(cards, tree) : export_table(cards, tree);
}

std::vector<Observation> observations_from_machine_export(std::string_view document, const IndicatorTree& tree) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(document);
    } catch (const ordered_json::parse_error& e) {
        throw Error(ErrorKind::syntax, fmt::format("malformed scorecard export: {}", e.what()));
    }
    std::vector<Observation> out;
    try {
        for (const auto& e : doc.at("entities")) {
            const auto id = e.at("entity_id").get<std::string>();
            const auto& nodes = e.at("nodes");
            auto scored = [&](const IndicatorNode& n) { return nodes.contains(n.id); };
            for (const IndicatorNode* n : nodes_preorder(tree)) {
                if (!scored(*n))
                    continue;
                // Aggregated nodes have scored children; injected ones and
                // leaves do not.
                const auto& kids = n->children();
                if (std::none_of(kids.begin(), kids.end(), scored))
                    out.push_back({id, n->id, nodes.at(n->id).at("score").get<double>(), {}});
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::semantic, fmt::format("scorecard export is missing fields: {}", e.what()));
    }
    return out;
}

double round_half_away(double value, int decimals) {
    const double f = std::pow(10.0, decimals);
    return std::round(value * f) / f;
}

std::string format_one_decimal(double value) {
    double r = round_half_away(value, 1);
    if (r == 0.0)
        r = 0.0;  // no "-0.0"
    return fmt::format("{:.1f}", r);
}

std::string format_exact(double value) {
    return fmt::format("{}", value);
}

PlotTable emit_plot_data(std::span<const ScoreCard> cards, const IndicatorTree& tree, PlotBasis basis) {
    PlotTable t;
    t.dimensions = dimension_ids(tree);
    for (const auto& c : cards)
        t.entities.push_back(c.entity_id);
    t.values.resize(static_cast<Eigen::Index>(t.dimensions.size()), static_cast<Eigen::Index>(cards.size()));
    for (std::size_t j = 0; j < cards.size(); ++j)
        for (std::size_t i = 0; i < t.dimensions.size(); ++i) {
            const NodeScore& ns = require_full(cards[j], t.dimensions[i]);
            t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                basis == PlotBasis::score ? ns.score : ns.contribution;
        }
    return t;
}

std::string plot_table_csv(const PlotTable& table) {
    std::string out = "dimension";
    for (const auto& e : table.entities)
        out += "," + csv_field(e);
    out += "\n";
    for (std::size_t i = 0; i < table.dimensions.size(); ++i) {
        out += csv_field(table.dimensions[i]);
        for (std::size_t j = 0; j < table.entities.size(); ++j)
            out += "," + format_exact(table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        out += "\n";
    }
    return out;
}

}  // namespace cidx
