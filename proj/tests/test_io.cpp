#include <doctest.h>

#include "cidx/error.hpp"
#include "cidx/io.hpp"
#include "cidx/reproduction.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace cidx;

namespace {

const ScoringOptions kPre{MissingPolicy::fail, InputMode::pre_normalized, true};

IngestResult load(const std::string& text, InputMode mode = InputMode::pre_normalized, bool strict = false,
                  const IndicatorTree& tree = ai_index_tree()) {
    std::istringstream in(text);
    return load_observations(in, tree, mode, strict);
}

std::vector<ScoreCard> case_cards(const std::string& name) {
    const ReproductionCase c = builtin_case(name);
    return score_all(c.tree, c.inputs, kPre);
}

std::vector<std::string> lines_of(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);)
        out.push_back(l);
    return out;
}

// Last whitespace-separated token of a table row.
std::string last_cell(const std::string& row) {
    return row.substr(row.find_last_of(' ') + 1);
}

}  // namespace

TEST_SUITE("io_reporting") {

TEST_CASE("three well-formed rows") {
    const auto r = load("entity_id,indicator_id,value,period\n"
                        "us,research_development,56.5,2024\n"
                        "us,social_impact,41,2024\n"
                        "china,social_impact,70,\n");
    CHECK(r.diagnostics.rows_read == 3);
    CHECK(r.diagnostics.rows_accepted == 3);
    CHECK(r.diagnostics.issues.empty());
    REQUIRE(r.observations.size() == 3);
    CHECK(r.observations[0].value == 56.5);
    CHECK(r.observations[0].period == "2024");
    CHECK(r.observations[2].period.empty());
}

TEST_CASE("three-column header, CRLF, BOM, blank lines and quoting") {
    const auto r = load("\xEF\xBB\xBF" "entity_id,indicator_id,value\r\n"
                        "\r\n"
                        "\"Region, East\",social_impact,12.5\r\n");
    REQUIRE(r.observations.size() == 1);
    CHECK(r.observations[0].entity_id == "Region, East");
    CHECK(r.observations[0].value == 12.5);
    CHECK(r.diagnostics.rows_read == 1);
}

TEST_CASE("unknown indicator is reported at its line") {
    const auto r = load("entity_id,indicator_id,value,period\n"
                        "us,research_development,56.5,\n"
                        "us,quantum_vibes,12,\n");
    REQUIRE(r.diagnostics.issues.size() == 1);
    const auto& issue = r.diagnostics.issues[0];
    CHECK(issue.row == 3);
    CHECK(issue.kind == IssueKind::unknown_indicator);
    CHECK(issue.severity == Severity::error);
    CHECK(issue.message.find("quantum_vibes") != std::string::npos);
    CHECK(r.diagnostics.rows_accepted == 1);
    CHECK(r.diagnostics.rows_rejected() == 1);
}

TEST_CASE("strict mode throws on the first issue") {
    try {
        load("entity_id,indicator_id,value,period\nus,quantum_vibes,12,\n", InputMode::pre_normalized, true);
        FAIL("expected strict failure");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    }
}

TEST_CASE("duplicates: last wins with a warning, or an error in strict mode") {
    const std::string text = "entity_id,indicator_id,value,period\n"
                             "us,social_impact,10,\n"
                             "us,social_impact,41,\n";
    const auto r = load(text);
    REQUIRE(r.observations.size() == 1);
    CHECK(r.observations[0].value == 41.0);
    REQUIRE(r.diagnostics.issues.size() == 1);
    CHECK(r.diagnostics.issues[0].kind == IssueKind::duplicate);
    CHECK(r.diagnostics.issues[0].severity == Severity::warning);
    CHECK(r.diagnostics.issues[0].row == 3);
    CHECK(r.diagnostics.rows_accepted == 2);
    CHECK(r.diagnostics.rows_rejected() == 0);
    CHECK_THROWS_AS(load(text, InputMode::pre_normalized, true), Error);
}

TEST_CASE("each rejection kind") {
    const auto r = load("entity_id,indicator_id,value,period\n"
                        "us,social_impact,abc,\n"
                        "us,social_impact,nan,\n"
                        "us,social_impact,140,\n"
                        ",social_impact,4,\n"
                        "us,social_impact\n"
                        "us,\"unterminated,4,\n"
                        "us,ai_index,50,\n");
    std::vector<IssueKind> kinds;
    for (const auto& i : r.diagnostics.issues)
        kinds.push_back(i.kind);
    const std::vector<IssueKind> want{IssueKind::non_numeric_value, IssueKind::non_numeric_value,
                                      IssueKind::out_of_range,      IssueKind::empty_id,
                                      IssueKind::malformed_row,     IssueKind::malformed_row};
    CHECK(kinds == want);
    // The root accepts an injected score in pre-normalized mode.
    CHECK(r.observations.size() == 1);
    CHECK(r.diagnostics.rows_read == r.diagnostics.rows_accepted + r.diagnostics.rows_rejected());

    const auto raw = load("entity_id,indicator_id,value\nus,ai_index,50\nus,social_impact,140\n",
                          InputMode::raw_values);
    REQUIRE(raw.diagnostics.issues.size() == 1);
    CHECK(raw.diagnostics.issues[0].kind == IssueKind::unknown_indicator);
    CHECK(raw.observations.size() == 1);  // raw values may exceed the anchors
}

TEST_CASE("header problems are syntax errors") {
    for (const char* text : {"entity,indicator,value\nus,social_impact,1\n", "", "\n\n"}) {
        try {
            load(text);
            FAIL("expected syntax error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::syntax);
        }
    }
    try {
        load_observations_file("/nonexistent/dir/data.csv", ai_index_tree(), InputMode::pre_normalized, false);
        FAIL("expected io error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::io);
    }
}

TEST_CASE("regional table export") {
    const auto cards = case_cards("china-regions");
    const auto rows = lines_of(export_scorecards(cards, ai_index_tree(), ExportFormat::table));
    REQUIRE(rows.size() == 8);
    CHECK(rows[0].rfind("entity", 0) == 0);
    CHECK(last_cell(rows[0]) == "composite");
    const std::vector<std::pair<std::string, std::string>> want{
        {"east_china", "40.0"},     {"north_china", "35.9"},     {"south_china", "28.4"},
        {"southwest_china", "10.1"}, {"central_china", "10.8"},  {"northwest_china", "8.6"},
        {"northeast_china", "8.9"}};
    for (std::size_t i = 0; i < want.size(); ++i) {
        CHECK(rows[i + 1].rfind(want[i].first, 0) == 0);
        CHECK(last_cell(rows[i + 1]) == want[i].second);
    }
    // All rows share one width per column, so lines end at the same place.
    for (const auto& r : rows)
        CHECK(r.size() == rows[0].size());
}

TEST_CASE("empty card list gives a header-only table") {
    const auto rows = lines_of(export_scorecards(std::vector<ScoreCard>{}, ai_index_tree(), ExportFormat::table));
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].rfind("entity", 0) == 0);
}

TEST_CASE("machine export keeps full precision") {
    const auto cards = case_cards("us-china");
    const std::string doc = export_scorecards(cards, ai_index_tree(), ExportFormat::machine);
    const auto j = nlohmann::json::parse(doc);
    CHECK(j["index"] == "ai_index");
    CHECK(j["fingerprint"] == tree_fingerprint(ai_index_tree()));
    REQUIRE(j["entities"].size() == 2);
    const double us = j["entities"][0]["composite"].get<double>();
    CHECK(std::abs(us - 68.18) <= 1e-9);
    CHECK(std::abs(us - 68.1) > 0.05);
    CHECK(j["entities"][0]["nodes"]["social_impact"]["contribution"].get<double>() ==
          doctest::Approx(4.1).epsilon(1e-12));
    CHECK(j["entities"][1]["policy"] == "fail");
}

TEST_CASE("grouped-bar data") {
    SUBCASE("US/China contributions") {
        const auto cards = case_cards("us-china");
        const PlotTable t = emit_plot_data(cards, ai_index_tree(), PlotBasis::contribution);
        CHECK(t.values.rows() == 7);
        CHECK(t.values.cols() == 2);
        CHECK(t.entities == std::vector<std::string>{"us", "china"});
        CHECK(t.dimensions.back() == "social_impact");
        CHECK(t.values(6, 0) == doctest::Approx(4.1).epsilon(1e-12));
        CHECK(t.values(6, 1) == doctest::Approx(7.0).epsilon(1e-12));
        const auto csv = lines_of(plot_table_csv(t));
        REQUIRE(csv.size() == 8);
        CHECK(csv[0] == "dimension,us,china");
        CHECK(csv[7].rfind("social_impact,", 0) == 0);
    }

    SUBCASE("regional scores equal the inputs") {
        const ReproductionCase c = builtin_case("china-regions");
        const auto cards = score_all(c.tree, c.inputs, kPre);
        const PlotTable t = emit_plot_data(cards, c.tree, PlotBasis::score);
        for (const auto& o : c.inputs) {
            const auto row = std::find(t.dimensions.begin(), t.dimensions.end(), o.indicator_id) - t.dimensions.begin();
            const auto col = std::find(t.entities.begin(), t.entities.end(), o.entity_id) - t.entities.begin();
            CHECK(t.values(row, col) == o.value);
        }
    }

    SUBCASE("all-zero entity") {
        std::vector<Observation> obs;
        for (const auto& d : dimension_ids(ai_index_tree()))
            obs.push_back({"nil", d, 0.0, {}});
        const auto cards = score_all(ai_index_tree(), obs, kPre);
        const PlotTable t = emit_plot_data(cards, ai_index_tree(), PlotBasis::contribution);
        CHECK(t.values.cols() == 1);
        CHECK(t.values.isZero());
    }

    SUBCASE("partial coverage is refused") {
        const std::vector<Observation> obs{{"p", "social_impact", 50.0, {}}};
        const auto cards = score_all(ai_index_tree(), obs, {MissingPolicy::reweight, InputMode::pre_normalized, true});
        try {
            emit_plot_data(cards, ai_index_tree(), PlotBasis::score);
            FAIL("expected coverage error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::incomplete_coverage);
        }
    }
}

TEST_CASE("export round trip reproduces composites") {
    for (const auto& name : builtin_case_names()) {
        const ReproductionCase c = builtin_case(name);
        const auto cards = score_all(c.tree, c.inputs, kPre);
        const auto recovered =
            observations_from_machine_export(export_scorecards(cards, c.tree, ExportFormat::machine), c.tree);
        CHECK(recovered.size() == c.inputs.size());
        const auto again = score_all(c.tree, recovered, kPre);
        REQUIRE(again.size() == cards.size());
        for (std::size_t i = 0; i < cards.size(); ++i)
            CHECK(std::abs(again[i].composite - cards[i].composite) <= 1e-9);

        std::ostringstream csv;
        write_observations_csv(csv, c.inputs);
        const auto reread = load(csv.str());
        CHECK(reread.diagnostics.issues.empty());
        REQUIRE(reread.observations.size() == c.inputs.size());
        for (std::size_t i = 0; i < c.inputs.size(); ++i)
            CHECK(reread.observations[i].value == c.inputs[i].value);
    }
    CHECK_THROWS_AS(observations_from_machine_export("{not json", ai_index_tree()), Error);
    CHECK_THROWS_AS(observations_from_machine_export(R"({"index": "x"})", ai_index_tree()), Error);
}

TEST_CASE("rounding helpers") {
    CHECK(round_half_away(0.25) == 0.3);
    CHECK(round_half_away(-0.25) == -0.3);
    CHECK(round_half_away(68.18) == 68.2);
    CHECK(format_one_decimal(-0.04) == "0.0");
    CHECK(format_one_decimal(35.865) == "35.9");
    CHECK(format_exact(0.1 + 0.2) == "0.30000000000000004");
    CHECK(std::stod(format_exact(68.17999999999999)) == 68.17999999999999);
}

}
