#include "cidx/cli.hpp"

#include "cidx/comparison.hpp"
#include "cidx/error.hpp"
#include "cidx/indicator_tree.hpp"
#include "cidx/io.hpp"
#include "cidx/reports.hpp"
#include "cidx/reproduction.hpp"
#include "cidx/scoring.hpp"
#include "cidx/sensitivity.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

namespace cidx::cli {

namespace {

struct DataArgs {
    std::string tree;
    std::string data;
    std::string mode = "raw_values";
    std::string policy = "reweight";
    bool strict = false;
};

void add_data_options(CLI::App* sub, DataArgs& a) {
    sub->add_option("--tree", a.tree, "Indicator tree (JSON)")->required();
    sub->add_option("--data", a.data, "Observations CSV")->required();
    sub->add_option("--mode", a.mode, "Input mode")->check(CLI::IsMember({"raw_values", "pre_normalized"}));
    sub->add_option("--policy", a.policy, "Missing-data policy")
        ->check(CLI::IsMember({"fail", "reweight", "zero_fill"}));
    sub->add_flag("--strict", a.strict, "Fail on any ingestion issue, including duplicates");
}

ExportFormat parse_format(const std::string& s) {
    return s == "machine" ? ExportFormat::machine : ExportFormat::table;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw Error(ErrorKind::io, fmt::format("cannot write '{}'", path), path);
    f << content;
    if (!f)
        throw Error(ErrorKind::io, fmt::format("failed writing '{}'", path), path);
}

struct Loaded {
    IndicatorTree tree;
    std::vector<ScoreCard> cards;
    std::vector<Observation> observations;
    ScoringOptions options;
};

Loaded load_and_score(const DataArgs& a, std::ostream& err) {
    Loaded l;
    l.tree = load_tree_file(a.tree);
    l.options = ScoringOptions{parse_policy(a.policy), parse_mode(a.mode), a.strict};
    IngestResult ingest = load_observations_file(a.data, l.tree, l.options.mode, a.strict);
    for (const auto& issue : ingest.diagnostics.issues)
        err << fmt::format("{}: {}:{}: {}: {}\n", issue.severity == Severity::warning ? "warning" : "rejected",
                           a.data, issue.row, to_string(issue.kind), issue.message);
    l.observations = std::move(ingest.observations);
    l.cards = score_all(l.tree, l.observations, l.options);
    return l;
}

const ScoreCard& card_for(const std::vector<ScoreCard>& cards, const std::string& id) {
    auto it = std::find_if(cards.begin(), cards.end(), [&](const ScoreCard& c) { return c.entity_id == id; });
    if (it == cards.end())
        throw Error(ErrorKind::unknown_id, fmt::format("no observations for entity '{}'", id), id);
    return *it;
}

PlotBasis parse_basis(const std::string& s) { return s == "score" ? PlotBasis::score : PlotBasis::contribution; }

}  // namespace

ExitStatus run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Composite index engine: anchor normalization, hierarchical weighting, comparison"};
    app.name("cidx");
    app.require_subcommand(1);

    std::string tree_path;
    auto* validate = app.add_subcommand("validate", "Check an indicator tree");
    validate->add_option("--tree", tree_path, "Indicator tree (JSON)")->required();

    DataArgs score_args;
    std::string score_format = "table", score_out, score_plot, score_basis = "contribution";
    auto* score = app.add_subcommand("score", "Score every entity in a data file");
    add_data_options(score, score_args);
    score->add_option("--format", score_format)->check(CLI::IsMember({"machine", "table"}));
    score->add_option("--out", score_out, "Write the scorecards here instead of stdout");
    score->add_option("--plot-data", score_plot, "Write the grouped-bar CSV here");
    score->add_option("--basis", score_basis, "Plot basis")->check(CLI::IsMember({"score", "contribution"}));

    DataArgs compare_args;
    std::vector<std::string> compare_entities;
    std::string compare_format = "table", compare_plot, compare_basis = "contribution";
    auto* compare = app.add_subcommand("compare", "Decompose the composite gap between two entities");
    add_data_options(compare, compare_args);
    compare->add_option("--entities", compare_entities, "a,b")->required()->delimiter(',')->expected(2);
    compare->add_option("--format", compare_format)->check(CLI::IsMember({"machine", "table"}));
    compare->add_option("--plot-data", compare_plot, "Write the grouped-bar CSV here");
    compare->add_option("--basis", compare_basis, "Plot basis")->check(CLI::IsMember({"score", "contribution"}));

    DataArgs rank_args;
    std::string rank_format = "table";
    auto* rank = app.add_subcommand("rank", "Rank entities by composite");
    add_data_options(rank, rank_args);
    rank->add_option("--format", rank_format)->check(CLI::IsMember({"machine", "table"}));

    DataArgs tiers_args;
    std::vector<double> thresholds;
    std::string tiers_format = "table";
    auto* tiers = app.add_subcommand("tiers", "Group ranked entities into tiers");
    add_data_options(tiers, tiers_args);
    tiers->add_option("--thresholds", thresholds, "Descending composite cutoffs, e.g. 30,15")->delimiter(',');
    tiers->add_option("--format", tiers_format)->check(CLI::IsMember({"machine", "table"}));

    DataArgs sens_args;
    sens_args.mode = "pre_normalized";
    SensitivityOptions sens;
    std::string sens_format = "table";
    auto* sensitivity = app.add_subcommand("sensitivity", "Monte-Carlo weight perturbation");
    add_data_options(sensitivity, sens_args);
    sensitivity->add_option("--magnitude", sens.magnitude, "Multipliers drawn from [1-m, 1+m]")->required();
    sensitivity->add_option("--samples", sens.n_samples)->check(CLI::PositiveNumber);
    sensitivity->add_option("--seed", sens.seed)->required();
    sensitivity->add_flag("--all-levels", sens.all_levels, "Perturb every sibling group");
    sensitivity->add_option("--format", sens_format)->check(CLI::IsMember({"machine", "table"}));

    std::string case_name, export_data, export_tree;
    std::optional<double> tolerance;
    auto* reproduce = app.add_subcommand("reproduce", "Verify a built-in published case");
    reproduce->add_option("--case", case_name)->required()->check(CLI::IsMember({"us-china", "china-regions"}));
    reproduce->add_option("--tolerance", tolerance)->check(CLI::NonNegativeNumber);
    reproduce->add_option("--export-data", export_data, "Write the case inputs as observation CSV");
    reproduce->add_option("--export-tree", export_tree, "Write the case tree as JSON");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return ExitStatus::success;
        }
        app.exit(e, err, err);
        return ExitStatus::usage;
    }

    try {
        if (*validate) {
            IndicatorTree tree;
            try {
                std::ifstream in(tree_path, std::ios::binary);
                if (!in)
                    throw Error(ErrorKind::io, fmt::format("cannot open tree file '{}': file not found", tree_path));
                std::ostringstream buf;
                buf << in.rdbuf();
                tree = parse_tree_unchecked(buf.str());
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::semantic)
                    throw;
                err << "invalid: " << e.what() << "\n";
                return ExitStatus::check_failed;
            }
            const ValidationReport report = validate_tree(tree);
            if (!report.ok()) {
                for (const auto& v : report.violations)
                    err << fmt::format("invalid: {}: {}: {}\n", v.path, v.kind, v.message);
                return ExitStatus::check_failed;
            }
            const auto leaves = flatten_leaves(tree);
            out << fmt::format("valid: {} nodes, {} dimensions, {} leaves\n", nodes_preorder(tree).size(),
                               tree.dimensions().size(), leaves.size());
            for (const auto& l : leaves)
                out << fmt::format("  {}  {}\n", l.id, format_exact(l.effective_weight));
            return ExitStatus::success;
        }

        if (*score) {
            const Loaded l = load_and_score(score_args, err);
            const std::string doc = export_scorecards(l.cards, l.tree, parse_format(score_format));
            if (!score_plot.empty())
                write_file(score_plot, plot_table_csv(emit_plot_data(l.cards, l.tree, parse_basis(score_basis))));
            if (score_out.empty())
                out << doc;
            else
                write_file(score_out, doc);
            return ExitStatus::success;
        }

        if (*compare) {
            const Loaded l = load_and_score(compare_args, err);
            const ScoreCard& a = card_for(l.cards, compare_entities.at(0));
            const ScoreCard& b = card_for(l.cards, compare_entities.at(1));
            const GapReport gap = gap_decompose(a, b, l.tree);
            if (!compare_plot.empty()) {
                const std::vector<ScoreCard> pair{a, b};
                write_file(compare_plot, plot_table_csv(emit_plot_data(pair, l.tree, parse_basis(compare_basis))));
            }
            out << export_gap(gap, parse_format(compare_format));
            return ExitStatus::success;
        }

        if (*rank) {
            const Loaded l = load_and_score(rank_args, err);
            out << export_ranking(rank_entities(l.cards), parse_format(rank_format));
            return ExitStatus::success;
        }

        if (*tiers) {
            const Loaded l = load_and_score(tiers_args, err);
            const auto ranked = rank_entities(l.cards);
            out << export_tiers(assign_tiers(ranked, thresholds), ranked, parse_format(tiers_format));
            return ExitStatus::success;
        }

        if (*sensitivity) {
            const Loaded l = load_and_score(sens_args, err);
            sens.scoring = l.options;
            out << export_sensitivity(perturb_weights(l.tree, l.observations, sens), parse_format(sens_format));
            return ExitStatus::success;
        }

        if (*reproduce) {
            if (!export_data.empty() || !export_tree.empty()) {
                const ReproductionCase c = builtin_case(case_name);
                if (!export_tree.empty())
                    write_file(export_tree, serialize_tree(c.tree));
                if (!export_data.empty()) {
                    std::ostringstream csv;
                    write_observations_csv(csv, c.inputs);
                    write_file(export_data, csv.str());
                }
            }
            const VerificationReport report = verify_case(case_name, tolerance);
            out << format_verification(report);
            return report.pass ? ExitStatus::success : ExitStatus::check_failed;
        }
    } catch (const Error& e) {
        err << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
        return ExitStatus::data_error;
    }
    return ExitStatus::usage;
}

}  // namespace cidx::cli
