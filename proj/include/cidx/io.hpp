#pragma once

#include "cidx/indicator_tree.hpp"
#include "cidx/scoring.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cidx {

enum class IssueKind { malformed_row, empty_id, unknown_indicator, non_numeric_value, out_of_range, duplicate };
enum class Severity { warning, error };

const char* to_string(IssueKind kind) noexcept;

struct IngestIssue {
    std::size_t row = 0;  // line number in the file, header is line 1
    IssueKind kind = IssueKind::malformed_row;
    Severity severity = Severity::error;
    std::string message;
};

struct IngestDiagnostics {
    std::size_t rows_read = 0;
    std::size_t rows_accepted = 0;
    std::vector<IngestIssue> issues;

    std::size_t rows_rejected() const;
};

struct IngestResult {
    std::vector<Observation> observations;
    IngestDiagnostics diagnostics;
};

/// Reads `entity_id,indicator_id,value[,period]` CSV. Rejected rows are
/// listed in the diagnostics; a repeated (entity, indicator) pair replaces
/// the earlier value and adds a warning. In strict mode the first issue of
/// any severity throws.
IngestResult load_observations(std::istream& in, const IndicatorTree& tree, InputMode mode, bool strict);
IngestResult load_observations_file(const std::string& path, const IndicatorTree& tree, InputMode mode,
                                    bool strict);

void write_observations_csv(std::ostream& out, std::span<const Observation> observations);

enum class ExportFormat { machine, table };

/// machine: JSON with full-precision numbers, nodes in tree order.
/// table: fixed-width text, one row per entity, values rounded to one
/// decimal.
std::string export_scorecards(std::span<const ScoreCard> cards, const IndicatorTree& tree, ExportFormat format);

/// Pre-normalized observations recovered from a machine export: the
/// deepest scored node on every branch of each entity's card.
std::vector<Observation> observations_from_machine_export(std::string_view document, const IndicatorTree& tree);

/// Round half away from zero.
double round_half_away(double value, int decimals = 1);
std::string format_one_decimal(double value);

/// Shortest representation that parses back to the same double.
std::string format_exact(double value);

enum class PlotBasis { score, contribution };

/// Grouped-bar table: rows are dimensions in tree order, columns are
/// entities in input order.
struct PlotTable {
    std::vector<std::string> dimensions;
    std::vector<std::string> entities;
    Eigen::MatrixXd values;
};

PlotTable emit_plot_data(std::span<const ScoreCard> cards, const IndicatorTree& tree, PlotBasis basis);

/// CSV with a leading `dimension` column.
std::string plot_table_csv(const PlotTable& table);

}  // namespace cidx
