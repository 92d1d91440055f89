#pragma once

// Text renderings of comparison and sensitivity results. Machine output
// is JSON with full-precision numbers; table output rounds to one decimal.

#include "cidx/comparison.hpp"
#include "cidx/io.hpp"
#include "cidx/sensitivity.hpp"

#include <span>
#include <string>

namespace cidx {

std::string export_ranking(std::span<const RankedEntity> ranked, ExportFormat format);
std::string export_tiers(std::span<const TierAssignment> tiers, std::span<const RankedEntity> ranked,
                         ExportFormat format);
std::string export_gap(const GapReport& gap, ExportFormat format);
std::string export_sensitivity(const SensitivityReport& report, ExportFormat format);

}  // namespace cidx
