#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hierglm/pipeline.hpp"

namespace hierglm {

struct ReportFormats {
  bool json = true;
  bool markdown = true;
  bool csv = true;
  bool svg = true;
};

/// Comma-separated subset of json, markdown (md), csv (csv-draws), svg (svg-plots).
ReportFormats parse_formats(std::string_view list);

std::string summary_json(const ModelFit& fit, double hdi_prob);
/// Inverse of the "parameters" block of summary_json.
std::vector<SummaryRow> summary_rows_from_json(std::string_view text);

std::string diagnostics_json(const ModelFit& fit);
std::string comparison_json(const std::vector<ComparisonRow>& rows);
std::string ppc_json(const ModelFit& fit, double hdi_prob);

/// include_run_info adds wall-clock timings and the jobs count, the only
/// fields that may differ between otherwise identical runs.
std::string manifest_json(const RunManifest& manifest, bool include_run_info);

/// Lossless serialization of everything emit_report needs.
std::string bundle_to_json(const Bundle& bundle);
Bundle bundle_from_json(std::string_view text);

std::string summary_markdown(const ModelFit& fit, double hdi_prob);
std::string diagnostics_markdown(const ModelFit& fit);
std::string comparison_markdown(const std::vector<ComparisonRow>& rows);
std::string ppc_markdown(const ModelFit& fit, double hdi_prob);

/// Long format: chain, draw, parameter, value.
std::string draws_csv(const ChainDraws& draws);

/// Writes all requested artifacts plus manifest.json and bundle.json into
/// out_dir, in a fixed order. Returns the paths written. Throws IoError.
std::vector<std::filesystem::path> emit_report(const Bundle& bundle, const std::filesystem::path& out_dir,
                                               const ReportFormats& formats, bool include_run_info = true);

}  // namespace hierglm
