#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "semdrift/embedding.hpp"

namespace semdrift::trend {

enum class TrendMode { word_pair, centroid_pair };

std::string trend_mode_name(TrendMode m);
std::optional<TrendMode> parse_trend_mode(std::string_view name);

struct TrendQuery {
    std::string base_term;
    std::vector<std::string> relative_terms;  // at least one
    std::vector<std::string> slice_labels;    // chronological
    TrendMode mode = TrendMode::word_pair;
};

enum class CellFlag { none, max, min, missing };

const char* cell_flag_name(CellFlag f);

// A missing value means the term was absent from that slice's vocabulary;
// it renders as "0.0" in exports and never participates in extrema.
struct TrendCell {
    std::optional<double> value;
    CellFlag flag = CellFlag::none;
};

struct TrendRow {
    std::string term;
    std::vector<TrendCell> cells;  // aligned to query.slice_labels
};

struct TrendTable {
    TrendQuery query;
    std::vector<TrendRow> rows;
    std::string provenance;  // config hash, empty outside the pipeline
};

// Raised when the base term is absent from every requested model.
struct DegenerateQueryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flags the earliest maximum and, among the remaining cells, the earliest
// minimum of the non-missing values; fewer than two non-missing cells get no
// extrema. Missing cells are flagged missing.
std::vector<TrendCell> annotate_extrema(std::vector<TrendCell> row);

// cell(term, t) = pair_distance in word_pair mode, or the scaled cosine
// distance between the topic centroids of base and term in centroid_pair
// mode. Terms are pipeline-normalized before lookup.
TrendTable compute_trend(const std::map<std::string, embedding::EmbeddingModel>& models,
                         const TrendQuery& query);

// header "term,<label>,..."; values with 3 fractional digits, missing cells
// as "0.0"; each row followed by a parallel "<term>#flags" row
void export_table_csv(const TrendTable& table, const std::filesystem::path& path);
void export_table_json(const TrendTable& table, const std::filesystem::path& path);

// Deterministic line chart, one polyline per term; missing cells break the
// line. Byte-stable for identical input.
void export_plot_svg(const TrendTable& table, const std::filesystem::path& path);

// 2-D scatter of the terms' vectors projected onto their top-2 principal
// components (sign fixed so the largest-magnitude loading is positive).
void export_projection_svg(const embedding::EmbeddingModel& model,
                           const std::vector<std::string>& terms,
                           const std::filesystem::path& path,
                           const std::string& provenance = "");

// Projection backing export_projection_svg: (term, x, y) per present term.
struct ProjectedTerm {
    std::string term;
    double x = 0.0;
    double y = 0.0;
};
std::vector<ProjectedTerm> project_terms(const embedding::EmbeddingModel& model,
                                         const std::vector<std::string>& terms);

}  // namespace semdrift::trend
