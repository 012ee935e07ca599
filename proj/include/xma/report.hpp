#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "xma/config.hpp"
#include "xma/encoders.hpp"
#include "xma/evaluation.hpp"
#include "xma/gap_geometry.hpp"
#include "xma/pair_selection.hpp"

namespace xma {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolName = "xmalign";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kReportSchemaVersion = 1;

// Top-level report envelope: schema_version, tool, seed, config echo.
// Subcommands attach their payloads under dedicated keys.
Json report_skeleton(const ExperimentConfig& config);

Json config_json(const ExperimentConfig& config);

// The echoed config as parseable `key = value` lines; feeding this back
// through the parser reproduces the run.
std::string config_echo_text(const ExperimentConfig& config);

Json training_log_json(const TrainingLog& log);
Json eval_report_json(const EvalReport& report);
Json gap_report_json(const GapReport& report);

// Full manifest: one record per clip (clip id, mode, indices, scores,
// low-confidence flag).
Json annotations_json(const std::vector<MomentAnnotation>& annotations,
                      PairSource mode);
// Condensed form carried inside run reports.
Json annotations_summary_json(const std::vector<MomentAnnotation>& annotations,
                              PairSource mode);

Json error_json(const std::string& type, const std::string& message);

// Copy with every key ending in "_ms" removed, recursively. Determinism
// comparisons run on the stripped form.
Json strip_wall_clock(const Json& j);

void write_json(const std::filesystem::path& path, const Json& j);

// Table analog row: class-level retrieval R@1/R@5 plus the paired-instance
// R@1 as context.
struct AblationRow {
    std::string loss;
    std::string pair_source;
    std::size_t duration = 0;
    double recall1 = 0.0; // generated-frame retrieval, the headline metric
    double recall5 = 0.0;
    double direct_recall1 = 0.0; // audio embedding against real frames
    double instance_recall1 = 0.0;
};

void write_ablation_csv(const std::filesystem::path& path,
                        const std::vector<AblationRow>& rows);

// columns: modality, class, x, y (visual rows first, then audio).
void write_projection_csv(const std::filesystem::path& path,
                          const Projection2D& projection,
                          const std::vector<std::uint32_t>& labels);

// columns: class, recall_at_1 (-1 marks a class with no queries).
void write_per_class_csv(const std::filesystem::path& path, const Vec& recalls);

// columns: clip_id, timestep, weight.
struct SaliencyRow {
    std::uint32_t clip_id = 0;
    Vec weights;
};
void write_saliency_csv(const std::filesystem::path& path,
                        const std::vector<SaliencyRow>& rows);

// Round-trip-exact decimal form used in every CSV cell.
std::string format_double(double v);

} // namespace xma
