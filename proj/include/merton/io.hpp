#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "merton/fit.hpp"
#include "merton/portfolio.hpp"
#include "merton/posterior.hpp"

namespace merton {

inline constexpr int kSchemaVersion = 1;

// ---- history CSV -----------------------------------------------------------

/*!
 * Parses `year,n,k` text. Rows may come in any order and are sorted by year.
 * Malformed rows, negative or non-integer fields and k > n raise ParseError
 * with the 1-based line number; duplicate years also raise ParseError.
 * Missing years raise ValidationError naming the first absent year.
 */
DefaultHistory parse_history_csv_text(std::string_view text);

/// Reads and parses a history file; IoError if it cannot be read.
DefaultHistory parse_history_csv(const std::filesystem::path& path);

/// Header plus one row per year, LF line endings.
std::string format_history_csv(const DefaultHistory& history);

// ---- curve CSV ---------------------------------------------------------------

struct CurveTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

/// Floats as 12 significant digits in C-locale form; nan and inf spelled out.
std::string format_number(double value);
std::string format_curve_csv(const CurveTable& table);

// ---- numbers and ranges --------------------------------------------------------

/// Locale-independent decimal parse of the whole string. ParseError otherwise.
double parse_double(std::string_view text);
/// Integer that may be written as 1e5; rejects fractions and negatives.
std::int64_t parse_count(std::string_view text);

/// `start:stop:step` (inclusive of stop up to rounding) or a single value.
/// step must be positive and stop >= start.
std::vector<double> parse_range(std::string_view text);

// ---- JSON ------------------------------------------------------------------------

/// The fields emitted for a fit.
struct FitSummary {
    KernelFamily family = KernelFamily::Exponential;
    double p_hat = 0.0;
    double rho_A_hat = 0.0;
    double rho_D_hat = 0.0;
    double kernel_param_hat = 0.0;
    double log_posterior = 0.0;
    bool converged = false;
    bool non_identifiable = false;
    std::optional<double> waic;
    std::optional<double> wbic;
    std::uint64_t seed = 0;
    std::size_t n_paths = 0;
    int schema_version = kSchemaVersion;

    friend bool operator==(const FitSummary&, const FitSummary&) = default;
};

FitSummary summarize(const FitResult& fit);
nlohmann::json to_json(const FitSummary& fit);
/// Throws ParseError on missing or mistyped fields.
FitSummary fit_summary_from_json(const nlohmann::json& j);

/// Parameters and panel shape of a generated history.
struct TruthSidecar {
    KernelFamily family = KernelFamily::Exponential;
    double p = 0.0;
    double rho_A = 0.0;
    double kernel_param = 0.0;
    std::int64_t years = 0;
    std::int64_t cohort_size = 0;
    int first_year = 1;
    std::uint64_t seed = 0;
    int schema_version = kSchemaVersion;

    ModelParams params() const;
    friend bool operator==(const TruthSidecar&, const TruthSidecar&) = default;
};

nlohmann::json to_json(const TruthSidecar& truth);
TruthSidecar truth_from_json(const nlohmann::json& j);

nlohmann::json panel_stats_json(const DefaultHistory& history);

/// {"schema_version", "years", "waic_unit", "n_draws", "models": {family: {...}}}.
nlohmann::json comparison_json(const std::vector<FamilyCriteria>& rows, std::size_t years,
                               WaicUnit unit, std::size_t n_draws);

/// Two-space indented dump with a trailing newline.
std::string dump_json(const nlohmann::json& j);
nlohmann::json parse_json_file(const std::filesystem::path& path);

// ---- files -----------------------------------------------------------------------

std::string read_text_file(const std::filesystem::path& path);
/// Writes bytes verbatim (no newline translation). IoError on failure.
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace merton
