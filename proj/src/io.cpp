#include "merton/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>

#include "merton/error.hpp"
#include "merton/model.hpp"

namespace merton {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = line.find(sep, pos);
        out.push_back(trim(line.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos)));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

std::int64_t parse_field(std::string_view field, const char* name, std::size_t line) {
    std::int64_t value = 0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    if (!field.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (field.empty() || ec != std::errc() || ptr != last) {
        throw ParseError("invalid integer '" + std::string(field) + "' for " + name + " at line " +
                             std::to_string(line),
                         line);
    }
    if (value < 0) {
        throw ParseError(std::string("negative ") + name + " at line " + std::to_string(line), line);
    }
    return value;
}

template <typename T>
T field_as(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw ParseError(std::string("missing field '") + key + "'", 0);
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ParseError(std::string("field '") + key + "' has the wrong type", 0);
    }
}

std::optional<double> optional_number(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return field_as<double>(j, key);
}

}  // namespace

DefaultHistory parse_history_csv_text(std::string_view text) {
    std::vector<std::pair<std::string_view, std::size_t>> lines;
    std::size_t pos = 0;
    std::size_t number = 0;
    while (pos <= text.size()) {
        const std::size_t end = text.find('\n', pos);
        const std::string_view raw = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        ++number;
        lines.emplace_back(trim(raw), number);
        if (end == std::string_view::npos) break;
        pos = end + 1;
    }
    while (!lines.empty() && lines.back().first.empty()) lines.pop_back();
    if (lines.empty()) throw ParseError("empty history file: expected header 'year,n,k'", 1);

    std::string_view header = lines.front().first;
    if (header.size() >= 3 && header.substr(0, 3) == "\xEF\xBB\xBF") header.remove_prefix(3);
    const auto names = split(header, ',');
    if (names.size() != 3 || names[0] != "year" || names[1] != "n" || names[2] != "k") {
        throw ParseError("expected header 'year,n,k' at line 1", 1);
    }

    std::vector<HistoryRow> rows;
    std::map<std::int64_t, std::size_t> seen;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto [line, at] = lines[i];
        if (line.empty()) throw ParseError("empty row at line " + std::to_string(at), at);
        const auto fields = split(line, ',');
        if (fields.size() != 3) {
            throw ParseError("expected 3 fields at line " + std::to_string(at) + ", got " +
                                 std::to_string(fields.size()),
                             at);
        }
        const std::int64_t year = parse_field(fields[0], "year", at);
        const std::int64_t n = parse_field(fields[1], "n", at);
        const std::int64_t k = parse_field(fields[2], "k", at);
        if (n < 1) throw ParseError("n must be >= 1 at line " + std::to_string(at), at);
        if (k > n) throw ParseError("k exceeds n at line " + std::to_string(at), at);
        if (year > 1000000) throw ParseError("year out of range at line " + std::to_string(at), at);
        if (auto [it, fresh] = seen.emplace(year, at); !fresh) {
            throw ParseError("duplicate year " + std::to_string(year) + " at line " + std::to_string(at) +
                                 " (first at line " + std::to_string(it->second) + ")",
                             at);
        }
        rows.push_back({static_cast<int>(year), n, k});
    }
    std::sort(rows.begin(), rows.end(), [](const HistoryRow& a, const HistoryRow& b) { return a.year < b.year; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].year != rows[i - 1].year + 1) {
            throw ValidationError("years are not contiguous: missing year " + std::to_string(rows[i - 1].year + 1));
        }
    }
    return DefaultHistory(std::move(rows));
}

DefaultHistory parse_history_csv(const std::filesystem::path& path) {
    return parse_history_csv_text(read_text_file(path));
}

std::string format_history_csv(const DefaultHistory& history) {
    std::string out = "year,n,k\n";
    for (const auto& r : history.rows()) {
        out += std::to_string(r.year);
        out += ',';
        out += std::to_string(r.n);
        out += ',';
        out += std::to_string(r.k);
        out += '\n';
    }
    return out;
}

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 12);
    if (ec != std::errc()) throw NumericalError("format_number: conversion failed");
    return std::string(buf, ptr);
}

std::string format_curve_csv(const CurveTable& table) {
    std::string out;
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
        if (j) out += ',';
        out += table.columns[j];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.columns.size()) throw DomainError("format_curve_csv: row width differs from header");
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out += ',';
            out += format_number(row[j]);
        }
        out += '\n';
    }
    return out;
}

double parse_double(std::string_view text) {
    text = trim(text);
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (!text.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (text.empty() || ec != std::errc() || ptr != last) {
        throw ParseError("invalid number '" + std::string(text) + "'", 0);
    }
    return value;
}

std::int64_t parse_count(std::string_view text) {
    const double v = parse_double(text);
    if (!(v >= 0.0) || v != std::floor(v) || v > 9.0e15) {
        throw ParseError("expected a non-negative integer, got '" + std::string(text) + "'", 0);
    }
    return static_cast<std::int64_t>(v);
}

std::vector<double> parse_range(std::string_view text) {
    const auto parts = split(text, ':');
    if (parts.size() == 1) return {parse_double(parts[0])};
    if (parts.size() != 3) throw ParseError("range must be start:stop:step, got '" + std::string(text) + "'", 0);
    const double start = parse_double(parts[0]);
    const double stop = parse_double(parts[1]);
    const double step = parse_double(parts[2]);
    if (!std::isfinite(start) || !std::isfinite(stop) || !(step > 0.0) || !std::isfinite(step)) {
        throw ParseError("range needs finite bounds and a positive step: '" + std::string(text) + "'", 0);
    }
    if (stop < start) throw ParseError("range stop is below start: '" + std::string(text) + "'", 0);
    const double span = (stop - start) / step;
    const auto count = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
    if (count > 10000000) throw ParseError("range has too many points", 0);
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
}

FitSummary summarize(const FitResult& fit) {
    FitSummary s;
    s.family = fit.family;
    s.p_hat = fit.params_hat.p();
    s.rho_A_hat = fit.params_hat.rho_A();
    s.rho_D_hat = fit.rho_D_hat;
    s.kernel_param_hat = fit.params_hat.kernel().parameter();
    s.log_posterior = fit.log_posterior;
    s.converged = fit.converged;
    s.non_identifiable = fit.non_identifiable;
    s.waic = fit.waic;
    s.wbic = fit.wbic;
    s.seed = fit.seed;
    s.n_paths = fit.n_paths;
    return s;
}

nlohmann::json to_json(const FitSummary& fit) {
    nlohmann::json j;
    j["family"] = std::string(to_string(fit.family));
    j["p_hat"] = fit.p_hat;
    j["rho_A_hat"] = fit.rho_A_hat;
    j["rho_D_hat"] = fit.rho_D_hat;
    j["kernel_param_hat"] = fit.kernel_param_hat;
    j["log_posterior"] = fit.log_posterior;
    j["converged"] = fit.converged;
    j["non_identifiable"] = fit.non_identifiable;
    if (fit.waic) j["waic"] = *fit.waic;
    if (fit.wbic) j["wbic"] = *fit.wbic;
    j["seed"] = fit.seed;
    j["n_paths"] = fit.n_paths;
    j["schema_version"] = fit.schema_version;
    return j;
}

FitSummary fit_summary_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("fit JSON must be an object", 0);
    FitSummary s;
    try {
        s.family = parse_kernel_family(field_as<std::string>(j, "family"));
    } catch (const DomainError& e) {
        throw ParseError(e.what(), 0);
    }
    s.p_hat = field_as<double>(j, "p_hat");
    s.rho_A_hat = field_as<double>(j, "rho_A_hat");
    s.rho_D_hat = field_as<double>(j, "rho_D_hat");
    s.kernel_param_hat = field_as<double>(j, "kernel_param_hat");
    s.log_posterior = field_as<double>(j, "log_posterior");
    s.converged = field_as<bool>(j, "converged");
    s.non_identifiable = field_as<bool>(j, "non_identifiable");
    s.waic = optional_number(j, "waic");
    s.wbic = optional_number(j, "wbic");
    s.seed = field_as<std::uint64_t>(j, "seed");
    s.n_paths = field_as<std::size_t>(j, "n_paths");
    s.schema_version = field_as<int>(j, "schema_version");
    if (s.schema_version != kSchemaVersion) {
        throw ParseError("unsupported schema_version " + std::to_string(s.schema_version), 0);
    }
    return s;
}

ModelParams TruthSidecar::params() const { return ModelParams(p, rho_A, DecayKernel::of(family, kernel_param)); }

nlohmann::json to_json(const TruthSidecar& truth) {
    nlohmann::json j;
    j["family"] = std::string(to_string(truth.family));
    j["p"] = truth.p;
    j["rho_A"] = truth.rho_A;
    j["kernel_param"] = truth.kernel_param;
    j["years"] = truth.years;
    j["cohort_size"] = truth.cohort_size;
    j["first_year"] = truth.first_year;
    j["seed"] = truth.seed;
    j["schema_version"] = truth.schema_version;
    return j;
}

TruthSidecar truth_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("truth JSON must be an object", 0);
    TruthSidecar t;
    try {
        t.family = parse_kernel_family(field_as<std::string>(j, "family"));
    } catch (const DomainError& e) {
        throw ParseError(e.what(), 0);
    }
    t.p = field_as<double>(j, "p");
    t.rho_A = field_as<double>(j, "rho_A");
    t.kernel_param = field_as<double>(j, "kernel_param");
    t.years = field_as<std::int64_t>(j, "years");
    t.cohort_size = field_as<std::int64_t>(j, "cohort_size");
    t.first_year = field_as<int>(j, "first_year");
    t.seed = field_as<std::uint64_t>(j, "seed");
    t.schema_version = field_as<int>(j, "schema_version");
    return t;
}

nlohmann::json panel_stats_json(const DefaultHistory& history) {
    const PanelStats stats = estimator_z(history);
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["years"] = history.size();
    j["total_obligors"] = history.total_obligors();
    j["total_defaults"] = history.total_defaults();
    j["z"] = stats.z;
    j["per_year_rates"] = stats.per_year_rates;
    return j;
}

nlohmann::json comparison_json(const std::vector<FamilyCriteria>& rows, std::size_t years, WaicUnit unit,
                               std::size_t n_draws) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["years"] = years;
    j["waic_unit"] = to_string(unit);
    j["n_draws"] = n_draws;
    nlohmann::json models = nlohmann::json::object();
    for (const auto& r : rows) {
        nlohmann::json m;
        m["waic"] = r.waic.waic;
        m["wbic"] = r.wbic;
        m["lppd"] = r.waic.lppd;
        m["p_waic"] = r.waic.p_waic;
        m["acceptance_rate"] = r.acceptance_rate;
        m["wbic_acceptance_rate"] = r.wbic_acceptance_rate;
        models[std::string(to_string(r.family))] = m;
    }
    j["models"] = models;
    return j;
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

nlohmann::json parse_json_file(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what(), 0);
    }
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("error reading '" + path.string() + "'");
    return text;
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("error writing '" + path.string() + "'");
}

}  // namespace merton
