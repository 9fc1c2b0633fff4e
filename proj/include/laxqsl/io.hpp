// io.hpp - solution documents (JSON) and long-format CSV series
#pragma once

#include "laxqsl/bvp.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace laxqsl {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolName = "laxqsl";
#ifdef LAXQSL_VERSION
inline constexpr const char* kToolVersion = LAXQSL_VERSION;
#else
inline constexpr const char* kToolVersion = "0.1.0";
#endif

class DocumentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Parameters of the run that produced a document.
struct RunConfig {
    std::string command = "solve";
    int n_sites = 15;
    GuessMode guess = GuessMode::fit;
    std::uint64_t seed = 1;
    int restarts = 4;
    double integration_tol = 1e-10;
    double accept_tol = 1e-8;
    double stop_tol = 1e-12;
    int max_iterations = 100;
    int threads = 1;
    int trajectory_samples = 0;
    std::string initial;  // source document for guess=file
    int schema_version = kSchemaVersion;

    void validate() const;  // throws std::invalid_argument
    SolveOptions solve_options() const;
};

struct SolutionDocument {
    int schema_version = kSchemaVersion;
    std::string tool_name = kToolName;
    std::string tool_version = kToolVersion;
    std::optional<std::string> created;  // omitted (null) unless requested, keeps output reproducible
    RunConfig run;
    BrachSolution solution;
};

nlohmann::json to_json(const SolutionDocument& doc);
SolutionDocument document_from_json(const nlohmann::json& j);

// Two-space indented JSON with a trailing newline.
std::string dump_document(const SolutionDocument& doc);
SolutionDocument parse_document(const std::string& text);

void save_document(const SolutionDocument& doc, const std::filesystem::path& path);
SolutionDocument load_document(const std::filesystem::path& path);

nlohmann::json to_json(const InvariantReport& r);
nlohmann::json to_json(const ScalingFit& f);

// Exact round trip through decimal text.
std::string format_double(double v);

// Long-format series: header "time,site,quantity,value", LF line endings.
struct CsvRow {
    double time = 0.0;
    int site = 0;  // 1-based site, link or eigenvalue index
    std::string quantity;
    double value = 0.0;
};

void write_long_csv(std::ostream& os, const std::vector<CsvRow>& rows);

// Sweep table: "n_sites,converged,l0_tau,j0_tau,residual".
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_sweep_csv(std::istream& is);

}  // namespace laxqsl
