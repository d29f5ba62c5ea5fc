#pragma once

#include <json.hpp>

#include "okbnb/bnb.hpp"

namespace okbnb {

inline constexpr const char* kVersion = "0.1.0";

// CSV reading failures carry the 1-based row that broke.
struct CsvError : std::runtime_error {
    int row;
    CsvError(int row_, const std::string& msg)
        : std::runtime_error("row " + std::to_string(row_) + ": " + msg), row(row_) {}
};

// Strict comma-separated numeric matrix: no header, consistent column count,
// every field a finite number.
Mat read_csv_matrix(const std::string& path);
Vec read_csv_vector(const std::string& path);

// Machine-readable summary of one solve run.
nlohmann::json run_report(const ProblemData& pd, const SolverConfig& cfg,
                          const BnBResult& res);

// Minimal JSON-schema checker covering the subset the shipped schemas use:
// type, required, properties, items and enum. Returns false and fills `err`
// on the first violation.
bool validate_schema(const nlohmann::json& doc, const nlohmann::json& schema,
                     std::string* err);

}  // namespace okbnb
