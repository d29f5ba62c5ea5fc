#include "okbnb/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace okbnb {

namespace {

std::vector<std::vector<double>> read_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CsvError(0, "cannot open " + path);

    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            // a blank line is only tolerated at the very end of the file
            std::string rest;
            if (in.peek() == EOF) break;
            throw CsvError(lineno, "blank line");
        }
        std::vector<double> row;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) {
            size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(field, &used);
            } catch (const std::exception&) {
                throw CsvError(lineno, "not a number: '" + field + "'");
            }
            while (used < field.size() && std::isspace(static_cast<unsigned char>(field[used])))
                ++used;
            if (used != field.size())
                throw CsvError(lineno, "trailing characters: '" + field + "'");
            if (!std::isfinite(v)) throw CsvError(lineno, "non-finite value");
            row.push_back(v);
        }
        if (row.empty()) throw CsvError(lineno, "empty row");
        if (!rows.empty() && row.size() != rows.front().size())
            throw CsvError(lineno, "expected " + std::to_string(rows.front().size()) +
                                       " fields, got " + std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw CsvError(0, "no data in " + path);
    return rows;
}

}  // namespace

Mat read_csv_matrix(const std::string& path) {
    auto rows = read_rows(path);
    Mat m(rows.size(), rows.front().size());
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    return m;
}

Vec read_csv_vector(const std::string& path) {
    auto rows = read_rows(path);
    if (rows.front().size() != 1)
        throw CsvError(1, "expected a single column");
    Vec v(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) v[i] = rows[i][0];
    return v;
}

nlohmann::json run_report(const ProblemData& pd, const SolverConfig& cfg,
                          const BnBResult& res) {
    nlohmann::json j;
    j["version"] = kVersion;
    j["status"] = to_string(res.status);
    j["loss"] = res.upper;
    j["rss"] = res.upper + pd.yty;
    j["support"] = res.best.support;
    std::vector<double> coeffs(res.best.coeffs.data(),
                               res.best.coeffs.data() + res.best.coeffs.size());
    j["coeffs"] = coeffs;
    j["lower_bound"] = res.lower;
    j["gap"] = res.gap;
    j["nodes"] = res.nodes_processed;
    j["nodes_pruned"] = res.nodes_pruned;
    j["elapsed_s"] = res.elapsed_s;
    j["config"] = {
        {"k", cfg.k},
        {"lambda2", cfg.lambda2},
        {"gap_tol", cfg.gap_tol},
        {"time_limit_s",
         cfg.time_limit_s ? nlohmann::json(*cfg.time_limit_s) : nlohmann::json()},
        {"beam_width", cfg.beam_width},
        {"admm_iters", cfg.admm_iters},
        {"use_admm", cfg.use_admm},
        {"use_cmf", cfg.use_cmf},
    };
    j["problem"] = {{"n", pd.n}, {"p", pd.p}};
    return j;
}

namespace {

bool type_matches(const nlohmann::json& doc, const std::string& t) {
    if (t == "object") return doc.is_object();
    if (t == "array") return doc.is_array();
    if (t == "string") return doc.is_string();
    if (t == "number") return doc.is_number();
    if (t == "integer") return doc.is_number_integer();
    if (t == "boolean") return doc.is_boolean();
    if (t == "null") return doc.is_null();
    return false;
}

bool validate_at(const nlohmann::json& doc, const nlohmann::json& schema,
                 const std::string& where, std::string* err) {
    if (schema.contains("type")) {
        const auto& t = schema["type"];
        bool ok = false;
        if (t.is_string()) {
            ok = type_matches(doc, t.get<std::string>());
        } else {
            for (const auto& alt : t)
                if (type_matches(doc, alt.get<std::string>())) ok = true;
        }
        if (!ok) {
            if (err) *err = where + ": type mismatch";
            return false;
        }
    }
    if (schema.contains("enum")) {
        bool ok = false;
        for (const auto& v : schema["enum"])
            if (v == doc) ok = true;
        if (!ok) {
            if (err) *err = where + ": not in enum";
            return false;
        }
    }
    if (doc.is_object() && schema.contains("required")) {
        for (const auto& key : schema["required"]) {
            if (!doc.contains(key.get<std::string>())) {
                if (err) *err = where + ": missing key " + key.get<std::string>();
                return false;
            }
        }
    }
    if (doc.is_object() && schema.contains("properties")) {
        for (auto it = schema["properties"].begin(); it != schema["properties"].end();
             ++it) {
            if (doc.contains(it.key()) &&
                !validate_at(doc[it.key()], it.value(), where + "/" + it.key(), err))
                return false;
        }
    }
    if (doc.is_array() && schema.contains("items")) {
        int i = 0;
        for (const auto& el : doc) {
            if (!validate_at(el, schema["items"], where + "[" + std::to_string(i) + "]",
                             err))
                return false;
            ++i;
        }
    }
    return true;
}

}  // namespace

bool validate_schema(const nlohmann::json& doc, const nlohmann::json& schema,
                     std::string* err) {
    return validate_at(doc, schema, "$", err);
}

}  // namespace okbnb
