#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "eplab/model/params.hpp"

namespace eplab::cli {

inline constexpr std::string_view kToolVersion = "1.0.0";

class CsvTable {
public:
    explicit CsvTable(std::string header);

    void add_row(std::vector<std::string> cells);
    std::size_t rows() const { return rows_; }
    const std::string& text() const { return text_; }

private:
    std::size_t columns_;
    std::size_t rows_ = 0;
    std::string text_;
};

std::string cell(double v);
std::string cell(bool v);

// Writes to a sibling temporary file, then renames over `path`.
// Throws Error on I/O failure.
void write_atomic(const std::filesystem::path& path, std::string_view content);

struct RunManifest {
    std::string subcommand;
    model::ModelParams params;
    std::string pump_mode;
    std::vector<std::pair<std::string, std::string>> grids;  // name, spec text
    std::vector<std::string> outputs;
    std::vector<std::string> arguments;  // argv after the program name
    std::string version{kToolVersion};
    std::string timestamp;

    nlohmann::ordered_json to_json() const;
    static RunManifest from_json(const nlohmann::json& j);
};

// `<output>.manifest.json`
std::filesystem::path manifest_path(const std::filesystem::path& output);

// UTC, ISO 8601, second resolution.
std::string utc_timestamp();

}  // namespace eplab::cli
