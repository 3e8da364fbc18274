#include "eplab/cli/output.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <random>

#include "eplab/errors.hpp"
#include "eplab/format.hpp"

namespace eplab::cli {

namespace fs = std::filesystem;

CsvTable::CsvTable(std::string header) : columns_(1), text_(std::move(header))
{
    for (char c : text_)
        if (c == ',')
            ++columns_;
    text_ += '\n';
}

void CsvTable::add_row(std::vector<std::string> cells)
{
    if (cells.size() != columns_)
        throw Error("CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                    std::to_string(columns_));
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i)
            text_ += ',';
        text_ += cells[i];
    }
    text_ += '\n';
    ++rows_;
}

std::string cell(double v) { return format_double(v); }
std::string cell(bool v) { return v ? "1" : "0"; }

void write_atomic(const fs::path& path, std::string_view content)
{
    std::random_device rd;
    fs::path tmp = path;
    tmp += ".tmp" + std::to_string(rd());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error("cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw Error("write to '" + tmp.string() + "' failed");
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error("cannot move output into place at '" + path.string() + "'");
    }
}

nlohmann::ordered_json RunManifest::to_json() const
{
    nlohmann::ordered_json j;
    j["subcommand"] = subcommand;
    j["params"] = {
        {"gamma_a", params.gamma_a},     {"gamma_ph", params.gamma_ph},
        {"gamma_d", params.gamma_d},     {"gamma_p", params.gamma_p},
        {"gamma_cor", params.gamma_cor}, {"omega_r", params.omega_r},
        {"n_mol", params.n_mol},
    };
    j["pump_mode"] = pump_mode;
    auto grids_json = nlohmann::ordered_json::object();
    for (const auto& [name, spec] : grids) grids_json[name] = spec;
    j["grids"] = grids_json;
    j["outputs"] = outputs;
    j["arguments"] = arguments;
    j["version"] = version;
    j["timestamp"] = timestamp;
    return j;
}

RunManifest RunManifest::from_json(const nlohmann::json& j)
{
    try {
        RunManifest m;
        m.subcommand = j.at("subcommand").get<std::string>();
        const auto& p = j.at("params");
        m.params.gamma_a = p.at("gamma_a").get<double>();
        m.params.gamma_ph = p.at("gamma_ph").get<double>();
        m.params.gamma_d = p.at("gamma_d").get<double>();
        m.params.gamma_p = p.at("gamma_p").get<double>();
        m.params.gamma_cor = p.at("gamma_cor").get<double>();
        m.params.omega_r = p.at("omega_r").get<double>();
        m.params.n_mol = p.at("n_mol").get<double>();
        m.pump_mode = j.value("pump_mode", "");
        for (const auto& [name, spec] : j.at("grids").items())
            m.grids.emplace_back(name, spec.get<std::string>());
        m.outputs = j.at("outputs").get<std::vector<std::string>>();
        m.arguments = j.at("arguments").get<std::vector<std::string>>();
        m.version = j.value("version", "");
        m.timestamp = j.value("timestamp", "");
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("malformed manifest: ") + e.what());
    }
}

fs::path manifest_path(const fs::path& output)
{
    fs::path m = output;
    m += ".manifest.json";
    return m;
}

std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace eplab::cli
