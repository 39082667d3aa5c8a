#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qoct/errors.hpp"

namespace qoct {

// 17 significant digits, round-trip exact, locale independent.
std::string format_double(double value);
// Shortest representation that round-trips; used in file names.
std::string format_double_compact(double value);

// Comma-separated file: one `#` unit comment line, a header row, then data
// rows serialized with format_double.
void write_csv(const std::filesystem::path& path, const std::string& unit_comment,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

// Two-space indented JSON with a trailing newline.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& value);

std::string sha256_file(const std::filesystem::path& path);

// Inventory of one experiment run: effective config, stage wall-clock times,
// and a content hash per output file.  Written last, as <dir>/manifest.json.
class RunManifest {
public:
    RunManifest(std::string experiment, nlohmann::json effective_config);

    void add_stage(const std::string& name, double seconds);
    // `path` must live inside the output directory passed to write().
    void add_output(const std::filesystem::path& path);
    void add_note(const std::string& note);

    void write(const std::filesystem::path& output_dir) const;

private:
    std::string experiment_;
    nlohmann::json config_;
    std::vector<std::pair<std::string, double>> stages_;
    std::vector<std::filesystem::path> outputs_;
    std::vector<std::string> notes_;
};

} // namespace qoct
