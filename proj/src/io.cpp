#include "qoct/io.hpp"

#include <charconv>
#include <fstream>

#include <openssl/evp.h>

namespace qoct {

namespace {

std::string to_chars_string(double value, int precision) {
    char buf[64];
    std::to_chars_result res =
        precision > 0 ? std::to_chars(buf, buf + sizeof(buf), value,
                                      std::chars_format::general, precision)
                      : std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

} // namespace

std::string format_double(double value) { return to_chars_string(value, 17); }

std::string format_double_compact(double value) { return to_chars_string(value, 0); }

void write_csv(const std::filesystem::path& path, const std::string& unit_comment,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "# " << unit_comment << "\n";
    for (std::size_t c = 0; c < header.size(); ++c) {
        out << header[c] << (c + 1 < header.size() ? "," : "\n");
    }
    for (const auto& row : rows) {
        if (row.size() != header.size()) {
            throw IoError("CSV row width mismatch for " + path.string());
        }
        for (std::size_t c = 0; c < row.size(); ++c) {
            out << format_double(row[c]) << (c + 1 < row.size() ? "," : "\n");
        }
    }
    out.flush();
    if (!out) throw IoError("failed writing " + path.string());
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& value) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << value.dump(2) << "\n";
    out.flush();
    if (!out) throw IoError("failed writing " + path.string());
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string() + " for hashing");
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx) throw IoError("cannot allocate digest context");
    if (EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw IoError("cannot initialize sha256");
    }
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        const std::streamsize got = in.gcount();
        if (got > 0 && EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(got)) != 1) {
            EVP_MD_CTX_free(ctx);
            throw IoError("sha256 update failed");
        }
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
        EVP_MD_CTX_free(ctx);
        throw IoError("sha256 finalization failed");
    }
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

RunManifest::RunManifest(std::string experiment, nlohmann::json effective_config)
    : experiment_(std::move(experiment)), config_(std::move(effective_config)) {}

void RunManifest::add_stage(const std::string& name, double seconds) {
    stages_.emplace_back(name, seconds);
}

void RunManifest::add_output(const std::filesystem::path& path) { outputs_.push_back(path); }

void RunManifest::add_note(const std::string& note) { notes_.push_back(note); }

void RunManifest::write(const std::filesystem::path& output_dir) const {
    nlohmann::json doc;
    doc["experiment"] = experiment_;
    doc["version"] = "0.1.0";
    doc["config"] = config_;
    doc["stages"] = nlohmann::json::array();
    for (const auto& [name, seconds] : stages_) {
        doc["stages"].push_back({{"name", name}, {"seconds", seconds}});
    }
    doc["outputs"] = nlohmann::json::array();
    for (const auto& path : outputs_) {
        std::error_code ec;
        const auto relative = std::filesystem::relative(path, output_dir, ec);
        doc["outputs"].push_back({
            {"file", (ec || relative.empty()) ? path.string() : relative.generic_string()},
            {"sha256", sha256_file(path)},
            {"bytes", static_cast<std::uint64_t>(std::filesystem::file_size(path))},
        });
    }
    if (!notes_.empty()) doc["notes"] = notes_;
    write_json_file(output_dir / "manifest.json", doc);
}

} // namespace qoct
