#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "msre/disorder.hpp"
#include "msre/field.hpp"

namespace msre {

using json = nlohmann::json;

// binary container: "MSRE\n" magic, little-endian uint32 header length, JSON
// header, then the payload as raw little-endian float64
void write_disorder(const std::string& path, const DisorderField& f);
DisorderField read_disorder(const std::string& path);

void write_field(const std::string& path, const LatticeField& f);
LatticeField read_field(const std::string& path);

// newline-delimited JSON: one header line carrying schema, version, creation
// time and the resolved config, then one record per line. Records are
// byte-deterministic; only the header carries a timestamp.
class JsonlWriter {
  public:
    // fresh file (or truncate): writes the header line; append: requires an
    // existing compatible header
    JsonlWriter(const std::string& path, const json& header_extra, bool append = false);
    void write(const json& record);
    int64_t records_written() const { return count_; }

  private:
    std::ofstream out_;
    int64_t count_ = 0;
};

struct JsonlFile {
    json header;
    std::vector<json> records;
};
JsonlFile read_jsonl(const std::string& path);

void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows);

uint64_t fnv1a(const std::string& bytes);
std::string config_hash(const json& config);  // 16 hex digits of fnv1a over a canonical dump

void ensure_parent_dir(const std::string& path);

std::string format_double(double x);  // shortest round-trip decimal

}  // namespace msre
