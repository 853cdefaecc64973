#include "msre/io.hpp"

#include <bit>
#include <charconv>
#include <cstdio>
#include <ctime>
#include <cstring>
#include <filesystem>

#include "msre/common.hpp"

namespace msre {

namespace {

static_assert(std::endian::native == std::endian::little,
              "container payloads are little-endian");

constexpr char kMagic[5] = {'M', 'S', 'R', 'E', '\n'};
constexpr int kFormatVersion = 1;

void write_blob(const std::string& path, const json& header,
                const std::vector<double>& payload) {
    ensure_parent_dir(path);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open for writing: " + path);
    out.write(kMagic, sizeof(kMagic));
    const std::string head = header.dump();
    const uint32_t len = static_cast<uint32_t>(head.size());
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(head.data(), static_cast<std::streamsize>(head.size()));
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size() * sizeof(double)));
    out.flush();
    if (!out) throw io_error("short write: " + path);
}

json read_blob(const std::string& path, std::vector<double>& payload) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open for reading: " + path);
    char magic[5];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw io_error("bad container magic: " + path);
    }
    uint32_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    if (!in || len == 0 || len > (1u << 24)) throw io_error("bad header length: " + path);
    std::string head(len, '\0');
    in.read(head.data(), len);
    if (!in) throw io_error("truncated header: " + path);
    json header = json::parse(head, nullptr, false);
    if (header.is_discarded()) throw io_error("unparseable header: " + path);
    if (header.value("format_version", -1) != kFormatVersion) {
        throw io_error("unsupported container version: " + path);
    }
    const int64_t count = header.value("payload_doubles", int64_t{-1});
    if (count < 0) throw io_error("missing payload size: " + path);
    payload.resize(static_cast<size_t>(count));
    in.read(reinterpret_cast<char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(double)));
    if (!in) throw io_error("truncated payload: " + path);
    return header;
}

json box_to_json(const Box& b) {
    json lo = json::array(), hi = json::array();
    for (int a = 0; a < b.d; ++a) {
        lo.push_back(b.lo[a]);
        hi.push_back(b.hi[a]);
    }
    return json{{"lo", lo}, {"hi", hi}};
}

Box box_from_json(const json& j) {
    Box b;
    const auto& lo = j.at("lo");
    const auto& hi = j.at("hi");
    if (lo.size() != hi.size() || lo.empty() || lo.size() > kMaxDim) {
        throw io_error("bad box bounds in header");
    }
    b.d = static_cast<int>(lo.size());
    for (int a = 0; a < b.d; ++a) {
        b.lo[a] = lo[static_cast<size_t>(a)].get<int>();
        b.hi[a] = hi[static_cast<size_t>(a)].get<int>();
    }
    return b;
}

}  // namespace

void write_disorder(const std::string& path, const DisorderField& f) {
    require(!f.domain.has_mask(), "masked domains are not serialized");
    json header{{"format_version", kFormatVersion},
                {"kind", "disorder"},
                {"box", box_to_json(f.domain.bounds())},
                {"n", f.grid.n},
                {"delta", f.grid.delta},
                {"K", f.grid.K},
                {"H", f.params.H},
                {"seed", f.seed},
                {"resample_index", f.resample_index},
                {"order", "vertex-major"},
                {"payload_doubles", static_cast<int64_t>(f.values.size())}};
    write_blob(path, header, f.values);
}

DisorderField read_disorder(const std::string& path) {
    std::vector<double> payload;
    json header = read_blob(path, payload);
    if (header.value("kind", "") != "disorder") throw io_error("not a disorder container: " + path);
    Domain dom(box_from_json(header.at("box")));
    HeightGrid grid{header.at("n").get<int>(), header.at("delta").get<double>(),
                    header.at("K").get<int>()};
    HurstParams params{header.at("H").get<double>(), grid.n};
    DisorderField f{dom, grid, params, header.at("seed").get<uint64_t>(),
                    header.at("resample_index").get<uint32_t>(), std::move(payload)};
    if (static_cast<int64_t>(f.values.size()) != dom.interior_count() * grid.size()) {
        throw io_error("payload size mismatch: " + path);
    }
    return f;
}

void write_field(const std::string& path, const LatticeField& f) {
    json header{{"format_version", kFormatVersion},
                {"kind", "field"},
                {"box", box_to_json(f.box)},
                {"n", f.n},
                {"order", "vertex-major"},
                {"payload_doubles", static_cast<int64_t>(f.values.size())}};
    write_blob(path, header, f.values);
}

LatticeField read_field(const std::string& path) {
    std::vector<double> payload;
    json header = read_blob(path, payload);
    if (header.value("kind", "") != "field") throw io_error("not a field container: " + path);
    LatticeField f(box_from_json(header.at("box")), header.at("n").get<int>());
    if (payload.size() != f.values.size()) throw io_error("payload size mismatch: " + path);
    f.values = std::move(payload);
    return f;
}

JsonlWriter::JsonlWriter(const std::string& path, const json& header_extra, bool append) {
    ensure_parent_dir(path);
    bool write_header = true;
    if (append && std::filesystem::exists(path) && std::filesystem::file_size(path) > 0) {
        JsonlFile existing = read_jsonl(path);
        count_ = static_cast<int64_t>(existing.records.size());
        write_header = false;
    }
    out_.open(path, append ? (std::ios::out | std::ios::app) : (std::ios::out | std::ios::trunc));
    if (!out_) throw io_error("cannot open for writing: " + path);
    if (write_header) {
        json header = header_extra;
        header["schema"] = "msre.records.v1";
        header["created_unix"] = static_cast<int64_t>(std::time(nullptr));
        out_ << header.dump() << '\n';
        out_.flush();
    }
}

void JsonlWriter::write(const json& record) {
    out_ << record.dump() << '\n';
    out_.flush();
    if (!out_) throw io_error("record write failed");
    ++count_;
}

JsonlFile read_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open for reading: " + path);
    JsonlFile out;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            if (in.eof()) break;  // tolerate a torn trailing line
            throw io_error("unparseable line in " + path);
        }
        if (first) {
            if (j.value("schema", "") != "msre.records.v1") {
                throw io_error("unexpected record schema in " + path);
            }
            out.header = std::move(j);
            first = false;
        } else {
            out.records.push_back(std::move(j));
        }
    }
    if (first) throw io_error("missing header line in " + path);
    return out;
}

void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows) {
    ensure_parent_dir(path);
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw io_error("cannot open for writing: " + path);
    for (size_t c = 0; c < columns.size(); ++c) {
        out << columns[c] << (c + 1 < columns.size() ? "," : "");
    }
    out << '\n';
    for (const auto& row : rows) {
        require(row.size() == columns.size(), "csv row width mismatch");
        for (size_t c = 0; c < row.size(); ++c) {
            out << row[c] << (c + 1 < row.size() ? "," : "");
        }
        out << '\n';
    }
    out.flush();
    if (!out) throw io_error("short write: " + path);
}

uint64_t fnv1a(const std::string& bytes) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string config_hash(const json& config) {
    const uint64_t h = fnv1a(config.dump());
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

void ensure_parent_dir(const std::string& path) {
    const std::filesystem::path p(path);
    if (p.has_parent_path() && !p.parent_path().empty()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
        if (ec) throw io_error("cannot create directory: " + p.parent_path().string());
    }
}

std::string format_double(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

}  // namespace msre
