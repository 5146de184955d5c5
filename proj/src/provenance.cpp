#include "verifai/provenance.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "verifai/digest.hpp"
#include "verifai/error.hpp"
#include "verifai/json_io.hpp"

namespace verifai {

namespace {

std::string errno_text() { return std::strerror(errno); }

void roll_back(int fd, off_t size) {
    if (size >= 0 && ::ftruncate(fd, size) != 0) return;
}

json header_json() { return json{{"format", kLineageFormat}, {"schema_version", kLineageSchemaVersion}}; }

struct RawLine {
    std::size_t number = 0;  // 1-based
    std::string text;
    bool complete = true;
};

std::vector<RawLine> split_lines(const std::string& bytes) {
    std::vector<RawLine> out;
    std::size_t pos = 0;
    std::size_t n = 0;
    while (pos < bytes.size()) {
        const auto nl = bytes.find('\n', pos);
        ++n;
        if (nl == std::string::npos) {
            out.push_back({n, bytes.substr(pos), false});
            break;
        }
        out.push_back({n, bytes.substr(pos, nl - pos), true});
        pos = nl + 1;
    }
    return out;
}

void check_header(const RawLine& line, const std::string& where) {
    json h;
    try {
        h = json::parse(line.text);
    } catch (const json::exception&) {
        throw CorruptionError(where + ": line 1 is not a lineage header");
    }
    if (!h.is_object() || h.value("format", std::string{}) != kLineageFormat) {
        throw CorruptionError(where + ": line 1 is not a lineage header");
    }
    if (h.value("schema_version", -1) != kLineageSchemaVersion) {
        throw CorruptionError(where + ": unsupported lineage schema version " + h.value("schema_version", json{}).dump());
    }
}

struct ParsedEntry {
    std::uint64_t lineage_id = 0;
    json entry;
};

// Complete malformed lines are corruption; an incomplete trailing line is a
// torn write and yields nullopt.
std::optional<ParsedEntry> parse_entry(const RawLine& line, const std::string& where) {
    try {
        json e = json::parse(line.text);
        if (!e.is_object() || !e.contains("lineage_id") || !e.contains("checksum") || !e.contains("report")) {
            throw CorruptionError(where + ": line " + std::to_string(line.number) + " is not a lineage entry");
        }
        ParsedEntry p;
        p.lineage_id = e.at("lineage_id").get<std::uint64_t>();
        p.entry = std::move(e);
        return p;
    } catch (const json::exception&) {
        if (!line.complete) return std::nullopt;
        throw CorruptionError(where + ": line " + std::to_string(line.number) + " is malformed");
    } catch (const CorruptionError&) {
        if (!line.complete) return std::nullopt;
        throw;
    }
}

bool checksum_ok(const json& entry) {
    return entry.at("checksum").is_string() &&
           entry.at("checksum").get<std::string>() == sha256_hex(entry.at("report").dump());
}

std::vector<ParsedEntry> read_entries(const std::filesystem::path& log) {
    std::ifstream in(log, std::ios::binary);
    if (!in) throw NotFoundError("no lineage log at " + log.string());
    std::stringstream ss;
    ss << in.rdbuf();
    const auto lines = split_lines(ss.str());
    const std::string where = log.string();

    std::vector<ParsedEntry> out;
    if (lines.empty()) return out;
    if (!lines.front().complete) return out;
    check_header(lines.front(), where);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].complete && lines[i].text.empty()) continue;
        auto p = parse_entry(lines[i], where);
        if (!p) continue;
        if (!lines[i].complete && !checksum_ok(p->entry)) continue;
        out.push_back(std::move(*p));
    }
    return out;
}

}  // namespace

LineageLog::LineageLog(std::filesystem::path path) : path_(std::move(path)) {
    if (path_.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path_.parent_path(), ec);
    }
    fd_ = ::open(path_.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw ProvenanceError("cannot open lineage log " + path_.string() + ": " + errno_text());
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
        ::close(fd_);
        fd_ = -1;
        throw ProvenanceError("lineage log " + path_.string() + " is locked by another writer");
    }

    struct stat st {};
    if (::fstat(fd_, &st) != 0 || !S_ISREG(st.st_mode) || st.st_size == 0) return;

    try {
        std::ifstream in(path_, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        const std::string bytes = ss.str();
        const auto lines = split_lines(bytes);
        std::size_t keep = bytes.size();
        if (!lines.empty() && !lines.back().complete) {
            keep = bytes.rfind('\n') == std::string::npos ? 0 : bytes.rfind('\n') + 1;
        }
        if (keep != bytes.size() && ::ftruncate(fd_, static_cast<off_t>(keep)) != 0) {
            throw ProvenanceError("cannot repair lineage log " + path_.string() + ": " + errno_text());
        }
        if (keep > 0) {
            check_header(lines.front(), path_.string());
            has_header_ = true;
            for (std::size_t i = 1; i < lines.size(); ++i) {
                if (!lines[i].complete || lines[i].text.empty()) continue;
                if (auto p = parse_entry(lines[i], path_.string()); p && p->lineage_id >= next_id_) {
                    next_id_ = p->lineage_id + 1;
                }
            }
        }
    } catch (...) {
        ::close(fd_);
        fd_ = -1;
        throw;
    }
}

LineageLog::~LineageLog() {
    if (fd_ >= 0) ::close(fd_);  // releases the flock
}

void LineageLog::write_all(const std::string& bytes) {
    const off_t before = ::lseek(fd_, 0, SEEK_END);
    std::size_t done = 0;
    while (done < bytes.size()) {
        const ssize_t n = ::write(fd_, bytes.data() + done, bytes.size() - done);
        if (n < 0) {
            if (errno == EINTR) continue;
            const std::string why = errno_text();
            roll_back(fd_, before);
            throw ProvenanceError("cannot append to lineage log " + path_.string() + ": " + why);
        }
        done += static_cast<std::size_t>(n);
    }
    if (::fdatasync(fd_) != 0 && errno != EINVAL && errno != EROFS) {
        const std::string why = errno_text();
        roll_back(fd_, before);
        throw ProvenanceError("cannot sync lineage log " + path_.string() + ": " + why);
    }
}

std::uint64_t LineageLog::record(const VerificationReport& report) {
    const json r = report;
    const std::string dumped = r.dump();
    std::lock_guard lock(mu_);
    const std::uint64_t id = next_id_;
    std::string bytes;
    if (!has_header_) bytes = header_json().dump() + "\n";
    bytes += json{{"checksum", sha256_hex(dumped)}, {"lineage_id", id}, {"report", r}}.dump();
    bytes += '\n';
    write_all(bytes);
    has_header_ = true;
    ++next_id_;
    return id;
}

VerificationReport load_lineage(const std::filesystem::path& log, std::uint64_t lineage_id) {
    for (const auto& p : read_entries(log)) {
        if (p.lineage_id != lineage_id) continue;
        if (!checksum_ok(p.entry)) {
            throw CorruptionError("lineage entry " + std::to_string(lineage_id) + " fails its checksum");
        }
        try {
            return p.entry.at("report").get<VerificationReport>();
        } catch (const json::exception& e) {
            throw CorruptionError("lineage entry " + std::to_string(lineage_id) + " is malformed: " + e.what());
        } catch (const ContractError& e) {
            throw CorruptionError("lineage entry " + std::to_string(lineage_id) + " is malformed: " + e.what());
        }
    }
    throw NotFoundError("no lineage entry " + std::to_string(lineage_id) + " in " + log.string());
}

std::vector<LineageSummary> list_lineage(const std::filesystem::path& log, const LineageFilter& filter) {
    std::vector<LineageSummary> out;
    for (const auto& p : read_entries(log)) {
        if (!checksum_ok(p.entry)) {
            throw CorruptionError("lineage entry " + std::to_string(p.lineage_id) + " fails its checksum");
        }
        LineageSummary s;
        try {
            const auto& r = p.entry.at("report");
            s.lineage_id = p.lineage_id;
            s.object_id = r.at("object").at("object_id").get<std::string>();
            s.aggregate = parse_verdict_name(r.at("aggregate").get<std::string>());
            s.conflict = r.at("conflict").get<bool>();
            s.timestamp_ms = r.at("timestamp_ms").get<std::int64_t>();
        } catch (const json::exception& e) {
            throw CorruptionError("lineage entry " + std::to_string(p.lineage_id) + " is malformed: " + e.what());
        }
        if (filter.object_id && s.object_id != *filter.object_id) continue;
        if (filter.verdict && s.aggregate != *filter.verdict) continue;
        if (filter.from_ms && s.timestamp_ms < *filter.from_ms) continue;
        if (filter.to_ms && s.timestamp_ms > *filter.to_ms) continue;
        out.push_back(std::move(s));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.lineage_id < b.lineage_id; });
    return out;
}

}  // namespace verifai
