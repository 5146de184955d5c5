#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "verifai/engine.hpp"

namespace verifai {

inline constexpr std::string_view kLineageFormat = "verifai-lineage";
inline constexpr int kLineageSchemaVersion = 1;

struct LineageSummary {
    std::uint64_t lineage_id = 0;
    std::string object_id;
    Verdict aggregate = Verdict::NotRelated;
    bool conflict = false;
    std::int64_t timestamp_ms = 0;

    bool operator==(const LineageSummary&) const = default;
};

struct LineageFilter {
    std::optional<std::string> object_id;
    std::optional<Verdict> verdict;
    std::optional<std::int64_t> from_ms;  // inclusive
    std::optional<std::int64_t> to_ms;    // inclusive
};

/// Append-only, line-delimited lineage log. Line 1 is a schema header; every
/// further line is {"checksum", "lineage_id", "report"} where checksum is the
/// SHA-256 of the report's serialized JSON. A trailing line cut short by a
/// crash is ignored by readers and dropped by the next writer.
///
/// One writer per file (advisory flock); readers need no lock.
class LineageLog {
public:
    /// Throws ProvenanceError when the file cannot be opened or is locked.
    explicit LineageLog(std::filesystem::path path);
    ~LineageLog();
    LineageLog(const LineageLog&) = delete;
    LineageLog& operator=(const LineageLog&) = delete;

    /// Appends the report and returns its id. Throws ProvenanceError.
    std::uint64_t record(const VerificationReport& report);

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    void write_all(const std::string& bytes);

    std::filesystem::path path_;
    int fd_ = -1;
    bool has_header_ = false;
    std::uint64_t next_id_ = 1;
    std::mutex mu_;
};

/// NotFoundError for an unknown id, CorruptionError when the entry fails its
/// checksum or the log holds a malformed complete line.
VerificationReport load_lineage(const std::filesystem::path& log, std::uint64_t lineage_id);

/// Summaries in id order. Every listed entry is checksum-verified.
std::vector<LineageSummary> list_lineage(const std::filesystem::path& log, const LineageFilter& filter = {});

}  // namespace verifai
