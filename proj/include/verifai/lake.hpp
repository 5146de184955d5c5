#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace verifai {

enum class Modality { Tuple, Table, Text };

std::string_view to_string(Modality m) noexcept;
/// Accepts "tuple", "table", "text". Throws ContractError otherwise.
Modality parse_modality(std::string_view s);

struct Tuple {
    std::string table_id;
    std::size_t row_index = 0;
    std::vector<std::string> schema;
    std::vector<std::string> cells;
    std::vector<std::string> key_attrs;

    /// Cell value for an attribute, matched on normalized attribute names.
    std::optional<std::string> value_of(std::string_view attr) const;
    bool has_attr(std::string_view attr) const { return value_of(attr).has_value(); }

    /// Throws ContractError when an invariant does not hold.
    void validate() const;

    bool operator==(const Tuple&) const = default;
};

struct Table {
    std::string table_id;
    std::string name;
    std::vector<std::string> schema;
    std::vector<std::vector<std::string>> rows;

    void validate() const;

    bool operator==(const Table&) const = default;
};

struct CharSpan {
    std::size_t start = 0;
    std::size_t end = 0;

    bool operator==(const CharSpan&) const = default;
};

struct TextChunk {
    std::string chunk_id;
    std::string source_file;
    std::size_t seq = 0;
    std::string text;
    CharSpan span;

    bool operator==(const TextChunk&) const = default;
};

using Payload = std::variant<Tuple, Table, TextChunk>;

struct DataInstance {
    std::string instance_id;
    std::string source_id;
    Payload payload;

    /// Builds an instance whose id is the content digest of the payload.
    static DataInstance make(Payload payload, std::string source_id);

    Modality modality() const noexcept;
    const Tuple* tuple() const noexcept { return std::get_if<Tuple>(&payload); }
    const Table* table() const noexcept { return std::get_if<Table>(&payload); }
    const TextChunk* chunk() const noexcept { return std::get_if<TextChunk>(&payload); }

    bool operator==(const DataInstance&) const = default;
};

/// Deterministic content id: 32 lowercase hex digits.
std::string content_id(const Payload& payload);

struct SourceDescriptor {
    std::string source_id;
    std::string path;
    Modality modality = Modality::Table;
    std::size_t count = 0;

    bool operator==(const SourceDescriptor&) const = default;
};

/// The multi-modal lake. Immutable once assembled; safe for concurrent reads.
class DataLake {
public:
    DataLake() = default;

    /// Registers a source and its instances. Used while assembling a lake;
    /// throws LakeError on duplicate source or instance ids.
    void add_source(SourceDescriptor source, std::vector<DataInstance> instances);

    const std::vector<SourceDescriptor>& manifest() const noexcept { return manifest_; }
    const std::vector<DataInstance>& instances() const noexcept { return instances_; }
    std::size_t size() const noexcept { return instances_.size(); }
    bool empty() const noexcept { return instances_.empty(); }

    const DataInstance* find(std::string_view instance_id) const;
    const DataInstance& at(std::string_view instance_id) const;

    /// Checks that every instance's source is in the manifest and that the
    /// manifest counts match. Throws LakeError.
    void check_manifest() const;

private:
    std::vector<SourceDescriptor> manifest_;
    std::vector<DataInstance> instances_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

enum class ObjectKind { ImputedTuple, TextualClaim };

std::string_view to_string(ObjectKind k) noexcept;
ObjectKind parse_object_kind(std::string_view s);

/// A generated artifact to verify.
struct DataObject {
    std::string object_id;
    ObjectKind kind = ObjectKind::TextualClaim;
    std::optional<Tuple> tuple;
    std::optional<std::string> claim_text;
    std::optional<std::string> target_attr;

    static DataObject imputed(std::string object_id, Tuple t, std::optional<std::string> target_attr);
    static DataObject claim(std::string object_id, std::string text);

    void validate() const;

    bool operator==(const DataObject&) const = default;
};

// --- ingestion -------------------------------------------------------------

struct IngestedTable {
    DataInstance table;
    std::vector<DataInstance> tuples;
};

/// nullopt selects the key automatically: the leftmost column whose values
/// are unique across rows, else the full schema.
using KeySelection = std::optional<std::vector<std::string>>;

/// Parses delimiter-separated text with a header row (RFC-4180 quoting).
IngestedTable ingest_table_text(std::string_view csv, const std::string& table_id,
                                const std::string& source_id, const KeySelection& key_attrs = std::nullopt,
                                char delimiter = ',');

/// table_id is the file stem; source_id defaults to the file name.
IngestedTable ingest_table_file(const std::filesystem::path& path, const KeySelection& key_attrs = std::nullopt,
                                std::string source_id = {});

inline constexpr std::size_t kDefaultMaxChunkChars = 1000;

/// Paragraph-greedy chunking. Lengths and offsets are UTF-8 byte counts.
std::vector<DataInstance> ingest_text(std::string_view contents, const std::string& source_file,
                                      const std::string& source_id, std::size_t max_chunk_chars = kDefaultMaxChunkChars);

std::vector<DataInstance> ingest_text_file(const std::filesystem::path& path,
                                           std::size_t max_chunk_chars = kDefaultMaxChunkChars,
                                           std::string source_id = {});

// --- serialization -----------------------------------------------------------

/// "attr1: val1 ; attr2: val2". No escaping.
std::string serialize_tuple(const Tuple& t);

inline constexpr std::size_t kDefaultTableRowLimit = 50;

/// Name line, " | "-joined header, then up to row_limit " | "-joined rows.
std::string serialize_table(const Table& tbl, std::size_t row_limit = kDefaultTableRowLimit);

/// Text used to index and rerank an instance.
std::string serialize_instance(const DataInstance& x);

std::string serialize_object(const DataObject& g);

// --- lake directories --------------------------------------------------------

struct LoadOptions {
    std::size_t max_chunk_chars = kDefaultMaxChunkChars;
    bool write_manifest = true;
};

/// Loads `<dir>/tables/*.csv` and `<dir>/texts/*.txt` in file-name order.
DataLake load_lake(const std::filesystem::path& dir, const LoadOptions& options = {});

/// One JSON record per line, in manifest order.
std::string render_manifest(const DataLake& lake);

}  // namespace verifai
