#include "verifai/lake.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "csv.hpp"
#include "verifai/digest.hpp"
#include "verifai/error.hpp"
#include "verifai/json_io.hpp"
#include "verifai/text.hpp"

namespace fs = std::filesystem;

namespace verifai {

std::string_view to_string(Modality m) noexcept {
    switch (m) {
        case Modality::Tuple: return "tuple";
        case Modality::Table: return "table";
        case Modality::Text: return "text";
    }
    return "unknown";
}

Modality parse_modality(std::string_view s) {
    if (s == "tuple") return Modality::Tuple;
    if (s == "table") return Modality::Table;
    if (s == "text") return Modality::Text;
    throw ContractError("unknown modality '" + std::string(s) + "'");
}

std::string_view to_string(ObjectKind k) noexcept {
    return k == ObjectKind::ImputedTuple ? "imputed_tuple" : "textual_claim";
}

ObjectKind parse_object_kind(std::string_view s) {
    if (s == "imputed_tuple") return ObjectKind::ImputedTuple;
    if (s == "textual_claim") return ObjectKind::TextualClaim;
    throw ContractError("unknown object kind '" + std::string(s) + "'");
}

// --- Tuple / Table -----------------------------------------------------------

std::optional<std::string> Tuple::value_of(std::string_view attr) const {
    const auto wanted = text::normalize_attr(attr);
    for (std::size_t i = 0; i < schema.size() && i < cells.size(); ++i) {
        if (text::normalize_attr(schema[i]) == wanted) return cells[i];
    }
    return std::nullopt;
}

void Tuple::validate() const {
    if (schema.empty()) throw ContractError("tuple has an empty schema");
    if (schema.size() != cells.size()) {
        throw ContractError("tuple arity mismatch: " + std::to_string(schema.size()) + " attributes, " +
                            std::to_string(cells.size()) + " cells");
    }
    std::set<std::string> seen;
    for (const auto& a : schema) {
        if (a.empty()) throw ContractError("empty attribute name");
        if (!seen.insert(text::normalize_attr(a)).second) throw ContractError("duplicate attribute '" + a + "'");
    }
    if (key_attrs.empty()) throw ContractError("tuple has no key attributes");
    for (const auto& k : key_attrs) {
        if (!seen.count(text::normalize_attr(k))) throw ContractError("key attribute '" + k + "' not in schema");
    }
}

void Table::validate() const {
    if (schema.empty()) throw ContractError("table '" + table_id + "' has an empty schema");
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != schema.size()) {
            throw ContractError("table '" + table_id + "' row " + std::to_string(r) + " has " +
                                std::to_string(rows[r].size()) + " cells, expected " + std::to_string(schema.size()));
        }
    }
}

// --- DataInstance ------------------------------------------------------------

std::string content_id(const Payload& payload) {
    nlohmann::json j;
    std::string tag;
    std::visit(
        [&](const auto& p) {
            j = p;
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, Tuple>) tag = "tuple";
            else if constexpr (std::is_same_v<T, Table>) tag = "table";
            else tag = "text";
        },
        payload);
    return digest128_hex(tag + "\n" + j.dump());
}

DataInstance DataInstance::make(Payload payload, std::string source_id) {
    DataInstance x;
    x.instance_id = content_id(payload);
    x.source_id = std::move(source_id);
    x.payload = std::move(payload);
    return x;
}

Modality DataInstance::modality() const noexcept {
    switch (payload.index()) {
        case 0: return Modality::Tuple;
        case 1: return Modality::Table;
        default: return Modality::Text;
    }
}

// --- DataLake ----------------------------------------------------------------

void DataLake::add_source(SourceDescriptor source, std::vector<DataInstance> instances) {
    for (const auto& s : manifest_) {
        if (s.source_id == source.source_id) throw LakeError("duplicate source '" + source.source_id + "'");
    }
    for (const auto& x : instances) {
        if (x.source_id != source.source_id) {
            throw LakeError("instance " + x.instance_id + " belongs to '" + x.source_id + "', not '" +
                            source.source_id + "'");
        }
        if (by_id_.count(x.instance_id)) throw LakeError("duplicate instance id " + x.instance_id);
    }
    source.count = instances.size();
    manifest_.push_back(std::move(source));
    for (auto& x : instances) {
        by_id_.emplace(x.instance_id, instances_.size());
        instances_.push_back(std::move(x));
    }
}

const DataInstance* DataLake::find(std::string_view instance_id) const {
    auto it = by_id_.find(std::string(instance_id));
    return it == by_id_.end() ? nullptr : &instances_[it->second];
}

const DataInstance& DataLake::at(std::string_view instance_id) const {
    if (const auto* x = find(instance_id)) return *x;
    throw LakeError("unknown instance id " + std::string(instance_id));
}

void DataLake::check_manifest() const {
    std::unordered_map<std::string, std::size_t> counts;
    for (const auto& x : instances_) ++counts[x.source_id];
    std::size_t listed = 0;
    for (const auto& s : manifest_) {
        const auto actual = counts.count(s.source_id) ? counts.at(s.source_id) : 0;
        if (actual != s.count) {
            throw LakeError("manifest count for '" + s.source_id + "' is " + std::to_string(s.count) + ", found " +
                            std::to_string(actual));
        }
        listed += actual;
    }
    if (listed != instances_.size()) throw LakeError("instances reference sources missing from the manifest");
}

// --- DataObject --------------------------------------------------------------

DataObject DataObject::imputed(std::string object_id, Tuple t, std::optional<std::string> target_attr) {
    DataObject g;
    g.object_id = std::move(object_id);
    g.kind = ObjectKind::ImputedTuple;
    g.tuple = std::move(t);
    g.target_attr = std::move(target_attr);
    g.validate();
    return g;
}

DataObject DataObject::claim(std::string object_id, std::string claim_text) {
    DataObject g;
    g.object_id = std::move(object_id);
    g.kind = ObjectKind::TextualClaim;
    g.claim_text = std::move(claim_text);
    g.validate();
    return g;
}

void DataObject::validate() const {
    if (object_id.empty()) throw ContractError("object_id is empty");
    if (kind == ObjectKind::ImputedTuple) {
        if (!tuple || claim_text) throw ContractError("imputed_tuple object needs a tuple and no claim text");
        tuple->validate();
        if (target_attr && !tuple->has_attr(*target_attr)) {
            throw ContractError("target attribute '" + *target_attr + "' not in the tuple schema");
        }
    } else {
        if (tuple || !claim_text) throw ContractError("textual_claim object needs claim text and no tuple");
        if (claim_text->empty()) throw ContractError("claim text is empty");
        if (target_attr) throw ContractError("target_attr only applies to imputed tuples");
    }
}

// --- ingestion ---------------------------------------------------------------

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> auto_key(const std::vector<std::string>& schema,
                                  const std::vector<std::vector<std::string>>& rows) {
    for (std::size_t c = 0; c < schema.size(); ++c) {
        std::set<std::string_view> seen;
        bool unique = true;
        for (const auto& row : rows) {
            if (!seen.insert(row[c]).second) {
                unique = false;
                break;
            }
        }
        if (unique) return {schema[c]};
    }
    return schema;
}

bool is_ascii_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

struct Range {
    std::size_t begin;
    std::size_t end;
};

// Paragraph content ranges: maximal runs of non-blank lines, trimmed.
std::vector<Range> paragraphs(std::string_view s) {
    std::vector<Range> out;
    std::optional<Range> open;
    std::size_t pos = 0;
    while (pos < s.size()) {
        auto nl = s.find('\n', pos);
        const std::size_t line_end = nl == std::string_view::npos ? s.size() : nl;
        const auto line = s.substr(pos, line_end - pos);
        const auto trimmed = text::trim(line);
        if (trimmed.empty()) {
            if (open) out.push_back(*open), open.reset();
        } else {
            const std::size_t b = pos + static_cast<std::size_t>(trimmed.data() - line.data());
            const std::size_t e = b + trimmed.size();
            if (open) open->end = e;
            else open = Range{b, e};
        }
        pos = line_end + 1;
    }
    if (open) out.push_back(*open);
    return out;
}

void hard_split(std::string_view s, Range r, std::size_t max, std::vector<Range>& out) {
    std::size_t b = r.begin;
    while (r.end - b > max) {
        const std::size_t limit = b + max;
        std::size_t p = limit;
        while (p > b && !is_ascii_space(s[p])) --p;
        if (p > b) {
            std::size_t piece_end = p;
            while (piece_end > b && is_ascii_space(s[piece_end - 1])) --piece_end;
            out.push_back({b, piece_end});
            b = p;
            while (b < r.end && is_ascii_space(s[b])) ++b;
        } else {
            p = limit;
            while (p > b && (static_cast<unsigned char>(s[p]) & 0xC0) == 0x80) --p;
            if (p == b) p = limit;
            out.push_back({b, p});
            b = p;
        }
    }
    if (b < r.end) out.push_back({b, r.end});
}

}  // namespace

IngestedTable ingest_table_text(std::string_view csv, const std::string& table_id, const std::string& source_id,
                                const KeySelection& key_attrs, char delimiter) {
    if (auto bad = text::find_invalid_utf8(csv)) {
        throw IngestError("invalid UTF-8 at byte " + std::to_string(*bad), static_cast<std::ptrdiff_t>(*bad));
    }
    auto records = detail::parse_csv(csv, delimiter);
    if (records.empty()) throw IngestError("empty table file");
    if (records.size() == 1) throw IngestError("table file has a header but no rows");

    Table tbl;
    tbl.table_id = table_id;
    tbl.name = table_id;
    tbl.schema = std::move(records.front().fields);
    std::set<std::string> names;
    for (auto& a : tbl.schema) {
        a = std::string(text::trim(a));
        if (a.empty()) throw IngestError("empty attribute name in header", 1);
        if (!names.insert(text::normalize_attr(a)).second) throw IngestError("duplicate attribute name '" + a + "'", 1);
    }
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].fields.size() != tbl.schema.size()) {
            throw IngestError("ragged row on line " + std::to_string(records[r].line) + ": " +
                                  std::to_string(records[r].fields.size()) + " cells, expected " +
                                  std::to_string(tbl.schema.size()),
                              static_cast<std::ptrdiff_t>(records[r].line));
        }
        tbl.rows.push_back(std::move(records[r].fields));
    }

    std::vector<std::string> keys;
    if (key_attrs) {
        if (key_attrs->empty()) throw IngestError("explicit key attribute list is empty");
        for (const auto& k : *key_attrs) {
            if (!names.count(text::normalize_attr(k))) throw IngestError("key attribute '" + k + "' not in header");
        }
        keys = *key_attrs;
    } else {
        keys = auto_key(tbl.schema, tbl.rows);
    }

    IngestedTable out;
    out.tuples.reserve(tbl.rows.size());
    for (std::size_t r = 0; r < tbl.rows.size(); ++r) {
        Tuple t{tbl.table_id, r, tbl.schema, tbl.rows[r], keys};
        out.tuples.push_back(DataInstance::make(std::move(t), source_id));
    }
    out.table = DataInstance::make(std::move(tbl), source_id);
    return out;
}

IngestedTable ingest_table_file(const fs::path& path, const KeySelection& key_attrs, std::string source_id) {
    if (source_id.empty()) source_id = path.filename().string();
    try {
        return ingest_table_text(read_file(path), path.stem().string(), source_id, key_attrs);
    } catch (const IngestError& e) {
        throw IngestError(path.string() + ": " + e.what(), e.location());
    }
}

std::vector<DataInstance> ingest_text(std::string_view contents, const std::string& source_file,
                                      const std::string& source_id, std::size_t max_chunk_chars) {
    if (max_chunk_chars == 0) throw IngestError("max_chunk_chars must be positive");
    if (auto bad = text::find_invalid_utf8(contents)) {
        throw IngestError("invalid UTF-8 at byte " + std::to_string(*bad), static_cast<std::ptrdiff_t>(*bad));
    }

    std::vector<Range> units;
    for (const auto& p : paragraphs(contents)) hard_split(contents, p, max_chunk_chars, units);

    std::vector<Range> groups;
    for (const auto& u : units) {
        if (!groups.empty() && u.end - groups.back().begin <= max_chunk_chars) groups.back().end = u.end;
        else groups.push_back(u);
    }

    std::vector<DataInstance> out;
    out.reserve(groups.size());
    for (std::size_t i = 0; i < groups.size(); ++i) {
        TextChunk c;
        c.chunk_id = source_id + "#" + std::to_string(i);
        c.source_file = source_file;
        c.seq = i;
        c.text = std::string(contents.substr(groups[i].begin, groups[i].end - groups[i].begin));
        c.span.start = i == 0 ? 0 : groups[i].begin;
        c.span.end = i + 1 == groups.size() ? contents.size() : groups[i + 1].begin;
        out.push_back(DataInstance::make(std::move(c), source_id));
    }
    return out;
}

std::vector<DataInstance> ingest_text_file(const fs::path& path, std::size_t max_chunk_chars, std::string source_id) {
    if (source_id.empty()) source_id = path.filename().string();
    try {
        return ingest_text(read_file(path), path.string(), source_id, max_chunk_chars);
    } catch (const IngestError& e) {
        throw IngestError(path.string() + ": " + e.what(), e.location());
    }
}

// --- serialization -----------------------------------------------------------

std::string serialize_tuple(const Tuple& t) {
    std::string out;
    for (std::size_t i = 0; i < t.schema.size(); ++i) {
        if (i) out += " ; ";
        out += t.schema[i];
        out += ": ";
        if (i < t.cells.size()) out += t.cells[i];
    }
    return out;
}

namespace {

void append_joined(std::string& out, const std::vector<std::string>& parts) {
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += " | ";
        out += parts[i];
    }
}

}  // namespace

std::string serialize_table(const Table& tbl, std::size_t row_limit) {
    std::string out = tbl.name;
    out += '\n';
    append_joined(out, tbl.schema);
    const auto n = std::min(row_limit, tbl.rows.size());
    for (std::size_t r = 0; r < n; ++r) {
        out += '\n';
        append_joined(out, tbl.rows[r]);
    }
    return out;
}

std::string serialize_instance(const DataInstance& x) {
    if (const auto* t = x.tuple()) return serialize_tuple(*t);
    if (const auto* tbl = x.table()) return serialize_table(*tbl, kDefaultTableRowLimit);
    return x.chunk()->text;
}

std::string serialize_object(const DataObject& g) {
    if (g.kind == ObjectKind::ImputedTuple && g.tuple) return serialize_tuple(*g.tuple);
    return g.claim_text.value_or("");
}

// --- lake directories --------------------------------------------------------

namespace {

std::vector<fs::path> list_files(const fs::path& dir, std::string_view ext) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ext) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
    return files;
}

}  // namespace

DataLake load_lake(const fs::path& dir, const LoadOptions& options) {
    const auto tables_dir = dir / "tables";
    const auto texts_dir = dir / "texts";
    if (!fs::is_directory(tables_dir) || !fs::is_directory(texts_dir)) {
        throw LakeError("lake layout missing: expected " + tables_dir.string() + " and " + texts_dir.string());
    }

    DataLake lake;
    try {
        for (const auto& path : list_files(tables_dir, ".csv")) {
            const std::string rel = "tables/" + path.filename().string();
            auto ingested = ingest_table_file(path, std::nullopt, rel);
            std::vector<DataInstance> xs;
            xs.reserve(ingested.tuples.size() + 1);
            xs.push_back(std::move(ingested.table));
            for (auto& t : ingested.tuples) xs.push_back(std::move(t));
            lake.add_source({rel, rel, Modality::Table, 0}, std::move(xs));
        }
        for (const auto& path : list_files(texts_dir, ".txt")) {
            const std::string rel = "texts/" + path.filename().string();
            std::string contents;
            {
                std::ifstream in(path, std::ios::binary);
                if (!in) throw IngestError("cannot open " + path.string());
                std::ostringstream ss;
                ss << in.rdbuf();
                contents = ss.str();
            }
            std::vector<DataInstance> chunks;
            try {
                chunks = ingest_text(contents, rel, rel, options.max_chunk_chars);
            } catch (const IngestError& e) {
                throw IngestError(path.string() + ": " + e.what(), e.location());
            }
            lake.add_source({rel, rel, Modality::Text, 0}, std::move(chunks));
        }
    } catch (const IngestError& e) {
        throw LakeError(std::string("ingest failed: ") + e.what());
    }
    lake.check_manifest();

    if (options.write_manifest) {
        const auto rendered = render_manifest(lake);
        std::ifstream existing(dir / "manifest", std::ios::binary);
        std::ostringstream ss;
        if (existing) ss << existing.rdbuf();
        if (!existing || ss.str() != rendered) {
            std::ofstream out(dir / "manifest", std::ios::binary | std::ios::trunc);
            if (out) out << rendered;
        }
    }
    return lake;
}

std::string render_manifest(const DataLake& lake) {
    std::string out;
    for (const auto& s : lake.manifest()) {
        out += nlohmann::json(s).dump();
        out += '\n';
    }
    return out;
}

}  // namespace verifai
