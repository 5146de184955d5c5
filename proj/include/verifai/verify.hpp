#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "verifai/lake.hpp"

namespace verifai {

/// verify(g, x) outcome. The numeric codes are part of the wire format.
enum class Verdict : int { Verified = 0, Refuted = 1, NotRelated = 2 };

std::string_view to_string(Verdict v) noexcept;
/// Case-insensitive; accepts "verified", "refuted", "notrelated", "not_related",
/// "not related", "unrelated" and the codes "0".."2". Throws ContractError.
Verdict parse_verdict_name(std::string_view s);

struct VerdictRecord {
    std::string object_id;
    std::string instance_id;
    Verdict verdict = Verdict::NotRelated;
    std::string verifier_id;
    std::string explanation;
    std::optional<std::string> raw_response;

    bool operator==(const VerdictRecord&) const = default;
};

namespace verifier_ids {
inline constexpr std::string_view kExactTuple = "exact_tuple";
inline constexpr std::string_view kLexicalText = "lexical_text";
inline constexpr std::string_view kTableClaim = "table_claim";
inline constexpr std::string_view kExternalLlm = "external_llm";
inline constexpr std::string_view kExternalUnparsed = "external_llm:unparsed";
}  // namespace verifier_ids

/// Per-source weights used when evidence disagrees.
struct TrustConfig {
    double default_weight = 1.0;
    std::map<std::string, double> per_source;

    double weight_for(std::string_view source_id) const;
    /// default_weight in (0, 1], every per-source weight in [0, 1].
    void validate() const;
    static TrustConfig load(const std::filesystem::path& path);

    bool operator==(const TrustConfig&) const = default;
};

// --- local verifiers ---------------------------------------------------------

/// The fixed 50-word stoplist used by the lexical verifiers.
const std::vector<std::string>& stoplist();

/// Key attributes decide relatedness, the target attribute decides the verdict.
/// ContractError when g has no target attribute.
VerdictRecord verify_tuple_tuple(const DataObject& g, const Tuple& x, std::string_view instance_id = {});

/// Imputed tuple against a text chunk: the chunk must mention every key token;
/// the target value must then be stated (near the attribute name when the
/// chunk names it) for Verified, otherwise the chunk refutes it when it names
/// the attribute. ContractError when g has no target attribute.
VerdictRecord verify_tuple_text(const DataObject& g, const TextChunk& x, std::string_view instance_id = {});

/// Content-word containment with a negation window.
VerdictRecord verify_claim_text(const DataObject& g, const TextChunk& x, std::string_view instance_id = {});

/// Entity-token gating followed by number checks against matching rows.
VerdictRecord verify_claim_table(const DataObject& g, const Table& x, std::string_view instance_id = {});

// --- prompts -----------------------------------------------------------------

inline constexpr std::string_view kCompletionInstruction = "Please fill the missing values, annotated by NaN";
inline constexpr std::string_view kVerificationInstruction =
    "Please use the evidence below to validate the generative data.";
inline constexpr std::string_view kResultLine = "Result: Verified/Refuted/Not Related + Further explanation";

/// "Question:", table name, tab-separated header and rows, instruction.
/// ContractError when no cell equals "NaN".
std::string render_completion_prompt(const Table& tbl);

std::string render_verification_prompt(const DataObject& g, const DataInstance& x);

// --- external verifier -------------------------------------------------------

struct ExternalVerifierConfig {
    std::string endpoint;  // chat-completion style URL
    std::string model = "gpt-3.5-turbo";
    std::optional<std::string> token;  // falls back to VERIFAI_LLM_TOKEN
    int max_attempts = 3;
    std::chrono::milliseconds backoff{200};
    std::chrono::milliseconds timeout{30000};
    std::size_t max_in_flight = 4;
};

/// POSTs {model, messages:[{role:"user", content}], temperature: 0} and returns
/// choices[0].message.content. Throws VerifierServiceError.
std::string call_external_verifier(const ExternalVerifierConfig& config, const std::string& prompt);

/// Earliest verdict word in the first 200 characters; the rest is the
/// explanation. Throws ParseError.
std::pair<Verdict, std::string> parse_verdict(std::string_view raw);

// --- dispatch ----------------------------------------------------------------

class Verifier {
public:
    virtual ~Verifier() = default;
    virtual std::string_view id() const = 0;
    virtual VerdictRecord verify(const DataObject& g, const DataInstance& x) const = 0;
};

class VerifierRegistry {
public:
    void add(std::unique_ptr<Verifier> verifier);
    const Verifier* find(std::string_view id) const;
    bool empty() const noexcept { return verifiers_.empty(); }
    std::vector<std::string> ids() const;

    /// exact_tuple, lexical_text and table_claim.
    static VerifierRegistry local();
    /// The local verifiers plus external_llm.
    static VerifierRegistry with_external(ExternalVerifierConfig config);

private:
    std::map<std::string, std::shared_ptr<const Verifier>, std::less<>> verifiers_;
};

std::unique_ptr<Verifier> make_external_verifier(ExternalVerifierConfig config);

enum class VerifierMode { Local, External, Auto };

std::string_view to_string(VerifierMode m) noexcept;
VerifierMode parse_verifier_mode(std::string_view s);

/// Static agent: (kind, modality) -> verifier id. External mode sends every
/// mapped pair to external_llm; auto picks external only when the registry
/// holds external_llm. DispatchError for unmapped or unregistered pairs.
std::string select_verifier(const DataObject& g, Modality x, const VerifierRegistry& registry, VerifierMode mode);

/// Evidence modalities that have a verifier for this object kind.
std::vector<Modality> mapped_modalities(ObjectKind kind);

// --- aggregation -------------------------------------------------------------

struct Aggregate {
    Verdict verdict = Verdict::NotRelated;
    bool conflict = false;

    bool operator==(const Aggregate&) const = default;
};

using SourceLookup = std::function<std::optional<std::string>(std::string_view instance_id)>;

/// Trust-weighted vote: NotRelated records carry no weight, ties go to Refuted
/// with conflict set.
Aggregate aggregate(const std::vector<VerdictRecord>& records, const SourceLookup& source_of,
                    const TrustConfig& trust);

}  // namespace verifai
