#include "verifai/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <semaphore>

#include "http_client.hpp"
#include "verifai/error.hpp"
#include "verifai/text.hpp"

namespace verifai {

std::string_view to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::Verified: return "Verified";
        case Verdict::Refuted: return "Refuted";
        case Verdict::NotRelated: return "NotRelated";
    }
    return "NotRelated";
}

Verdict parse_verdict_name(std::string_view s) {
    const auto n = text::to_lower(text::trim(s));
    if (n == "verified" || n == "0") return Verdict::Verified;
    if (n == "refuted" || n == "1") return Verdict::Refuted;
    if (n == "notrelated" || n == "not_related" || n == "not related" || n == "unrelated" || n == "2") {
        return Verdict::NotRelated;
    }
    throw ContractError("unknown verdict '" + std::string(s) + "'");
}

std::string_view to_string(VerifierMode m) noexcept {
    switch (m) {
        case VerifierMode::Local: return "local";
        case VerifierMode::External: return "external";
        case VerifierMode::Auto: return "auto";
    }
    return "local";
}

VerifierMode parse_verifier_mode(std::string_view s) {
    if (s == "local") return VerifierMode::Local;
    if (s == "external") return VerifierMode::External;
    if (s == "auto") return VerifierMode::Auto;
    throw ContractError("unknown verifier mode '" + std::string(s) + "'");
}

// --- trust -------------------------------------------------------------------

double TrustConfig::weight_for(std::string_view source_id) const {
    auto it = per_source.find(std::string(source_id));
    return it == per_source.end() ? default_weight : it->second;
}

void TrustConfig::validate() const {
    if (!(default_weight > 0.0 && default_weight <= 1.0)) {
        throw ContractError("default trust weight must lie in (0, 1]");
    }
    for (const auto& [source, w] : per_source) {
        if (!(w >= 0.0 && w <= 1.0)) throw ContractError("trust weight for '" + source + "' must lie in [0, 1]");
    }
}

TrustConfig TrustConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ContractError("cannot open trust file " + path.string());
    TrustConfig cfg;
    try {
        const auto j = nlohmann::json::parse(in);
        cfg.default_weight = j.value("default_weight", 1.0);
        if (j.contains("per_source")) cfg.per_source = j.at("per_source").get<std::map<std::string, double>>();
    } catch (const nlohmann::json::exception& e) {
        throw ContractError("malformed trust file " + path.string() + ": " + e.what());
    }
    cfg.validate();
    return cfg;
}

// --- prompts -----------------------------------------------------------------

namespace {

void append_tab_joined(std::string& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += '\t';
        out += cells[i];
    }
}

}  // namespace

std::string render_completion_prompt(const Table& tbl) {
    const bool has_nan = std::any_of(tbl.rows.begin(), tbl.rows.end(), [](const auto& row) {
        return std::find(row.begin(), row.end(), "NaN") != row.end();
    });
    if (!has_nan) throw ContractError("table '" + tbl.table_id + "' has no NaN cell to fill");

    std::string out = "Question:\n";
    out += tbl.name;
    out += '\n';
    append_tab_joined(out, tbl.schema);
    for (const auto& row : tbl.rows) {
        out += '\n';
        append_tab_joined(out, row);
    }
    out += '\n';
    out += kCompletionInstruction;
    return out;
}

std::string render_verification_prompt(const DataObject& g, const DataInstance& x) {
    std::string out(kVerificationInstruction);
    out += "\nEvidence: ";
    out += serialize_instance(x);
    out += "\nGenerative Data: ";
    out += serialize_object(g);
    out += '\n';
    out += kResultLine;
    return out;
}

// --- verdict parsing ---------------------------------------------------------

std::pair<Verdict, std::string> parse_verdict(std::string_view raw) {
    static const std::regex pattern(R"((^|[^a-z])(verified|refuted|not[ _-]*related|unrelated)(?![a-z]))",
                                    std::regex::icase | std::regex::ECMAScript);
    const std::string head(raw.substr(0, 200));
    std::smatch m;
    if (!std::regex_search(head, m, pattern)) throw ParseError(std::string(raw));

    const auto word = text::to_lower(m.str(2));
    Verdict v = Verdict::NotRelated;
    if (word == "verified") v = Verdict::Verified;
    else if (word == "refuted") v = Verdict::Refuted;

    std::string_view rest = raw.substr(static_cast<std::size_t>(m.position(2) + m.length(2)));
    for (;;) {
        if (!rest.empty() && std::string_view(" \t\r\n.,:;!-").find(rest.front()) != std::string_view::npos) {
            rest.remove_prefix(1);
        } else if (rest.starts_with("\xE2\x80\x94") || rest.starts_with("\xE2\x80\x93")) {
            rest.remove_prefix(3);
        } else {
            break;
        }
    }
    return {v, std::string(rest)};
}

// --- external verifier -------------------------------------------------------

std::string call_external_verifier(const ExternalVerifierConfig& config, const std::string& prompt) {
    const nlohmann::json request = {{"model", config.model},
                                    {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
                                    {"temperature", 0}};
    std::optional<std::string> token = config.token;
    if (!token) {
        if (const char* v = std::getenv("VERIFAI_LLM_TOKEN")) token = v;
    }
    std::string answer;
    try {
        detail::post_json(config.endpoint, request, token, {config.max_attempts, config.backoff, config.timeout},
                          [&](const nlohmann::json& body) {
                              const auto& content = body.at("choices").at(0).at("message").at("content");
                              if (!content.is_string()) throw detail::HttpFailure("message content is not a string");
                              answer = content.get<std::string>();
                          });
    } catch (const detail::HttpFailure& e) {
        throw VerifierServiceError(std::string("external verifier: ") + e.what());
    }
    return answer;
}

namespace {

class LocalTupleVerifier final : public Verifier {
public:
    std::string_view id() const override { return verifier_ids::kExactTuple; }
    VerdictRecord verify(const DataObject& g, const DataInstance& x) const override {
        if (g.kind != ObjectKind::ImputedTuple || !x.tuple()) throw DispatchError("exact_tuple needs (imputed_tuple, tuple)");
        return verify_tuple_tuple(g, *x.tuple(), x.instance_id);
    }
};

class LexicalTextVerifier final : public Verifier {
public:
    std::string_view id() const override { return verifier_ids::kLexicalText; }
    VerdictRecord verify(const DataObject& g, const DataInstance& x) const override {
        if (!x.chunk()) throw DispatchError("lexical_text needs text evidence");
        if (g.kind == ObjectKind::ImputedTuple) return verify_tuple_text(g, *x.chunk(), x.instance_id);
        return verify_claim_text(g, *x.chunk(), x.instance_id);
    }
};

class TableClaimVerifier final : public Verifier {
public:
    std::string_view id() const override { return verifier_ids::kTableClaim; }
    VerdictRecord verify(const DataObject& g, const DataInstance& x) const override {
        if (g.kind != ObjectKind::TextualClaim || !x.table()) throw DispatchError("table_claim needs (textual_claim, table)");
        return verify_claim_table(g, *x.table(), x.instance_id);
    }
};

class ExternalLlmVerifier final : public Verifier {
public:
    explicit ExternalLlmVerifier(ExternalVerifierConfig config)
        : config_(std::move(config)), slots_(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, config_.max_in_flight))) {}

    std::string_view id() const override { return verifier_ids::kExternalLlm; }

    VerdictRecord verify(const DataObject& g, const DataInstance& x) const override {
        const auto prompt = render_verification_prompt(g, x);
        std::string raw;
        slots_.acquire();
        try {
            raw = call_external_verifier(config_, prompt);
        } catch (...) {
            slots_.release();
            throw;
        }
        slots_.release();

        VerdictRecord r{g.object_id, x.instance_id, Verdict::NotRelated, std::string(verifier_ids::kExternalLlm), {}, raw};
        try {
            auto [verdict, explanation] = parse_verdict(raw);
            r.verdict = verdict;
            r.explanation = std::move(explanation);
        } catch (const ParseError&) {
            r.verifier_id = verifier_ids::kExternalUnparsed;
            r.explanation = "unparsed verifier response";
        }
        return r;
    }

private:
    ExternalVerifierConfig config_;
    mutable std::counting_semaphore<> slots_;
};

}  // namespace

std::unique_ptr<Verifier> make_external_verifier(ExternalVerifierConfig config) {
    return std::make_unique<ExternalLlmVerifier>(std::move(config));
}

// --- registry and dispatch ---------------------------------------------------

void VerifierRegistry::add(std::unique_ptr<Verifier> verifier) {
    std::string id(verifier->id());
    verifiers_[std::move(id)] = std::shared_ptr<const Verifier>(std::move(verifier));
}

const Verifier* VerifierRegistry::find(std::string_view id) const {
    auto it = verifiers_.find(id);
    return it == verifiers_.end() ? nullptr : it->second.get();
}

std::vector<std::string> VerifierRegistry::ids() const {
    std::vector<std::string> out;
    for (const auto& [id, v] : verifiers_) out.push_back(id);
    return out;
}

VerifierRegistry VerifierRegistry::local() {
    VerifierRegistry r;
    r.add(std::make_unique<LocalTupleVerifier>());
    r.add(std::make_unique<LexicalTextVerifier>());
    r.add(std::make_unique<TableClaimVerifier>());
    return r;
}

VerifierRegistry VerifierRegistry::with_external(ExternalVerifierConfig config) {
    auto r = local();
    r.add(make_external_verifier(std::move(config)));
    return r;
}

std::vector<Modality> mapped_modalities(ObjectKind kind) {
    if (kind == ObjectKind::ImputedTuple) return {Modality::Tuple, Modality::Text};
    return {Modality::Table, Modality::Text};
}

std::string select_verifier(const DataObject& g, Modality x, const VerifierRegistry& registry, VerifierMode mode) {
    if (registry.empty()) throw ContractError("verifier registry is empty");

    std::string_view local;
    if (g.kind == ObjectKind::ImputedTuple) {
        if (x == Modality::Tuple) local = verifier_ids::kExactTuple;
        else if (x == Modality::Text) local = verifier_ids::kLexicalText;
    } else {
        if (x == Modality::Text) local = verifier_ids::kLexicalText;
        else if (x == Modality::Table) local = verifier_ids::kTableClaim;
    }
    if (local.empty()) {
        throw DispatchError("no verifier for (" + std::string(to_string(g.kind)) + ", " + std::string(to_string(x)) + ")");
    }

    bool external = mode == VerifierMode::External;
    if (mode == VerifierMode::Auto) external = registry.find(verifier_ids::kExternalLlm) != nullptr;
    const std::string_view chosen = external ? verifier_ids::kExternalLlm : local;
    if (!registry.find(chosen)) throw DispatchError("verifier '" + std::string(chosen) + "' is not registered");
    return std::string(chosen);
}

// --- aggregation -------------------------------------------------------------

Aggregate aggregate(const std::vector<VerdictRecord>& records, const SourceLookup& source_of, const TrustConfig& trust) {
    std::vector<double> verified;
    std::vector<double> refuted;
    for (const auto& r : records) {
        if (r.verdict == Verdict::NotRelated) continue;
        const auto source = source_of ? source_of(r.instance_id) : std::nullopt;
        const double w = source ? trust.weight_for(*source) : trust.default_weight;
        (r.verdict == Verdict::Verified ? verified : refuted).push_back(w);
    }
    auto total = [](std::vector<double>& ws) {
        std::sort(ws.begin(), ws.end());
        double s = 0.0;
        for (double w : ws) s += w;
        return s;
    };
    const double wv = total(verified);
    const double wr = total(refuted);

    if (wv == 0.0 && wr == 0.0) return {Verdict::NotRelated, false};
    const bool tie = std::fabs(wv - wr) <= 1e-9 * std::max(wv, wr);
    if (tie) return {Verdict::Refuted, true};
    if (wv > wr) return {Verdict::Verified, wr > 0.0};
    return {Verdict::Refuted, wv > 0.0};
}

}  // namespace verifai
