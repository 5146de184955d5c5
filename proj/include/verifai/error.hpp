#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace verifai {

/// Root of every exception thrown by the engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define VERIFAI_DEFINE_ERROR(Name)              \
    class Name : public Error {                 \
    public:                                     \
        using Error::Error;                     \
    }

VERIFAI_DEFINE_ERROR(LakeError);
VERIFAI_DEFINE_ERROR(IndexError);
VERIFAI_DEFINE_ERROR(VersionError);
VERIFAI_DEFINE_ERROR(EmbedServiceError);
VERIFAI_DEFINE_ERROR(RerankError);
VERIFAI_DEFINE_ERROR(DispatchError);
VERIFAI_DEFINE_ERROR(ContractError);
VERIFAI_DEFINE_ERROR(VerifierServiceError);
VERIFAI_DEFINE_ERROR(ProvenanceError);
VERIFAI_DEFINE_ERROR(NotFoundError);
VERIFAI_DEFINE_ERROR(CorruptionError);
VERIFAI_DEFINE_ERROR(BenchError);
VERIFAI_DEFINE_ERROR(MetricError);

#undef VERIFAI_DEFINE_ERROR

/// Ingestion failure. Carries the 1-based row (tables) or byte offset (text)
/// when one applies.
class IngestError : public Error {
public:
    explicit IngestError(const std::string& what, std::ptrdiff_t location = -1)
        : Error(what), location_(location) {}

    std::ptrdiff_t location() const noexcept { return location_; }

private:
    std::ptrdiff_t location_;
};

/// An external verifier answer that names none of the three verdicts.
class ParseError : public Error {
public:
    explicit ParseError(std::string raw)
        : Error("no verdict found in response"), raw_(std::move(raw)) {}

    const std::string& raw() const noexcept { return raw_; }

private:
    std::string raw_;
};

}  // namespace verifai
