#pragma once

#include <stdexcept>
#include <string>

namespace varith {

enum class Errc {
    NonPositiveKappa,
    UniformKappaMismatch,
    OrderExceeded,
    DomainError,
    NonFiniteInput,
    OverflowToNonFinite,
    NonPositiveValue,
    ZeroBaseNonNatural,
    DegreeExceeded,
    ExpansionRejected,
    DimensionTooLarge,
    SingularMatrix,
    IllConditioned,
    SeriesTooShort,
    OrderOutOfRange,
    LengthMismatch,
    FrequencyOutOfRange,
    ParseError,
    UnknownExperiment,
    ConfigInvalid,
};

inline const char* errc_name(Errc e) {
    switch (e) {
    case Errc::NonPositiveKappa: return "NonPositiveKappa";
    case Errc::UniformKappaMismatch: return "UniformKappaMismatch";
    case Errc::OrderExceeded: return "OrderExceeded";
    case Errc::DomainError: return "DomainError";
    case Errc::NonFiniteInput: return "NonFiniteInput";
    case Errc::OverflowToNonFinite: return "OverflowToNonFinite";
    case Errc::NonPositiveValue: return "NonPositiveValue";
    case Errc::ZeroBaseNonNatural: return "ZeroBaseNonNatural";
    case Errc::DegreeExceeded: return "DegreeExceeded";
    case Errc::ExpansionRejected: return "ExpansionRejected";
    case Errc::DimensionTooLarge: return "DimensionTooLarge";
    case Errc::SingularMatrix: return "SingularMatrix";
    case Errc::IllConditioned: return "IllConditioned";
    case Errc::SeriesTooShort: return "SeriesTooShort";
    case Errc::OrderOutOfRange: return "OrderOutOfRange";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::FrequencyOutOfRange: return "FrequencyOutOfRange";
    case Errc::ParseError: return "ParseError";
    case Errc::UnknownExperiment: return "UnknownExperiment";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
    explicit Error(Errc code) : Error(code, "") {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace varith
