#ifndef DFORGE_ERROR_HPP
#define DFORGE_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace dforge
{

// Stable error codes. The CLI prints the code name, so never renumber or rename.
enum class ErrorCode {
    BadBasis,
    BasisMismatch,
    BadBound,
    ExplicitVariable,
    ResultantVanished,
    DegenerateInput,
    HorizonTooShort,
    PartialVanishes,
    NotFormallySatisfied,
    VerificationFailed,
    PrecisionTie,
    NotInLattice,
    ZeroScalar,
    FactorLimitExceeded,
    UnknownFamily,
    InsufficientNonzeroTerms,
    ShiftPresent,
    InvarianceViolated,
    SyntaxError,
    UnknownSymbol,
    SchemaError,
    Io,
};

inline std::string_view to_string(ErrorCode c)
{
    switch (c) {
        case ErrorCode::BadBasis: return "BadBasis";
        case ErrorCode::BasisMismatch: return "BasisMismatch";
        case ErrorCode::BadBound: return "BadBound";
        case ErrorCode::ExplicitVariable: return "ExplicitVariable";
        case ErrorCode::ResultantVanished: return "ResultantVanished";
        case ErrorCode::DegenerateInput: return "DegenerateInput";
        case ErrorCode::HorizonTooShort: return "HorizonTooShort";
        case ErrorCode::PartialVanishes: return "PartialVanishes";
        case ErrorCode::NotFormallySatisfied: return "NotFormallySatisfied";
        case ErrorCode::VerificationFailed: return "VerificationFailed";
        case ErrorCode::PrecisionTie: return "PrecisionTie";
        case ErrorCode::NotInLattice: return "NotInLattice";
        case ErrorCode::ZeroScalar: return "ZeroScalar";
        case ErrorCode::FactorLimitExceeded: return "FactorLimitExceeded";
        case ErrorCode::UnknownFamily: return "UnknownFamily";
        case ErrorCode::InsufficientNonzeroTerms: return "InsufficientNonzeroTerms";
        case ErrorCode::ShiftPresent: return "ShiftPresent";
        case ErrorCode::InvarianceViolated: return "InvarianceViolated";
        case ErrorCode::SyntaxError: return "SyntaxError";
        case ErrorCode::UnknownSymbol: return "UnknownSymbol";
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string &msg)
        : std::runtime_error(std::string(to_string(code)) + ": " + msg), m_code(code)
    {
    }

    ErrorCode code() const noexcept
    {
        return m_code;
    }

private:
    ErrorCode m_code;
};

} // namespace dforge

#endif
