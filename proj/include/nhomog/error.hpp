#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nhomog {

enum class ErrorKind {
    NotHermitian,
    NotSquare,
    DimensionMismatch,
    DomainError,
    NumericalFailure,
    NotIrreducible,
    NotNHomogeneous,
    TableMismatch,
    IndexOutOfRange,
    MCBudgetTooSmall,
    ArityMismatch,
    NotAStarHom,
    SpaceMismatch,
    SamePoint,
    PreconditionFailed,
    HypothesisViolated,
    SpectraNotDisjoint,
    ParseError,
    SchemaError,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::NotHermitian: return "NotHermitian";
        case ErrorKind::NotSquare: return "NotSquare";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::DomainError: return "DomainError";
        case ErrorKind::NumericalFailure: return "NumericalFailure";
        case ErrorKind::NotIrreducible: return "NotIrreducible";
        case ErrorKind::NotNHomogeneous: return "NotNHomogeneous";
        case ErrorKind::TableMismatch: return "TableMismatch";
        case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorKind::MCBudgetTooSmall: return "MCBudgetTooSmall";
        case ErrorKind::ArityMismatch: return "ArityMismatch";
        case ErrorKind::NotAStarHom: return "NotAStarHom";
        case ErrorKind::SpaceMismatch: return "SpaceMismatch";
        case ErrorKind::SamePoint: return "SamePoint";
        case ErrorKind::PreconditionFailed: return "PreconditionFailed";
        case ErrorKind::HypothesisViolated: return "HypothesisViolated";
        case ErrorKind::SpectraNotDisjoint: return "SpectraNotDisjoint";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::SchemaError: return "SchemaError";
    }
    return "Unknown";
}

/// Every failure in the library is reported through this one exception type;
/// callers that care about the category switch on kind().
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
    if (!cond) fail(kind, what);
}

}  // namespace nhomog
