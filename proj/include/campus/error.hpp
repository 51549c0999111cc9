#pragma once

#include <nlohmann/json.hpp>

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace campus {

// Stable error catalog. Every code here has a fixed wire name; no other code
// ever crosses the tier boundary.
enum class ErrorCode {
    // auth-access
    InvalidCredentials,
    AccountInactive,
    UnknownSession,
    SessionExpired,
    Forbidden,
    CredentialExists,
    UnknownPerson,
    // generic validation / lookup
    ValidationError,
    MalformedPayload,
    UnknownOperation,
    UnknownProgram,
    UnknownUnit,
    UnknownTerm,
    UnknownStudent,
    UnknownOffering,
    UnknownApplication,
    UnknownEnrollment,
    UnknownRequest,
    UnknownInvoice,
    UnknownFilter,
    // workflow
    AlreadyDecided,
    MissingReason,
    TermNotOpen,
    DuplicateEnrollment,
    NotEligible,
    InactiveOffering,
    PrerequisiteNotMet,
    ChangeWindowClosed,
    AlreadyTerminal,
    EmptyRequest,
    NotApproved,
    GradeExists,
    MalformedFile,
    RequirementsOutstanding,
    DuplicateRequest,
    NoLongerEligible,
    // finance
    Overpayment,
    InvalidCard,
    InvoiceClosed,
    // persistence
    StorageUnavailable,
    CorruptSchema,
    ReferentialViolation,
    DuplicateKey,
    // server
    PortInUse,
    ServerBusy,
    AppTierUnavailable,
    InternalError,
};

std::string_view error_code_name(ErrorCode code);

/// Every wire name in the catalog, in declaration order.
const std::vector<std::string_view>& error_catalog();

bool is_catalog_code(std::string_view name);

/// Domain failure carrying a catalog code, a human-readable message and an
/// optional structured detail document (e.g. the list of missing fields).
class CampusError : public std::runtime_error {
  public:
    CampusError(ErrorCode code, std::string message, nlohmann::json details = nlohmann::json::object())
        : std::runtime_error(std::move(message)), code_(code), details_(std::move(details)) {}

    ErrorCode code() const noexcept { return code_; }
    const nlohmann::json& details() const noexcept { return details_; }

  private:
    ErrorCode code_;
    nlohmann::json details_;
};

[[noreturn]] inline void fail(ErrorCode code, std::string message, nlohmann::json details = nlohmann::json::object()) {
    throw CampusError(code, std::move(message), std::move(details));
}

}  // namespace campus
