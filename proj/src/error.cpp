#include "campus/error.hpp"

#include <algorithm>

namespace campus {

namespace {

constexpr std::string_view kNames[] = {
    "InvalidCredentials",
    "AccountInactive",
    "UnknownSession",
    "SessionExpired",
    "Forbidden",
    "CredentialExists",
    "UnknownPerson",
    "ValidationError",
    "MalformedPayload",
    "UnknownOperation",
    "UnknownProgram",
    "UnknownUnit",
    "UnknownTerm",
    "UnknownStudent",
    "UnknownOffering",
    "UnknownApplication",
    "UnknownEnrollment",
    "UnknownRequest",
    "UnknownInvoice",
    "UnknownFilter",
    "AlreadyDecided",
    "MissingReason",
    "TermNotOpen",
    "DuplicateEnrollment",
    "NotEligible",
    "InactiveOffering",
    "PrerequisiteNotMet",
    "ChangeWindowClosed",
    "AlreadyTerminal",
    "EmptyRequest",
    "NotApproved",
    "GradeExists",
    "MalformedFile",
    "RequirementsOutstanding",
    "DuplicateRequest",
    "NoLongerEligible",
    "Overpayment",
    "InvalidCard",
    "InvoiceClosed",
    "StorageUnavailable",
    "CorruptSchema",
    "ReferentialViolation",
    "DuplicateKey",
    "PortInUse",
    "ServerBusy",
    "AppTierUnavailable",
    "InternalError",
};

static_assert(std::size(kNames) == static_cast<std::size_t>(ErrorCode::InternalError) + 1,
              "error catalog out of sync with ErrorCode");

}  // namespace

std::string_view error_code_name(ErrorCode code) {
    return kNames[static_cast<std::size_t>(code)];
}

const std::vector<std::string_view>& error_catalog() {
    static const std::vector<std::string_view> catalog(std::begin(kNames), std::end(kNames));
    return catalog;
}

bool is_catalog_code(std::string_view name) {
    return std::find(std::begin(kNames), std::end(kNames), name) != std::end(kNames);
}

}  // namespace campus
