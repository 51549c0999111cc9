#pragma once

#include "campus/context.hpp"

#include <optional>
#include <string>
#include <vector>

namespace campus {

struct CardDetails {
    std::string number;
    std::string holder;
    std::string expiry;
};

/// Per-term invoices built from approved enrollments, plus a simulated card
/// gateway. Only the last four card digits are ever stored.
class Finance {
  public:
    explicit Finance(Context& ctx) : ctx_(ctx) {}

    /// Adds the unit's fee to the student's Open invoice for the term,
    /// creating the invoice when needed. A unit without a fee row leaves the
    /// invoice alone and raises a MissingFee ops flag instead.
    std::optional<Invoice> on_enrollment_approved(DataAccess& da, const Enrollment& enrollment);
    /// Removes the enrollment's line from an Open invoice, if any.
    void on_enrollment_dropped(DataAccess& da, const Enrollment& enrollment);

    /// Open invoices first, then Paid; newest term first within each group.
    std::vector<Invoice> view_invoices(const Caller& caller, const PersonId& student);
    Payment pay_invoice(const Caller& caller, const std::string& invoice_id, Money amount, const CardDetails& card);

  private:
    Context& ctx_;
};

}  // namespace campus
