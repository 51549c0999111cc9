#include "campus/finance.hpp"

#include "campus/crypto.hpp"
#include "campus/error.hpp"

#include <algorithm>

namespace campus {

std::optional<Invoice> Finance::on_enrollment_approved(DataAccess& da, const Enrollment& e) {
    auto fee = da.fee(e.offering.unit_code);
    if (!fee) {
        da.flag("MissingFee", e.offering.unit_code + " (enrollment " + e.id + ")", ctx_.now_stamp());
        return std::nullopt;
    }
    auto inv = da.open_invoice(e.student_id, e.offering.term);
    if (!inv) {
        Invoice fresh;
        fresh.id = ctx_.new_id();
        fresh.student_id = e.student_id;
        fresh.term = e.offering.term;
        fresh.status = InvoiceStatus::Open;
        da.insert_invoice(fresh, ctx_.now_stamp());
        inv = fresh;
    }
    da.insert_invoice_line(inv->id, e.id, InvoiceLine{e.offering.unit_code, *fee});
    return da.invoice(inv->id);
}

void Finance::on_enrollment_dropped(DataAccess& da, const Enrollment& e) {
    auto removed = da.remove_open_invoice_line(e.id);
    if (!removed) return;
    auto inv = da.invoice(removed->first);
    if (inv->line_items.empty() && inv->paid.cents == 0) {
        da.delete_invoice(inv->id);
        return;
    }
    if (inv->paid > inv->total) {
        // No refunds: keep the line rather than leave the invoice overpaid.
        da.insert_invoice_line(inv->id, e.id, InvoiceLine{e.offering.unit_code, removed->second});
        return;
    }
    if (inv->paid == inv->total) da.set_invoice_status(inv->id, InvoiceStatus::Paid);
}

std::vector<Invoice> Finance::view_invoices(const Caller& caller, const PersonId& student) {
    require_self_or_staff(caller, student, "view invoices");
    auto tx = ctx_.db.begin();
    DataAccess da(tx);
    if (!da.student(student)) fail(ErrorCode::UnknownStudent, "no student " + student.str());
    auto out = da.invoices_for_student(student);
    std::sort(out.begin(), out.end(), [](const Invoice& a, const Invoice& b) {
        if (a.status != b.status) return a.status == InvoiceStatus::Open;
        if (a.term != b.term) return a.term > b.term;
        return a.id < b.id;
    });
    return out;
}

Payment Finance::pay_invoice(const Caller& caller, const std::string& invoice_id, Money amount,
                             const CardDetails& card) {
    if (amount.cents <= 0) fail(ErrorCode::ValidationError, "amount must be positive", {{"fields", {"amount"}}});
    if (!crypto::luhn_valid(card.number)) fail(ErrorCode::InvalidCard, "card number failed validation");
    std::string digits;
    for (char c : card.number) {
        if (c >= '0' && c <= '9') digits.push_back(c);
    }

    auto tx = ctx_.db.begin();
    DataAccess da(tx);
    auto inv = da.invoice(invoice_id);
    if (!inv) fail(ErrorCode::UnknownInvoice, "no invoice " + invoice_id);
    if (!caller.is_staff() && inv->student_id != caller.id) {
        fail(ErrorCode::Forbidden, "students may only pay their own invoices");
    }
    if (inv->status != InvoiceStatus::Open) fail(ErrorCode::InvoiceClosed, "invoice " + invoice_id + " is already paid");
    if (amount > inv->balance()) {
        fail(ErrorCode::Overpayment, "payment exceeds the outstanding balance",
             {{"balance", inv->balance().str()}, {"amount", amount.str()}});
    }
    Payment p;
    p.id = ctx_.new_id();
    p.invoice_id = invoice_id;
    p.amount = amount;
    p.card_last4 = digits.substr(digits.size() - 4);
    p.recorded_at = ctx_.now_stamp();
    da.insert_payment(p);
    if (inv->paid + amount == inv->total) da.set_invoice_status(invoice_id, InvoiceStatus::Paid);
    tx.commit();
    return p;
}

}  // namespace campus
