#include "campus/domain.hpp"

#include "campus/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <functional>

namespace campus {

namespace {

template <typename E, std::size_t N>
std::string_view name_of(E v, const std::array<std::string_view, N>& names) {
    return names.at(static_cast<std::size_t>(v));
}

template <typename E, std::size_t N>
E parse_named(std::string_view s, const std::array<std::string_view, N>& names, std::string_view what) {
    for (std::size_t i = 0; i < N; ++i) {
        if (names[i] == s) return static_cast<E>(i);
    }
    fail(ErrorCode::ValidationError, std::string("invalid ") + std::string(what) + ": '" + std::string(s) + "'",
         {{"field", what}, {"value", s}});
}

constexpr std::array<std::string_view, 3> kRoles{"Student", "AcademicStaff", "AdminStaff"};
constexpr std::array<std::string_view, 4> kStudentStatuses{"Applicant", "Active", "Graduated", "Withdrawn"};
constexpr std::array<std::string_view, 7> kGrades{"A", "B+", "B", "C+", "C", "D", "F"};
constexpr std::array<std::string_view, 3> kCategories{"Core", "Major", "Service"};
constexpr std::array<std::string_view, 3> kTermIndexes{"T1", "T2", "T3"};
constexpr std::array<std::string_view, 5> kEnrollmentStatuses{"PendingApproval", "Approved", "Rejected", "Dropped",
                                                              "Completed"};
constexpr std::array<std::string_view, 3> kRequestStatuses{"Submitted", "Approved", "Rejected"};
constexpr std::array<std::string_view, 2> kDecisions{"Approve", "Reject"};
constexpr std::array<std::string_view, 2> kTimetableKinds{"Class", "FinalExam"};
constexpr std::array<std::string_view, 2> kInvoiceStatuses{"Open", "Paid"};
constexpr std::array<std::string_view, 2> kLetterKinds{"Offer", "Decline"};

}  // namespace

std::string_view to_string(Role v) { return name_of(v, kRoles); }
std::string_view to_string(StudentStatus v) { return name_of(v, kStudentStatuses); }
std::string_view to_string(Grade v) { return name_of(v, kGrades); }
std::string_view to_string(RequirementCategory v) { return name_of(v, kCategories); }
std::string_view to_string(TermIndex v) { return name_of(v, kTermIndexes); }
std::string_view to_string(EnrollmentStatus v) { return name_of(v, kEnrollmentStatuses); }
std::string_view to_string(RequestStatus v) { return name_of(v, kRequestStatuses); }
std::string_view to_string(Decision v) { return name_of(v, kDecisions); }
std::string_view to_string(TimetableKind v) { return name_of(v, kTimetableKinds); }
std::string_view to_string(InvoiceStatus v) { return name_of(v, kInvoiceStatuses); }
std::string_view to_string(LetterKind v) { return name_of(v, kLetterKinds); }

Role parse_role(std::string_view s) { return parse_named<Role>(s, kRoles, "role"); }
StudentStatus parse_student_status(std::string_view s) {
    return parse_named<StudentStatus>(s, kStudentStatuses, "status");
}
Grade parse_grade(std::string_view s) { return parse_named<Grade>(s, kGrades, "grade"); }
RequirementCategory parse_category(std::string_view s) {
    return parse_named<RequirementCategory>(s, kCategories, "category");
}
TermIndex parse_term_index(std::string_view s) { return parse_named<TermIndex>(s, kTermIndexes, "term index"); }
EnrollmentStatus parse_enrollment_status(std::string_view s) {
    return parse_named<EnrollmentStatus>(s, kEnrollmentStatuses, "enrollment status");
}
RequestStatus parse_request_status(std::string_view s) {
    return parse_named<RequestStatus>(s, kRequestStatuses, "request status");
}
Decision parse_decision(std::string_view s) { return parse_named<Decision>(s, kDecisions, "decision"); }
TimetableKind parse_timetable_kind(std::string_view s) {
    return parse_named<TimetableKind>(s, kTimetableKinds, "kind");
}
InvoiceStatus parse_invoice_status(std::string_view s) {
    return parse_named<InvoiceStatus>(s, kInvoiceStatuses, "invoice status");
}

// ---------------------------------------------------------------------------

PersonId::PersonId(std::string value) : value_(std::move(value)) {
    if (!valid(value_)) {
        fail(ErrorCode::ValidationError, "invalid person id: '" + value_ + "'", {{"field", "person_id"}});
    }
}

bool PersonId::valid(std::string_view s) {
    if (s.size() < 4 || s.size() > 7) return false;
    if (!std::isupper(static_cast<unsigned char>(s[0]))) return false;
    return std::all_of(s.begin() + 1, s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

TermId TermId::parse(std::string_view s) {
    auto bad = [&]() -> TermId {
        fail(ErrorCode::ValidationError, "invalid term id: '" + std::string(s) + "'", {{"field", "term"}});
    };
    auto dash = s.find('-');
    if (dash == std::string_view::npos || dash == 0) return bad();
    int year = 0;
    auto ys = s.substr(0, dash);
    auto [p, ec] = std::from_chars(ys.data(), ys.data() + ys.size(), year);
    if (ec != std::errc{} || p != ys.data() + ys.size() || year < 1900 || year > 9999) return bad();
    auto idx = s.substr(dash + 1);
    if (idx != "T1" && idx != "T2" && idx != "T3") return bad();
    return TermId{year, parse_term_index(idx)};
}

std::string TermId::str() const { return std::to_string(year) + "-" + std::string(to_string(index)); }

Money Money::parse(std::string_view s) {
    auto bad = [&]() -> Money {
        fail(ErrorCode::ValidationError, "invalid amount: '" + std::string(s) + "'", {{"field", "amount"}});
    };
    if (s.empty()) return bad();
    auto dot = s.find('.');
    auto whole = s.substr(0, dot);
    std::string_view frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
    if (whole.empty() || frac.size() > 2 || (dot != std::string_view::npos && frac.empty())) return bad();
    auto digits = [](std::string_view d) {
        return std::all_of(d.begin(), d.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
    };
    if (!digits(whole) || !digits(frac) || whole.size() > 15) return bad();
    std::int64_t w = 0;
    std::from_chars(whole.data(), whole.data() + whole.size(), w);
    std::int64_t f = 0;
    if (!frac.empty()) {
        std::from_chars(frac.data(), frac.data() + frac.size(), f);
        if (frac.size() == 1) f *= 10;
    }
    return Money{w * 100 + f};
}

std::string Money::str() const {
    std::int64_t abs = cents < 0 ? -cents : cents;
    std::string frac = std::to_string(abs % 100);
    if (frac.size() < 2) frac.insert(0, "0");
    return (cents < 0 ? "-" : "") + std::to_string(abs / 100) + "." + frac;
}

// ---------------------------------------------------------------------------

bool passing_grade(Grade grade) {
    switch (grade) {
        case Grade::A:
        case Grade::BPlus:
        case Grade::B:
        case Grade::CPlus:
        case Grade::C:
            return true;
        case Grade::D:
        case Grade::F:
            return false;
    }
    return false;
}

std::set<std::string> passed_units(std::span<const GradeRecord> history) {
    std::set<std::string> out;
    for (const auto& g : history) {
        if (passing_grade(g.grade)) out.insert(g.unit_code);
    }
    return out;
}

bool prerequisites_met(std::span<const GradeRecord> history, const Unit& unit, const UnitCatalog& catalog) {
    for (const auto& code : unit.prerequisites) {
        if (!catalog.contains(code)) {
            fail(ErrorCode::UnknownUnit, "prerequisite '" + code + "' of " + unit.code + " names no unit",
                 {{"unit_code", code}});
        }
    }
    const auto passed = passed_units(history);
    return std::all_of(unit.prerequisites.begin(), unit.prerequisites.end(),
                       [&](const std::string& code) { return passed.contains(code); });
}

std::set<std::string> outstanding_requirements(const Program& program, std::span<const GradeRecord> history) {
    const auto passed = passed_units(history);
    std::set<std::string> out;
    for (const auto& r : program.requirements) {
        if (!passed.contains(r.unit_code)) out.insert(r.unit_code);
    }
    return out;
}

bool can_transition(EnrollmentStatus from, EnrollmentStatus to) {
    using S = EnrollmentStatus;
    switch (from) {
        case S::PendingApproval:
            // Pending enrollments are droppable inside the change window.
            return to == S::Approved || to == S::Rejected || to == S::Dropped;
        case S::Approved:
            return to == S::Dropped || to == S::Completed;
        case S::Rejected:
        case S::Dropped:
        case S::Completed:
            return false;
    }
    return false;
}

bool is_terminal(EnrollmentStatus status) {
    return status == EnrollmentStatus::Rejected || status == EnrollmentStatus::Dropped ||
           status == EnrollmentStatus::Completed;
}

bool can_transition(StudentStatus from, StudentStatus to) {
    using S = StudentStatus;
    if (from == S::Applicant) return to == S::Active;
    if (from == S::Active) return to == S::Graduated || to == S::Withdrawn;
    return false;
}

std::vector<std::string> prerequisite_order(const UnitCatalog& catalog) {
    enum class Mark { None, Visiting, Done };
    std::map<std::string, Mark> marks;
    std::vector<std::string> order;
    order.reserve(catalog.size());

    std::function<void(const std::string&)> visit = [&](const std::string& code) {
        auto& m = marks[code];
        if (m == Mark::Done) return;
        if (m == Mark::Visiting) {
            fail(ErrorCode::ValidationError, "prerequisite cycle through " + code, {{"unit_code", code}});
        }
        m = Mark::Visiting;
        const auto& unit = catalog.at(code);
        for (const auto& pre : unit.prerequisites) {
            if (pre == code) {
                fail(ErrorCode::ValidationError, code + " lists itself as a prerequisite", {{"unit_code", code}});
            }
            if (!catalog.contains(pre)) {
                fail(ErrorCode::ValidationError, "prerequisite '" + pre + "' of " + code + " names no unit",
                     {{"unit_code", pre}});
            }
            visit(pre);
        }
        marks[code] = Mark::Done;
        order.push_back(code);
    };
    for (const auto& [code, _] : catalog) visit(code);
    return order;
}

int weekday_rank(std::string_view day) {
    static constexpr std::array<std::string_view, 7> kDays{"Monday", "Tuesday", "Wednesday", "Thursday",
                                                           "Friday", "Saturday", "Sunday"};
    for (std::size_t i = 0; i < kDays.size(); ++i) {
        if (kDays[i] == day || kDays[i].substr(0, 3) == day) return static_cast<int>(i);
    }
    return static_cast<int>(kDays.size());
}

}  // namespace campus
