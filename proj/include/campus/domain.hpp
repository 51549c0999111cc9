#pragma once

// Core value types of the campus system. Pure data plus the handful of
// predicates every business module shares; nothing here performs I/O.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace campus {

enum class Role { Student, AcademicStaff, AdminStaff };
enum class StudentStatus { Applicant, Active, Graduated, Withdrawn };
enum class Grade { A, BPlus, B, CPlus, C, D, F };
enum class RequirementCategory { Core, Major, Service };
enum class TermIndex { T1, T2, T3 };
enum class EnrollmentStatus { PendingApproval, Approved, Rejected, Dropped, Completed };
enum class RequestStatus { Submitted, Approved, Rejected };
enum class Decision { Approve, Reject };
enum class TimetableKind { Class, FinalExam };
enum class InvoiceStatus { Open, Paid };
enum class LetterKind { Offer, Decline };

std::string_view to_string(Role v);
std::string_view to_string(StudentStatus v);
std::string_view to_string(Grade v);
std::string_view to_string(RequirementCategory v);
std::string_view to_string(TermIndex v);
std::string_view to_string(EnrollmentStatus v);
std::string_view to_string(RequestStatus v);
std::string_view to_string(Decision v);
std::string_view to_string(TimetableKind v);
std::string_view to_string(InvoiceStatus v);
std::string_view to_string(LetterKind v);

// Parsers throw CampusError(ValidationError) naming the offending text.
Role parse_role(std::string_view s);
StudentStatus parse_student_status(std::string_view s);
Grade parse_grade(std::string_view s);
RequirementCategory parse_category(std::string_view s);
TermIndex parse_term_index(std::string_view s);
EnrollmentStatus parse_enrollment_status(std::string_view s);
RequestStatus parse_request_status(std::string_view s);
Decision parse_decision(std::string_view s);
TimetableKind parse_timetable_kind(std::string_view s);
InvoiceStatus parse_invoice_status(std::string_view s);

inline constexpr Grade kAllGrades[] = {Grade::A, Grade::BPlus, Grade::B, Grade::CPlus, Grade::C, Grade::D, Grade::F};
inline constexpr Role kAllRoles[] = {Role::Student, Role::AcademicStaff, Role::AdminStaff};
inline constexpr EnrollmentStatus kAllEnrollmentStatuses[] = {
    EnrollmentStatus::PendingApproval, EnrollmentStatus::Approved, EnrollmentStatus::Rejected,
    EnrollmentStatus::Dropped, EnrollmentStatus::Completed};

/// Identifier shared by students and staff: one uppercase letter followed by
/// three to six digits ("S001", "S000123").
class PersonId {
  public:
    PersonId() = default;
    explicit PersonId(std::string value);

    static bool valid(std::string_view s);

    const std::string& str() const noexcept { return value_; }
    bool empty() const noexcept { return value_.empty(); }

    friend auto operator<=>(const PersonId&, const PersonId&) = default;

  private:
    std::string value_;
};

/// Academic period, rendered as "2011-T1".
struct TermId {
    int year = 0;
    TermIndex index = TermIndex::T1;

    static TermId parse(std::string_view s);
    std::string str() const;

    friend auto operator<=>(const TermId&, const TermId&) = default;
};

/// Fixed-point currency in cents. Text form always has two fraction digits.
struct Money {
    std::int64_t cents = 0;

    static Money parse(std::string_view s);
    std::string str() const;

    friend auto operator<=>(const Money&, const Money&) = default;
    Money operator+(Money o) const { return {cents + o.cents}; }
    Money operator-(Money o) const { return {cents - o.cents}; }
};

struct ContactFields {
    std::string postal_address;
    std::string residential_address;
    std::string home_phone;
    std::string mobile;

    friend bool operator==(const ContactFields&, const ContactFields&) = default;
};

struct Student {
    PersonId id;
    std::string name;
    ContactFields contact;
    std::string program_id;
    std::optional<std::string> major;
    std::string citizenship;
    StudentStatus status = StudentStatus::Applicant;

    friend bool operator==(const Student&, const Student&) = default;
};

struct StaffMember {
    PersonId id;
    std::string name;
    Role role = Role::AcademicStaff;
    std::string department;
    std::string campus;
    ContactFields contact;

    friend bool operator==(const StaffMember&, const StaffMember&) = default;
};

struct Unit {
    std::string code;
    std::string name;
    std::set<std::string> prerequisites;
    std::optional<std::string> class_share_url;
};

struct ProgramRequirement {
    std::string unit_code;
    RequirementCategory category = RequirementCategory::Core;
};

struct Program {
    std::string id;
    std::string name;
    std::vector<ProgramRequirement> requirements;
};

struct Term {
    TermId id;
    std::string change_window_end;  // YYYY-MM-DD, inclusive
    bool is_current = false;
};

struct OfferingKey {
    std::string unit_code;
    std::string campus;
    TermId term;

    friend auto operator<=>(const OfferingKey&, const OfferingKey&) = default;
};

struct UnitOffering {
    OfferingKey key;
    bool active = false;
};

struct Enrollment {
    std::string id;
    PersonId student_id;
    OfferingKey offering;
    EnrollmentStatus status = EnrollmentStatus::PendingApproval;
    bool prerequisite_met = false;
    std::optional<PersonId> decided_by;
    std::string created_at;
};

struct GradeRecord {
    PersonId student_id;
    std::string unit_code;
    Grade grade = Grade::F;
    std::string campus;
    TermId term;
    int year = 0;
};

struct AttachmentRef {
    std::string name;
    std::string digest;  // lowercase hex SHA-256
};

struct Application {
    std::string id;
    std::string applicant_name;
    std::string contact;
    std::string proposed_program;
    std::string citizenship;
    std::string funding;
    std::string qualifications;
    std::string work_experience;
    std::vector<AttachmentRef> attachments;
    RequestStatus status = RequestStatus::Submitted;
    std::optional<std::string> decision_reason;
    std::optional<PersonId> decided_by;
    std::optional<PersonId> student_id;
    std::string created_at;
};

struct GraduationRequest {
    std::string id;
    PersonId student_id;
    RequestStatus status = RequestStatus::Submitted;
    std::optional<PersonId> decided_by;
    std::string created_at;
};

struct ProgramChangeRequest {
    std::string id;
    PersonId student_id;
    std::optional<std::string> new_program;
    std::optional<std::string> new_major;
    RequestStatus status = RequestStatus::Submitted;
    std::optional<PersonId> decided_by;
    std::string created_at;
};

struct CourseworkItem {
    PersonId student_id;
    std::string unit_code;
    TermId term;
    std::string assessment;
    double score = 0;
    double max_score = 0;
};

struct InvoiceLine {
    std::string unit_code;
    Money amount;
};

struct Invoice {
    std::string id;
    PersonId student_id;
    TermId term;
    std::vector<InvoiceLine> line_items;
    Money total;
    Money paid;
    InvoiceStatus status = InvoiceStatus::Open;

    Money balance() const { return total - paid; }
};

struct Payment {
    std::string id;
    std::string invoice_id;
    Money amount;
    std::string method = "SimulatedCard";
    std::string card_last4;
    std::string recorded_at;
};

struct TimetableEntry {
    std::string unit_code;
    std::string campus;
    TermId term;
    TimetableKind kind = TimetableKind::Class;
    std::string day;
    std::string start;  // HH:MM
    std::string end;
    std::string room;
};

struct Letter {
    LetterKind kind = LetterKind::Offer;
    std::string recipient;
    std::string body;
    std::string rendered_at;
};

using UnitCatalog = std::map<std::string, Unit>;

/// Grades C and above pass; D and F do not.
bool passing_grade(Grade grade);

/// Codes of every unit in `history` holding a passing grade.
std::set<std::string> passed_units(std::span<const GradeRecord> history);

/// All of the unit's prerequisites appear in `history` with a passing grade.
/// Throws UnknownUnit when a prerequisite names a unit absent from `catalog`.
bool prerequisites_met(std::span<const GradeRecord> history, const Unit& unit, const UnitCatalog& catalog);

/// Program requirement codes not yet covered by a passing grade.
std::set<std::string> outstanding_requirements(const Program& program, std::span<const GradeRecord> history);

bool can_transition(EnrollmentStatus from, EnrollmentStatus to);
bool is_terminal(EnrollmentStatus status);

bool can_transition(StudentStatus from, StudentStatus to);

/// Topological order of the prerequisite graph (prerequisites first). Throws
/// ValidationError on a cycle, a self-edge, or an unknown prerequisite code.
std::vector<std::string> prerequisite_order(const UnitCatalog& catalog);

/// Sort key for weekday names; unrecognised names sort after Sunday.
int weekday_rank(std::string_view day);

}  // namespace campus
