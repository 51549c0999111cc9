#pragma once

#include "campus/context.hpp"
#include "campus/finance.hpp"

#include <optional>
#include <string>
#include <vector>

namespace campus {

struct EligibleUnitView {
    std::string unit_code;
    std::string unit_name;
    RequirementCategory category = RequirementCategory::Core;
    std::vector<std::string> prerequisite_codes;
    bool prerequisite_met = false;
};

/// Units a student may still take at (campus, term): required by the
/// program, not passed, not already held by a live enrollment, and actively
/// offered. Sorted by unit code. Pure; shared by the engine and its tests.
std::vector<EligibleUnitView> compute_eligible(const Program& program, const UnitCatalog& catalog,
                                               std::span<const GradeRecord> history,
                                               const std::set<std::string>& live_enrollments,
                                               const std::set<std::string>& active_offerings);

/// Unit activation, eligibility, prerequisite-gated enrollment with HOD
/// escalation, the add/drop window, and program/major change requests.
class EnrollmentEngine {
  public:
    EnrollmentEngine(Context& ctx, Finance& finance) : ctx_(ctx), finance_(finance) {}

    UnitOffering activate_offering(const Caller& caller, const OfferingKey& key);
    std::vector<UnitOffering> list_offerings(const std::optional<std::string>& campus,
                                             const std::optional<TermId>& term);
    std::vector<Term> list_terms();

    std::vector<EligibleUnitView> eligible_units(const Caller& caller, const PersonId& student,
                                                 const std::string& campus, const TermId& term);
    /// Student-initiated: unmet prerequisites park the enrollment in
    /// PendingApproval. Staff-initiated: unmet prerequisites are refused.
    Enrollment enroll(const Caller& caller, const PersonId& student, const OfferingKey& key);
    Enrollment decide_pending_enrollment(const Caller& caller, const std::string& enrollment_id, Decision decision);
    Enrollment drop_unit(const Caller& caller, const std::string& enrollment_id);

    std::vector<Enrollment> list_enrollments(const Caller& caller, const PersonId& student);
    std::vector<Enrollment> list_pending_enrollments(const Caller& caller);

    ProgramChangeRequest request_program_change(const Caller& caller, const PersonId& student,
                                                const std::optional<std::string>& new_program,
                                                const std::optional<std::string>& new_major);
    std::vector<ProgramChangeRequest> list_program_change_requests(const Caller& caller);
    ProgramChangeRequest decide_program_change(const Caller& caller, const std::string& request_id, Decision decision);

  private:
    Context& ctx_;
    Finance& finance_;
};

}  // namespace campus
