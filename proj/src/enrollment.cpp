#include "campus/enrollment.hpp"

#include "campus/error.hpp"

#include <algorithm>

namespace campus {

namespace {

Student require_student(DataAccess& da, const PersonId& id) {
    auto s = da.student(id);
    if (!s) fail(ErrorCode::UnknownStudent, "no student " + id.str());
    return *s;
}

void require_open_term(DataAccess& da, const TermId& term) {
    if (!da.term(term)) fail(ErrorCode::UnknownTerm, "no term " + term.str());
    auto open = open_terms(da);
    if (std::find(open.begin(), open.end(), term) == open.end()) {
        fail(ErrorCode::TermNotOpen, "term " + term.str() + " is not open for enrollment");
    }
}

std::set<std::string> live_units(DataAccess& da, const PersonId& student) {
    std::set<std::string> out;
    for (const auto& e : da.enrollments_for_student(student)) {
        if (!is_terminal(e.status)) out.insert(e.offering.unit_code);
    }
    return out;
}

std::set<std::string> active_codes(DataAccess& da, const std::string& campus, const TermId& term) {
    std::set<std::string> out;
    for (const auto& k : da.active_offerings(campus, term)) out.insert(k.unit_code);
    return out;
}

std::vector<EligibleUnitView> eligible_for(DataAccess& da, const Student& s, const std::string& campus,
                                           const TermId& term) {
    auto program = da.program(s.program_id);
    if (!program) fail(ErrorCode::UnknownProgram, "no program " + s.program_id);
    auto history = da.grades_for_student(s.id);
    return compute_eligible(*program, da.units(), history, live_units(da, s.id), active_codes(da, campus, term));
}

}  // namespace

std::vector<EligibleUnitView> compute_eligible(const Program& program, const UnitCatalog& catalog,
                                               std::span<const GradeRecord> history,
                                               const std::set<std::string>& live_enrollments,
                                               const std::set<std::string>& active_offerings) {
    auto passed = passed_units(history);
    std::vector<EligibleUnitView> out;
    for (const auto& req : program.requirements) {
        if (passed.count(req.unit_code) || live_enrollments.count(req.unit_code) ||
            !active_offerings.count(req.unit_code)) {
            continue;
        }
        auto it = catalog.find(req.unit_code);
        if (it == catalog.end()) fail(ErrorCode::UnknownUnit, "no unit " + req.unit_code);
        EligibleUnitView v;
        v.unit_code = req.unit_code;
        v.unit_name = it->second.name;
        v.category = req.category;
        v.prerequisite_codes.assign(it->second.prerequisites.begin(), it->second.prerequisites.end());
        v.prerequisite_met = prerequisites_met(history, it->second, catalog);
        out.push_back(std::move(v));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.unit_code < b.unit_code; });
    out.erase(std::unique(out.begin(), out.end(),
                          [](const auto& a, const auto& b) { return a.unit_code == b.unit_code; }),
              out.end());
    return out;
}

UnitOffering EnrollmentEngine::activate_offering(const Caller& caller, const OfferingKey& key) {
    require_role(caller, {Role::AdminStaff}, "activate offerings");
    if (key.campus.empty()) fail(ErrorCode::ValidationError, "campus is required", {{"fields", {"campus"}}});
    auto tx = ctx_.db.begin();
    DataAccess da(tx);
    if (!da.unit(key.unit_code)) fail(ErrorCode::UnknownUnit, "no unit " + key.unit_code);
    if (!da.term(key.term)) fail(ErrorCode::UnknownTerm, "no term " + key.term.str());
    auto existing = da.offering(key);
    if (existing && existing->active) return *existing;
    UnitOffering o{key, true};
    da.upsert_offering(o);
    tx.commit();
    return o;
}

std::vector<UnitOffering> EnrollmentEngine::list_offerings(const std::optional<std::string>& campus,
                                                           const std::optional<TermId>& term) {
    auto tx = ctx_.db.begin();
    std::vector<UnitOffering> out;
    for (auto& o : DataAccess(tx).offerings()) {
        if (campus && o.key.campus != *campus) continue;
        if (term && o.key.term != *term) continue;
        out.push_back(std::move(o));
    }
    return out;
}

std::vector<Term> EnrollmentEngine::list_terms() {
    auto tx = ctx_.db.begin();
    return DataAccess(tx).terms();
}

std::vector<EligibleUnitView> EnrollmentEngine::eligible_units(const Caller& caller, const PersonId& student,
                                                               const std::string& campus, const TermId& term) {
    require_self_or_staff(caller, student, "list eligible units");
    auto tx = ctx_.db.begin();
    DataAccess da(tx);
    auto s = require_student(da, student);
    require_open_term(da, term);
    if (s.status != StudentStatus::Active) return {};
    return eligible_for(da, s, campus, term);
}

Enrollment EnrollmentEngine::enroll(const Caller& caller, const PersonId& student, const OfferingKey& key) {
    require_self_or_staff(caller, student, "enroll");
    auto tx = ctx_.db.begin();
    DataAccess da(tx);
    auto s = require_student(da, student);
    if (s.status != StudentStatus::Active) {
        fail(ErrorCode::NotEligible, "student " + student.str() + " is not active", {{"status", to_string(s.status)}});
    }
    require_open_term(da, key.term);
    auto offering = da.offering(key);
    if (!offering || !offering->active) {
        fail(ErrorCode::InactiveOffering,
             key.unit_code + " is not offered at " + key.campus + " in " + key.term.str());
    }
    if (da.nonterminal_enrollment(student, key.unit_code, key.term)) {
        fail(ErrorCode::DuplicateEnrollment,
             student.str() + " already holds an enrollment in " + key.unit_code + " for " + key.term.str());
    }
    auto eligible = eligible_for(da, s, key.campus, key.term);
    auto row = std::find_if(eligible.begin(), eligible.end(),
                            [&](const EligibleUnitView& v) { return v.unit_code == key.unit_code; });
    if (row == eligible.end()) {
        fail(ErrorCode::NotEligible, key.unit_code + " is not required or already completed");
    }
    if (!row->prerequisite_met && caller.is_staff()) {
        fail(ErrorCode::PrerequisiteNotMet, student.str() + " has not passed the prerequisites of " + key.unit_code,
             {{"prerequisites", row->prerequisite_codes}});
    }

    Enrollment e;
    e.id = ctx_.new_id();
    e.student_id = student;
    e.offering = key;
    e.prerequisite_met = row->prerequisite_met;
    e.status = row->prerequisite_met ? EnrollmentStatus::Approved : EnrollmentStatus::PendingApproval;
    e.created_at = ctx_.now_stamp();
    e = atomic_check_and_insert_enrollment(tx, e);
    if (e.status == EnrollmentStatus::Approved) finance_.on_enrollment_approved(da, e);
    tx.commit();
    return e;
}

Enrollment EnrollmentEngine::decide_pending_enrollment(const Caller& caller, const std::string& enrollment_id,
                                                       Decision decision) {
    require_role(caller, {Role::AdminStaff}, "decide pending enrollments");
    auto tx = ctx_.db.begin();
    DataAccess da(tx);
    auto e = da.enrollment(enrollment_id);
    if (!e) fail(ErrorCode::UnknownEnrollment, "no enrollment " + enrollment_id);
    if (e->status != EnrollmentStatus::PendingApproval) {
        fail(ErrorCode::AlreadyDecided, "enrollment " + enrollment_id + " is not pending",
             {{"status", to_string(e->status)}});
    }
    e->status = decision == Decision::Approve ? EnrollmentStatus::Approved : EnrollmentStatus::Rejected;
    e->decided_by = caller.id;
    da.update_enrollment(*e);
    if (e->status == EnrollmentStatus::Approved) finance_.on_enrollment_approved(da, *e);
    tx.commit();
    return *e;
}

Enrollment EnrollmentEngine::drop_unit(const Caller& caller, const std::string& enrollment_id) {
    auto tx = ctx_.db.begin();
    DataAccess da(tx);
    auto e = da.enrollment(enrollment_id);
    if (!e) fail(ErrorCode::UnknownEnrollment, "no enrollment " + enrollment_id);
    require_self_or_staff(caller, e->student_id, "drop units");
    if (!can_transition(e->status, EnrollmentStatus::Dropped)) {
        fail(ErrorCode::AlreadyTerminal, "enrollment " + enrollment_id + " is " + std::string(to_string(e->status)));
    }
    auto term = da.term(e->offering.term);
    if (!term || ctx_.today() > term->change_window_end) {
        fail(ErrorCode::ChangeWindowClosed, "the change window for " + e->offering.term.str() + " closed on " +
                                                (term ? term->change_window_end : std::string("?")));
    }
    bool was_approved = e->status == EnrollmentStatus::Approved;
    e->status = EnrollmentStatus::Dropped;
    da.update_enrollment(*e);
    if (was_approved) finance_.on_enrollment_dropped(da, *e);
    tx.commit();
    return *e;
}

std::vector<Enrollment> EnrollmentEngine::list_enrollments(const Caller& caller, const PersonId& student) {
    require_self_or_staff(caller, student, "list enrollments");
    auto tx = ctx_.db.begin();
    DataAccess da(tx);
    require_student(da, student);
    return da.enrollments_for_student(student);
}

std::vector<Enrollment> EnrollmentEngine::list_pending_enrollments(const Caller& caller) {
    require_role(caller, {Role::AdminStaff}, "review pending enrollments");
    auto tx = ctx_.db.begin();
    return DataAccess(tx).enrollments_with_status(EnrollmentStatus::PendingApproval);
}

ProgramChangeRequest EnrollmentEngine::request_program_change(const Caller& caller, const PersonId& student,
                                                              const std::optional<std::string>& new_program,
                                                              const std::optional<std::string>& new_major) {
    require_role(caller, {Role::Student}, "request program changes");
    require_self_or_staff(caller, student, "request program changes");
    auto given = [](const std::optional<std::string>& v) { return v && !v->empty(); };
    if (!given(new_program) && !given(new_major)) {
        fail(ErrorCode::EmptyRequest, "name a new program, a new major, or both");
    }
    auto tx = ctx_.db.begin();
    DataAccess da(tx);
    auto s = require_student(da, student);
    if (s.status != StudentStatus::Active) fail(ErrorCode::NotEligible, "student " + student.str() + " is not active");
    if (given(new_program) && !da.program(*new_program)) {
        fail(ErrorCode::UnknownProgram, "no program " + *new_program, {{"program", *new_program}});
    }
    ProgramChangeRequest r;
    r.id = ctx_.new_id();
    r.student_id = student;
    if (given(new_program)) r.new_program = new_program;
    if (given(new_major)) r.new_major = new_major;
    r.status = RequestStatus::Submitted;
    r.created_at = ctx_.now_stamp();
    da.insert_program_change(r);
    tx.commit();
    return r;
}

std::vector<ProgramChangeRequest> EnrollmentEngine::list_program_change_requests(const Caller& caller) {
    require_role(caller, {Role::AdminStaff}, "review program changes");
    auto tx = ctx_.db.begin();
    std::vector<ProgramChangeRequest> out;
    for (auto& r : DataAccess(tx).program_changes()) {
        if (r.status == RequestStatus::Submitted) out.push_back(std::move(r));
    }
    return out;
}

ProgramChangeRequest EnrollmentEngine::decide_program_change(const Caller& caller, const std::string& request_id,
                                                             Decision decision) {
    require_role(caller, {Role::AdminStaff}, "decide program changes");
    auto tx = ctx_.db.begin();
    DataAccess da(tx);
    auto r = da.program_change(request_id);
    if (!r) fail(ErrorCode::UnknownRequest, "no program change request " + request_id);
    if (r->status != RequestStatus::Submitted) {
        fail(ErrorCode::AlreadyDecided, "request " + request_id + " was already decided",
             {{"status", to_string(r->status)}});
    }
    r->decided_by = caller.id;
    if (decision == Decision::Approve) {
        auto s = require_student(da, r->student_id);
        if (r->new_program) {
            if (!da.program(*r->new_program)) fail(ErrorCode::UnknownProgram, "no program " + *r->new_program);
            s.program_id = *r->new_program;
        }
        if (r->new_major) s.major = r->new_major;
        da.update_student(s);
        r->status = RequestStatus::Approved;
    } else {
        r->status = RequestStatus::Rejected;
    }
    da.update_program_change(*r);
    tx.commit();
    return *r;
}

}  // namespace campus
