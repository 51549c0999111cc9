#include "campus/records.hpp"

#include "campus/codec.hpp"
#include "campus/crypto.hpp"
#include "campus/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

namespace campus {

namespace {

Student require_student(DataAccess& da, const PersonId& id) {
    auto s = da.student(id);
    if (!s) fail(ErrorCode::UnknownStudent, "no student " + id.str());
    return *s;
}

Program require_program(DataAccess& da, const std::string& id) {
    auto p = da.program(id);
    if (!p) fail(ErrorCode::UnknownProgram, "no program " + id);
    return *p;
}

std::optional<double> parse_score(const std::string& s) {
    if (s.empty()) return std::nullopt;
    for (char c : s) {
        if (!(c >= '0' && c <= '9') && c != '.') return std::nullopt;
    }
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::vector<std::string> split_fields(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        out.emplace_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::vector<std::string> outstanding_list(DataAccess& da, const Student& s) {
    auto program = require_program(da, s.program_id);
    auto history = da.grades_for_student(s.id);
    auto out = outstanding_requirements(program, history);
    return {out.begin(), out.end()};
}

}  // namespace

std::vector<CourseworkRow> parse_coursework_csv(std::string_view content) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < content.size()) {
        auto nl = content.find('\n', start);
        auto end = nl == std::string_view::npos ? content.size() : nl;
        auto line = content.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    if (lines.empty() || lines[0] != kCourseworkCsvHeader) {
        fail(ErrorCode::MalformedFile, "line 1: header must be exactly " + std::string(kCourseworkCsvHeader),
             {{"line", 1}});
    }
    std::vector<CourseworkRow> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        int lineno = static_cast<int>(i) + 1;
        auto line = lines[i];
        if (line.find('"') != std::string_view::npos) {
            fail(ErrorCode::MalformedFile, "line " + std::to_string(lineno) + ": quoted fields are not supported",
                 {{"line", lineno}});
        }
        auto fields = split_fields(line);
        if (fields.size() != 4) {
            fail(ErrorCode::MalformedFile,
                 "line " + std::to_string(lineno) + ": expected 4 columns, found " + std::to_string(fields.size()),
                 {{"line", lineno}});
        }
        rows.push_back(CourseworkRow{lineno, fields[0], fields[1], fields[2], fields[3]});
    }
    return rows;
}

std::vector<TranscriptRow> AcademicRecords::view_transcript(const Caller& caller, const PersonId& student) {
    require_self_or_staff(caller, student, "view transcripts");
    auto tx = ctx_.db.begin();
    DataAccess da(tx);
    require_student(da, student);
    auto catalog = da.units();
    std::vector<TranscriptRow> out;
    for (auto& g : da.grades_for_student(student)) {
        auto it = catalog.find(g.unit_code);
        out.push_back(TranscriptRow{g, it == catalog.end() ? std::string() : it->second.name});
    }
    return out;
}

std::vector<ChecklistRow> AcademicRecords::program_details(const Caller& caller, const PersonId& student) {
    require_self_or_staff(caller, student, "view program details");
    auto tx = ctx_.db.begin();
    DataAccess da(tx);
    auto s = require_student(da, student);
    auto program = require_program(da, s.program_id);
    auto passed = passed_units(da.grades_for_student(student));
    auto catalog = da.units();
    std::vector<ChecklistRow> out;
    for (const auto& req : program.requirements) {
        auto it = catalog.find(req.unit_code);
        out.push_back(ChecklistRow{req.unit_code, it == catalog.end() ? std::string() : it->second.name, req.category,
                                   passed.count(req.unit_code) > 0});
    }
    return out;
}

GradeRecord AcademicRecords::record_final_grade(const Caller& caller, const std::string& enrollment_id, Grade grade) {
    require_role(caller, {Role::AcademicStaff, Role::AdminStaff}, "record grades");
    auto tx = ctx_.db.begin();
    DataAccess da(tx);
    auto e = da.enrollment(enrollment_id);
    if (!e) fail(ErrorCode::UnknownEnrollment, "no enrollment " + enrollment_id);
    if (da.grade_exists(e->student_id, e->offering.unit_code, e->offering.term)) {
        fail(ErrorCode::GradeExists, "a grade for " + e->student_id.str() + " in " + e->offering.unit_code + " " +
                                         e->offering.term.str() + " is already recorded");
    }
    if (e->status != EnrollmentStatus::Approved) {
        fail(ErrorCode::NotApproved, "enrollment " + enrollment_id + " is " + std::string(to_string(e->status)));
    }
    GradeRecord g{e->student_id, e->offering.unit_code, grade, e->offering.campus, e->offering.term,
                  e->offering.term.year};
    e->status = EnrollmentStatus::Completed;
    da.update_enrollment(*e);
    da.insert_grade(g);
    tx.commit();
    return g;
}

CourseworkImportReport AcademicRecords::submit_coursework(const Caller& caller, const OfferingKey& offering,
                                                          const std::vector<CourseworkRow>& rows) {
    nlohmann::json canonical = nlohmann::json::array();
    for (const auto& r : rows) canonical.push_back({r.student_id, r.assessment, r.score, r.max_score});
    return apply_coursework(caller, offering, rows, crypto::sha256_hex(canonical.dump()));
}

CourseworkImportReport AcademicRecords::import_coursework_csv(const Caller& caller, const OfferingKey& offering,
                                                              std::string_view content) {
    require_role(caller, {Role::AcademicStaff}, "submit coursework");
    auto rows = parse_coursework_csv(content);
    return apply_coursework(caller, offering, rows, crypto::sha256_hex(content));
}

CourseworkImportReport AcademicRecords::apply_coursework(const Caller& caller, const OfferingKey& offering,
                                                         const std::vector<CourseworkRow>& rows, std::string key) {
    require_role(caller, {Role::AcademicStaff}, "submit coursework");
    CourseworkImportReport report;
    report.idempotency_key = std::move(key);

    auto tx = ctx_.db.begin();
    DataAccess da(tx);
    if (!da.offering(offering)) {
        fail(ErrorCode::UnknownOffering,
             "no offering " + offering.unit_code + " at " + offering.campus + " in " + offering.term.str());
    }
    std::set<PersonId> enrolled;
    for (const auto& e : da.enrollments_for_offering(offering)) {
        if (e.status == EnrollmentStatus::Approved || e.status == EnrollmentStatus::Completed) {
            enrolled.insert(e.student_id);
        }
    }
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& r : rows) {
        auto reject = [&](std::string reason) { report.rejected.push_back(RejectedRow{r.line, std::move(reason)}); };
        if (!PersonId::valid(r.student_id) || !da.student(PersonId(r.student_id))) {
            reject("unknown student");
            continue;
        }
        if (r.assessment.empty()) {
            reject("missing assessment");
            continue;
        }
        auto score = parse_score(r.score);
        auto max = parse_score(r.max_score);
        if (!score || !max || *max <= 0) {
            reject("invalid score");
            continue;
        }
        if (*score > *max) {
            reject("score exceeds max_score");
            continue;
        }
        PersonId sid(r.student_id);
        if (!enrolled.count(sid)) {
            reject("not enrolled");
            continue;
        }
        if (!seen.emplace(r.student_id, r.assessment).second) {
            reject("duplicate row");
            continue;
        }
        CourseworkItem item{sid, offering.unit_code, offering.term, r.assessment, *score, *max};
        auto existing = da.coursework(CourseworkKey{sid, offering.unit_code, offering.term, r.assessment});
        if (!existing || existing->score != item.score || existing->max_score != item.max_score) {
            da.upsert_coursework(item);
            ++report.updated;
        }
        ++report.accepted;
    }
    if (report.updated > 0 || !da.coursework_import_seen(report.idempotency_key)) {
        da.record_coursework_import(report.idempotency_key, ctx_.now_stamp());
    }
    tx.commit();
    return report;
}

std::vector<CourseworkItem> AcademicRecords::view_coursework(const Caller& caller, const PersonId& student,
                                                             const TermId& term) {
    require_self_or_staff(caller, student, "view coursework");
    auto tx = ctx_.db.begin();
    DataAccess da(tx);
    require_student(da, student);
    return da.coursework_for(student, term);
}

std::vector<ClassListEntry> AcademicRecords::class_list(const Caller& caller, const OfferingKey& offering) {
    require_role(caller, {Role::AcademicStaff, Role::AdminStaff}, "view class lists");
    auto tx = ctx_.db.begin();
    DataAccess da(tx);
    if (!da.offering(offering)) {
        fail(ErrorCode::UnknownOffering,
             "no offering " + offering.unit_code + " at " + offering.campus + " in " + offering.term.str());
    }
    std::vector<ClassListEntry> out;
    for (const auto& e : da.enrollments_for_offering(offering)) {
        if (e.status != EnrollmentStatus::Approved && e.status != EnrollmentStatus::Completed) continue;
        auto s = da.student(e.student_id);
        out.push_back(ClassListEntry{e.student_id, s ? s->name : std::string()});
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.student_id < b.student_id; });
    return out;
}

nlohmann::json AcademicRecords::student_lookup(const Caller& caller, const PersonId& student) {
    require_role(caller, {Role::AcademicStaff, Role::AdminStaff}, "look up students");
    auto tx = ctx_.db.begin();
    DataAccess da(tx);
    auto s = require_student(da, student);
    auto catalog = da.units();
    nlohmann::json transcript = nlohmann::json::array();
    for (const auto& g : da.grades_for_student(student)) {
        nlohmann::json row = g;
        auto it = catalog.find(g.unit_code);
        row["unit_name"] = it == catalog.end() ? std::string() : it->second.name;
        transcript.push_back(std::move(row));
    }
    nlohmann::json current = nlohmann::json::array();
    for (const auto& e : da.enrollments_for_student(student)) {
        if (!is_terminal(e.status)) current.push_back(e);
    }
    return {{"profile", s}, {"transcript", transcript}, {"enrollments", current}};
}

std::vector<TimetableEntry> AcademicRecords::view_timetable(const std::string& campus, const TermId& term,
                                                            TimetableKind kind) {
    auto tx = ctx_.db.begin();
    DataAccess da(tx);
    if (!da.term(term)) fail(ErrorCode::UnknownTerm, "no term " + term.str());
    auto out = da.timetable(campus, term, kind);
    std::stable_sort(out.begin(), out.end(), [](const TimetableEntry& a, const TimetableEntry& b) {
        auto ra = weekday_rank(a.day), rb = weekday_rank(b.day);
        if (ra != rb) return ra < rb;
        if (a.start != b.start) return a.start < b.start;
        return a.unit_code < b.unit_code;
    });
    return out;
}

GraduationRequest AcademicRecords::apply_graduation(const Caller& caller, const PersonId& student) {
    require_role(caller, {Role::Student}, "apply to graduate");
    require_self_or_staff(caller, student, "apply to graduate");
    auto tx = ctx_.db.begin();
    DataAccess da(tx);
    auto s = require_student(da, student);
    if (s.status != StudentStatus::Active) {
        fail(ErrorCode::NotEligible, "student " + student.str() + " is " + std::string(to_string(s.status)));
    }
    auto outstanding = outstanding_list(da, s);
    if (!outstanding.empty()) {
        fail(ErrorCode::RequirementsOutstanding, "program requirements are still outstanding",
             {{"outstanding", outstanding}});
    }
    for (const auto& r : da.graduation_requests()) {
        if (r.student_id == student && r.status != RequestStatus::Rejected) {
            fail(ErrorCode::DuplicateRequest, "a graduation request already exists", {{"request_id", r.id}});
        }
    }
    GraduationRequest r;
    r.id = ctx_.new_id();
    r.student_id = student;
    r.status = RequestStatus::Submitted;
    r.created_at = ctx_.now_stamp();
    da.insert_graduation_request(r);
    tx.commit();
    return r;
}

std::vector<GraduationRequest> AcademicRecords::list_graduation_requests(const Caller& caller) {
    require_role(caller, {Role::AdminStaff}, "review graduation requests");
    auto tx = ctx_.db.begin();
    std::vector<GraduationRequest> out;
    for (auto& r : DataAccess(tx).graduation_requests()) {
        if (r.status == RequestStatus::Submitted) out.push_back(std::move(r));
    }
    return out;
}

GraduationRequest AcademicRecords::decide_graduation(const Caller& caller, const std::string& request_id,
                                                     Decision decision) {
    require_role(caller, {Role::AdminStaff}, "decide graduation requests");
    auto tx = ctx_.db.begin();
    DataAccess da(tx);
    auto r = da.graduation_request(request_id);
    if (!r) fail(ErrorCode::UnknownRequest, "no graduation request " + request_id);
    if (r->status != RequestStatus::Submitted) {
        fail(ErrorCode::AlreadyDecided, "request " + request_id + " was already decided",
             {{"status", to_string(r->status)}});
    }
    r->decided_by = caller.id;
    if (decision == Decision::Approve) {
        auto s = require_student(da, r->student_id);
        auto outstanding = outstanding_list(da, s);
        if (!outstanding.empty() || !can_transition(s.status, StudentStatus::Graduated)) {
            fail(ErrorCode::NoLongerEligible, "student " + s.id.str() + " no longer meets the graduation rule",
                 {{"outstanding", outstanding}});
        }
        s.status = StudentStatus::Graduated;
        da.update_student(s);
        r->status = RequestStatus::Approved;
    } else {
        r->status = RequestStatus::Rejected;
    }
    da.update_graduation_request(*r);
    tx.commit();
    return *r;
}

}  // namespace campus
