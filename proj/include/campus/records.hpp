#pragma once

#include "campus/context.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace campus {

inline constexpr std::string_view kCourseworkCsvHeader = "student_id,assessment,score,max_score";

struct TranscriptRow {
    GradeRecord grade;
    std::string unit_name;
};

struct ChecklistRow {
    std::string unit_code;
    std::string unit_name;
    RequirementCategory category = RequirementCategory::Core;
    bool completed = false;
};

/// One coursework row as submitted, before validation. Scores stay textual
/// so that unparseable input can be reported rather than rejected wholesale.
struct CourseworkRow {
    int line = 0;
    std::string student_id;
    std::string assessment;
    std::string score;
    std::string max_score;
};

struct RejectedRow {
    int line = 0;
    std::string reason;
};

struct CourseworkImportReport {
    int accepted = 0;
    std::vector<RejectedRow> rejected;
    std::string idempotency_key;  // SHA-256 of the submitted content
    int updated = 0;              // rows whose stored value actually changed
};

struct ClassListEntry {
    PersonId student_id;
    std::string name;
};

/// Parses the coursework CSV contract. Throws MalformedFile naming the first
/// bad line (1-based, header is line 1).
std::vector<CourseworkRow> parse_coursework_csv(std::string_view content);

/// Transcripts, checklists, grades, coursework, class lists, timetables and
/// the graduation workflow.
class AcademicRecords {
  public:
    explicit AcademicRecords(Context& ctx) : ctx_(ctx) {}

    std::vector<TranscriptRow> view_transcript(const Caller& caller, const PersonId& student);
    std::vector<ChecklistRow> program_details(const Caller& caller, const PersonId& student);
    GradeRecord record_final_grade(const Caller& caller, const std::string& enrollment_id, Grade grade);

    CourseworkImportReport submit_coursework(const Caller& caller, const OfferingKey& offering,
                                             const std::vector<CourseworkRow>& rows);
    CourseworkImportReport import_coursework_csv(const Caller& caller, const OfferingKey& offering,
                                                 std::string_view content);
    std::vector<CourseworkItem> view_coursework(const Caller& caller, const PersonId& student, const TermId& term);

    std::vector<ClassListEntry> class_list(const Caller& caller, const OfferingKey& offering);
    nlohmann::json student_lookup(const Caller& caller, const PersonId& student);
    std::vector<TimetableEntry> view_timetable(const std::string& campus, const TermId& term, TimetableKind kind);

    GraduationRequest apply_graduation(const Caller& caller, const PersonId& student);
    std::vector<GraduationRequest> list_graduation_requests(const Caller& caller);
    GraduationRequest decide_graduation(const Caller& caller, const std::string& request_id, Decision decision);

  private:
    CourseworkImportReport apply_coursework(const Caller& caller, const OfferingKey& offering,
                                            const std::vector<CourseworkRow>& rows, std::string key);

    Context& ctx_;
};

}  // namespace campus
