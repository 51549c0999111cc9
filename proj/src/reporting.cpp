#include "campus/reporting.hpp"

#include "campus/error.hpp"

#include <algorithm>
#include <tuple>

namespace campus {

namespace {

struct Filters {
    std::optional<std::string> campus;
    std::optional<TermId> term;
    std::optional<std::string> program;
};

Filters check_filters(DataAccess& da, const ReportFilters& raw) {
    Filters f;
    for (const auto& [key, value] : raw) {
        if (key == "campus") {
            if (!da.campus_exists(value)) fail(ErrorCode::UnknownFilter, "no campus " + value, {{"filter", key}});
            f.campus = value;
        } else if (key == "term") {
            TermId t;
            try {
                t = TermId::parse(value);
            } catch (const CampusError&) {
                fail(ErrorCode::UnknownFilter, "no term " + value, {{"filter", key}});
            }
            if (!da.term(t)) fail(ErrorCode::UnknownFilter, "no term " + value, {{"filter", key}});
            f.term = t;
        } else if (key == "program") {
            if (!da.program(value)) fail(ErrorCode::UnknownFilter, "no program " + value, {{"filter", key}});
            f.program = value;
        } else {
            fail(ErrorCode::UnknownFilter, "unknown report filter " + key, {{"filter", key}});
        }
    }
    return f;
}

using Row = std::vector<std::string>;

std::string render(ReportKind kind, std::vector<Row> rows) {
    std::sort(rows.begin(), rows.end());
    std::string out(report_header(kind));
    out += '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += row[i];
        }
        out += '\n';
    }
    return out;
}

bool program_matches(DataAccess& da, const Filters& f, const PersonId& student) {
    if (!f.program) return true;
    auto s = da.student(student);
    return s && s->program_id == *f.program;
}

std::vector<Row> enrollment_by_unit(DataAccess& da, const Filters& f) {
    std::map<OfferingKey, std::pair<int, int>> counts;
    for (const auto& e : da.all_enrollments()) {
        if (f.campus && e.offering.campus != *f.campus) continue;
        if (f.term && e.offering.term != *f.term) continue;
        if (!program_matches(da, f, e.student_id)) continue;
        if (e.status == EnrollmentStatus::Approved || e.status == EnrollmentStatus::Completed) {
            ++counts[e.offering].first;
        } else if (e.status == EnrollmentStatus::PendingApproval) {
            ++counts[e.offering].second;
        }
    }
    std::vector<Row> rows;
    for (const auto& [key, c] : counts) {
        rows.push_back({key.unit_code, key.campus, key.term.str(), std::to_string(c.first), std::to_string(c.second)});
    }
    return rows;
}

std::vector<Row> applications_by_status(DataAccess& da, const Filters& f) {
    std::map<std::string, int> counts;
    for (const auto& a : da.applications()) {
        if (f.program && a.proposed_program != *f.program) continue;
        ++counts[std::string(to_string(a.status))];
    }
    std::vector<Row> rows;
    for (const auto& [status, n] : counts) rows.push_back({status, std::to_string(n)});
    return rows;
}

std::vector<Row> grade_distribution(DataAccess& da, const Filters& f) {
    std::map<std::pair<std::string, std::string>, int> counts;
    for (const auto& g : da.all_grades()) {
        if (f.campus && g.campus != *f.campus) continue;
        if (f.term && g.term != *f.term) continue;
        if (!program_matches(da, f, g.student_id)) continue;
        ++counts[{g.unit_code, std::string(to_string(g.grade))}];
    }
    std::vector<Row> rows;
    for (const auto& [key, n] : counts) rows.push_back({key.first, key.second, std::to_string(n)});
    return rows;
}

}  // namespace

std::string_view to_string(ReportKind kind) {
    switch (kind) {
        case ReportKind::EnrollmentByUnit: return "EnrollmentByUnit";
        case ReportKind::ApplicationsByStatus: return "ApplicationsByStatus";
        case ReportKind::GradeDistribution: return "GradeDistribution";
    }
    return "?";
}

ReportKind parse_report_kind(std::string_view s) {
    for (auto k : {ReportKind::EnrollmentByUnit, ReportKind::ApplicationsByStatus, ReportKind::GradeDistribution}) {
        if (to_string(k) == s) return k;
    }
    fail(ErrorCode::ValidationError, "unknown report kind " + std::string(s), {{"fields", {"kind"}}});
}

std::string_view report_header(ReportKind kind) {
    switch (kind) {
        case ReportKind::EnrollmentByUnit: return "unit_code,campus,term,approved_count,pending_count";
        case ReportKind::ApplicationsByStatus: return "status,count";
        case ReportKind::GradeDistribution: return "unit_code,grade,count";
    }
    return "";
}

std::string Reporting::generate_report(const Caller& caller, ReportKind kind, const ReportFilters& filters) {
    require_role(caller, {Role::AdminStaff}, "generate reports");
    return generate_unchecked(kind, filters);
}

std::string Reporting::generate_unchecked(ReportKind kind, const ReportFilters& filters) {
    auto tx = ctx_.db.begin();
    DataAccess da(tx);
    auto f = check_filters(da, filters);
    switch (kind) {
        case ReportKind::EnrollmentByUnit: return render(kind, enrollment_by_unit(da, f));
        case ReportKind::ApplicationsByStatus: return render(kind, applications_by_status(da, f));
        case ReportKind::GradeDistribution: return render(kind, grade_distribution(da, f));
    }
    return {};
}

}  // namespace campus
