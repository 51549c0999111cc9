#include "campus/error.hpp"
#include "campus/reporting.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <functional>
#include <sstream>

using namespace campus;
using campus::testkit::World;

namespace {

const TermId kT1 = TermId::parse("2011-T1");

CampusError error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const CampusError& e) {
        return e;
    }
    return CampusError(ErrorCode::InternalError, "no error raised");
}

std::vector<std::vector<std::string>> parse_csv(const std::string& csv) {
    std::vector<std::vector<std::string>> out;
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        out.push_back(cells);
    }
    return out;
}

}  // namespace

TEST(Reports, EnrollmentByUnitExample) {
    World w;
    w.campus->enrollment.enroll(w.s001, PersonId("S001"), OfferingKey{"CS201", "LTK", kT1});
    w.campus->enrollment.enroll(w.s001, PersonId("S001"), OfferingKey{"CS301", "LTK", kT1});
    auto csv = w.campus->reporting.generate_report(w.admin, ReportKind::EnrollmentByUnit,
                                                   {{"campus", "LTK"}, {"term", "2011-T1"}});
    EXPECT_EQ(csv,
              "unit_code,campus,term,approved_count,pending_count\n"
              "CS201,LTK,2011-T1,1,0\n"
              "CS301,LTK,2011-T1,0,1\n");
}

TEST(Reports, ApplicationsByStatusEmptyIsHeaderOnly) {
    World w;
    EXPECT_EQ(w.campus->reporting.generate_report(w.admin, ReportKind::ApplicationsByStatus, {}), "status,count\n");
}

TEST(Reports, ApplicationsByStatusCounts) {
    World w;
    ApplicationForm f;
    f.applicant_name = "X";
    f.proposed_program = "BSCS";
    f.citizenship = "Fiji";
    auto a = w.campus->admissions.submit_application(f);
    w.campus->admissions.submit_application(f);
    f.proposed_program = "BNet";
    w.campus->admissions.submit_application(f);
    w.campus->admissions.decide_application(w.admin, a.id, Decision::Reject, "full");
    EXPECT_EQ(w.campus->reporting.generate_report(w.admin, ReportKind::ApplicationsByStatus, {}),
              "status,count\nRejected,1\nSubmitted,2\n");
    EXPECT_EQ(w.campus->reporting.generate_report(w.admin, ReportKind::ApplicationsByStatus, {{"program", "BNet"}}),
              "status,count\nSubmitted,1\n");
}

TEST(Reports, GradeDistributionForF1) {
    World w;
    EXPECT_EQ(w.campus->reporting.generate_report(w.admin, ReportKind::GradeDistribution, {}),
              "unit_code,grade,count\n"
              "CS101,A,1\n"
              "CS101,B,1\n"
              "CS201,B,1\n"
              "CS301,C+,1\n"
              "MA101,B+,1\n"
              "MA101,C,1\n");
}

TEST(Reports, FiltersAndAccess) {
    World w;
    EXPECT_EQ(error_of([&] { w.campus->reporting.generate_report(w.academic, ReportKind::GradeDistribution, {}); }).code(),
              ErrorCode::Forbidden);
    for (const ReportFilters& bad : std::vector<ReportFilters>{
             {{"campus", "NOWHERE"}}, {{"term", "2030-T1"}}, {{"term", "garbage"}}, {{"program", "BXYZ"}}, {{"unit", "CS101"}}}) {
        EXPECT_EQ(error_of([&] { w.campus->reporting.generate_report(w.admin, ReportKind::EnrollmentByUnit, bad); }).code(),
                  ErrorCode::UnknownFilter);
    }
    EXPECT_EQ(parse_report_kind("GradeDistribution"), ReportKind::GradeDistribution);
    EXPECT_EQ(error_of([&] { parse_report_kind("Nope"); }).code(), ErrorCode::ValidationError);
}

TEST(ReportProperty, EnrollmentCountsReconcileAndAreDeterministic) {
    auto gen = testkit::rng(401);
    for (int round = 0; round < 25; ++round) {
        auto doc = testkit::random_fixture(gen);
        World w(Fixture::from_json(doc));
        const Caller me{PersonId("S001"), Role::Student};
        for (const std::string campus : {"LTK", "SUV"}) {
            for (const auto& [code, met] : testkit::oracle_eligible(doc, "S001", campus, "2011-T1")) {
                Enrollment e;
                try {
                    e = w.campus->enrollment.enroll(me, me.id, OfferingKey{code, campus, kT1});
                } catch (const CampusError&) {
                    continue;  // already live at the other campus
                }
                switch (gen() % 4) {
                    case 0: w.campus->enrollment.drop_unit(me, e.id); break;
                    case 1:
                        if (!met) w.campus->enrollment.decide_pending_enrollment(w.admin, e.id, Decision::Approve);
                        break;
                    default: break;
                }
            }
        }
        auto csv = w.campus->reporting.generate_report(w.admin, ReportKind::EnrollmentByUnit, {});
        EXPECT_EQ(csv, w.campus->reporting.generate_report(w.admin, ReportKind::EnrollmentByUnit, {}));
        Campus fresh(*w.db, w.clock, testkit::fast_config());
        EXPECT_EQ(csv, fresh.reporting.generate_unchecked(ReportKind::EnrollmentByUnit, {}));

        auto rows = parse_csv(csv);
        ASSERT_FALSE(rows.empty());
        int approved = 0, pending = 0;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            ASSERT_EQ(rows[i].size(), 5u);
            approved += std::stoi(rows[i][3]);
            pending += std::stoi(rows[i][4]);
            EXPECT_GT(std::stoi(rows[i][3]) + std::stoi(rows[i][4]), 0);
            if (i > 1) EXPECT_LT(rows[i - 1], rows[i]);
        }
        int live_approved = 0, live_pending = 0;
        auto tx = w.db->begin();
        for (const auto& e : DataAccess(tx).all_enrollments()) {
            live_approved += e.status == EnrollmentStatus::Approved || e.status == EnrollmentStatus::Completed;
            live_pending += e.status == EnrollmentStatus::PendingApproval;
        }
        EXPECT_EQ(approved, live_approved);
        EXPECT_EQ(pending, live_pending);
    }
}
