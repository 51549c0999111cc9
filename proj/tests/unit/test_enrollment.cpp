#include "campus/enrollment.hpp"
#include "campus/error.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <functional>
#include <thread>

using namespace campus;
using campus::testkit::World;

namespace {

const TermId kT1 = TermId::parse("2011-T1");

OfferingKey at_ltk(const std::string& unit) { return OfferingKey{unit, "LTK", kT1}; }

CampusError error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const CampusError& e) {
        return e;
    }
    return CampusError(ErrorCode::InternalError, "no error raised");
}

std::map<std::string, bool> as_map(const std::vector<EligibleUnitView>& v) {
    std::map<std::string, bool> out;
    for (const auto& row : v) out[row.unit_code] = row.prerequisite_met;
    return out;
}

}  // namespace

TEST(Eligibility, F1StudentSeesCs201AndCs301) {
    World w;
    auto rows = w.campus->enrollment.eligible_units(w.s001, PersonId("S001"), "LTK", kT1);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].unit_code, "CS201");
    EXPECT_TRUE(rows[0].prerequisite_met);
    EXPECT_EQ(rows[0].category, RequirementCategory::Core);
    EXPECT_EQ(rows[1].unit_code, "CS301");
    EXPECT_FALSE(rows[1].prerequisite_met);
    EXPECT_EQ(rows[1].prerequisite_codes, std::vector<std::string>{"CS201"});
    EXPECT_EQ(as_map(rows), testkit::oracle_eligible(testkit::f1_json(), "S001", "LTK", "2011-T1"));
}

TEST(Eligibility, CompletedStudentAndEmptyCases) {
    World w;
    EXPECT_TRUE(w.campus->enrollment.eligible_units(w.admin, PersonId("S002"), "LTK", kT1).empty());
    EXPECT_TRUE(w.campus->enrollment.eligible_units(w.s001, PersonId("S001"), "SUV", kT1).empty());
    EXPECT_EQ(error_of([&] { w.campus->enrollment.eligible_units(w.s001, PersonId("S001"), "LTK", TermId::parse("2010-T2")); }).code(),
              ErrorCode::TermNotOpen);
    EXPECT_EQ(error_of([&] { w.campus->enrollment.eligible_units(w.admin, PersonId("S999"), "LTK", kT1); }).code(),
              ErrorCode::UnknownStudent);
    EXPECT_EQ(error_of([&] { w.campus->enrollment.eligible_units(w.s002, PersonId("S001"), "LTK", kT1); }).code(),
              ErrorCode::Forbidden);
}

TEST(Eligibility, NextTermIsOpen) {
    World w;
    w.campus->enrollment.activate_offering(w.admin, OfferingKey{"CS201", "LTK", TermId::parse("2011-T2")});
    auto rows = w.campus->enrollment.eligible_units(w.s001, PersonId("S001"), "LTK", TermId::parse("2011-T2"));
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].unit_code, "CS201");
}

TEST(EligibilityProperty, PureFunctionMatchesOracle) {
    auto gen = testkit::rng(101);
    for (int round = 0; round < 200; ++round) {
        auto doc = testkit::random_fixture(gen);
        auto f = Fixture::from_json(doc);
        UnitCatalog catalog;
        for (const auto& u : f.units) catalog[u.code] = u;
        std::set<std::string> active;
        for (const auto& o : f.offerings) {
            if (o.active && o.key.campus == "LTK") active.insert(o.key.unit_code);
        }
        std::set<std::string> live;
        for (const auto& u : f.units) {
            if (gen() % 5 == 0) live.insert(u.code);
        }
        auto got = compute_eligible(f.programs[0], catalog, f.students[0].history, live, active);
        ASSERT_EQ(as_map(got), testkit::oracle_eligible(doc, "S001", "LTK", "2011-T1", live)) << doc.dump();
    }
}

TEST(EligibilityProperty, ServiceMatchesOracleAndTracksEnrollments) {
    auto gen = testkit::rng(102);
    for (int round = 0; round < 100; ++round) {
        auto doc = testkit::random_fixture(gen);
        World w(Fixture::from_json(doc));
        const Caller me{PersonId("S001"), Role::Student};
        for (const std::string campus : {"LTK", "SUV"}) {
            auto got = as_map(w.campus->enrollment.eligible_units(me, me.id, campus, kT1));
            ASSERT_EQ(got, testkit::oracle_eligible(doc, "S001", campus, "2011-T1")) << doc.dump();
        }
        // Enrolling removes the unit everywhere; dropping brings it back.
        auto before = testkit::oracle_eligible(doc, "S001", "LTK", "2011-T1");
        if (before.empty()) continue;
        auto pick = std::next(before.begin(), static_cast<long>(gen() % before.size()))->first;
        auto e = w.campus->enrollment.enroll(me, me.id, at_ltk(pick));
        EXPECT_EQ(e.status, before[pick] ? EnrollmentStatus::Approved : EnrollmentStatus::PendingApproval);
        auto after = as_map(w.campus->enrollment.eligible_units(me, me.id, "LTK", kT1));
        ASSERT_EQ(after, testkit::oracle_eligible(doc, "S001", "LTK", "2011-T1", {pick}));
        w.campus->enrollment.drop_unit(me, e.id);
        ASSERT_EQ(as_map(w.campus->enrollment.eligible_units(me, me.id, "LTK", kT1)), before);
    }
}

TEST(Activation, AdminOnlyAndIdempotent) {
    World w;
    auto key = OfferingKey{"NW201", "LTK", kT1};
    auto a = w.campus->enrollment.activate_offering(w.admin, key);
    EXPECT_TRUE(a.active);
    auto b = w.campus->enrollment.activate_offering(w.admin, key);
    EXPECT_EQ(a.key, b.key);
    int count = 0;
    for (const auto& o : w.campus->enrollment.list_offerings(std::string("LTK"), kT1)) count += o.key == key;
    EXPECT_EQ(count, 1);
    EXPECT_EQ(error_of([&] { w.campus->enrollment.activate_offering(w.academic, key); }).code(), ErrorCode::Forbidden);
    EXPECT_EQ(error_of([&] { w.campus->enrollment.activate_offering(w.admin, OfferingKey{"XX999", "LTK", kT1}); }).code(),
              ErrorCode::UnknownUnit);
    EXPECT_EQ(error_of([&] { w.campus->enrollment.activate_offering(w.admin, OfferingKey{"CS201", "LTK", TermId::parse("2020-T1")}); }).code(),
              ErrorCode::UnknownTerm);
}

TEST(Enroll, F1Examples) {
    World w;
    auto approved = w.campus->enrollment.enroll(w.s001, PersonId("S001"), at_ltk("CS201"));
    EXPECT_EQ(approved.status, EnrollmentStatus::Approved);
    EXPECT_TRUE(approved.prerequisite_met);
    auto pending = w.campus->enrollment.enroll(w.s001, PersonId("S001"), at_ltk("CS301"));
    EXPECT_EQ(pending.status, EnrollmentStatus::PendingApproval);
    EXPECT_FALSE(pending.prerequisite_met);
}

TEST(Enroll, StaffCannotBypassPrerequisites) {
    World w;
    EXPECT_EQ(error_of([&] { w.campus->enrollment.enroll(w.academic, PersonId("S001"), at_ltk("CS301")); }).code(),
              ErrorCode::PrerequisiteNotMet);
    EXPECT_EQ(error_of([&] { w.campus->enrollment.enroll(w.admin, PersonId("S001"), at_ltk("CS301")); }).code(),
              ErrorCode::PrerequisiteNotMet);
    auto e = w.campus->enrollment.enroll(w.academic, PersonId("S001"), at_ltk("CS201"));
    EXPECT_EQ(e.status, EnrollmentStatus::Approved);
}

TEST(Enroll, Refusals) {
    World w;
    w.campus->enrollment.enroll(w.s001, PersonId("S001"), at_ltk("CS201"));
    EXPECT_EQ(error_of([&] { w.campus->enrollment.enroll(w.s001, PersonId("S001"), at_ltk("CS201")); }).code(),
              ErrorCode::DuplicateEnrollment);
    EXPECT_EQ(error_of([&] { w.campus->enrollment.enroll(w.s001, PersonId("S001"), at_ltk("MA101")); }).code(),
              ErrorCode::NotEligible);
    EXPECT_EQ(error_of([&] { w.campus->enrollment.enroll(w.s001, PersonId("S001"), OfferingKey{"CS101", "LTK", kT1}); }).code(),
              ErrorCode::InactiveOffering);
    EXPECT_EQ(error_of([&] { w.campus->enrollment.enroll(w.s002, PersonId("S001"), at_ltk("CS301")); }).code(),
              ErrorCode::Forbidden);
    EXPECT_EQ(error_of([&] { w.campus->enrollment.enroll(w.s001, PersonId("S001"), OfferingKey{"CS201", "LTK", TermId::parse("2010-T2")}); }).code(),
              ErrorCode::TermNotOpen);
}

TEST(Enroll, ConcurrentCallsStoreOneRow) {
    World w;
    std::atomic<int> ok{0}, dup{0};
    std::vector<std::thread> ts;
    for (int i = 0; i < 16; ++i) {
        ts.emplace_back([&] {
            try {
                w.campus->enrollment.enroll(w.s001, PersonId("S001"), at_ltk("CS201"));
                ++ok;
            } catch (const CampusError& e) {
                if (e.code() == ErrorCode::DuplicateEnrollment || e.code() == ErrorCode::NotEligible) ++dup;
            }
        });
    }
    for (auto& t : ts) t.join();
    EXPECT_EQ(ok, 1);
    EXPECT_EQ(dup, 15);
    auto tx = w.db->begin();
    EXPECT_EQ(DataAccess(tx).count_enrollments(PersonId("S001"), "CS201", kT1), 1);
}

TEST(PendingDecision, ApproveRecordsDeciderRejectRestoresEligibility) {
    World w;
    auto pending = w.campus->enrollment.enroll(w.s001, PersonId("S001"), at_ltk("CS301"));
    auto listed = w.campus->enrollment.list_pending_enrollments(w.admin);
    ASSERT_EQ(listed.size(), 1u);
    EXPECT_EQ(listed[0].id, pending.id);
    EXPECT_EQ(error_of([&] { w.campus->enrollment.decide_pending_enrollment(w.academic, pending.id, Decision::Approve); }).code(),
              ErrorCode::Forbidden);

    auto approved = w.campus->enrollment.decide_pending_enrollment(w.admin, pending.id, Decision::Approve);
    EXPECT_EQ(approved.status, EnrollmentStatus::Approved);
    ASSERT_TRUE(approved.decided_by);
    EXPECT_EQ(approved.decided_by->str(), "A100");
    EXPECT_EQ(error_of([&] { w.campus->enrollment.decide_pending_enrollment(w.admin, pending.id, Decision::Reject); }).code(),
              ErrorCode::AlreadyDecided);

    World w2;
    auto p2 = w2.campus->enrollment.enroll(w2.s001, PersonId("S001"), at_ltk("CS301"));
    EXPECT_TRUE(as_map(w2.campus->enrollment.eligible_units(w2.s001, PersonId("S001"), "LTK", kT1)).count("CS301") == 0);
    auto rejected = w2.campus->enrollment.decide_pending_enrollment(w2.admin, p2.id, Decision::Reject);
    EXPECT_EQ(rejected.status, EnrollmentStatus::Rejected);
    EXPECT_EQ(as_map(w2.campus->enrollment.eligible_units(w2.s001, PersonId("S001"), "LTK", kT1)),
              testkit::oracle_eligible(testkit::f1_json(), "S001", "LTK", "2011-T1"));
    // A rejected request may be retried.
    EXPECT_EQ(w2.campus->enrollment.enroll(w2.s001, PersonId("S001"), at_ltk("CS301")).status,
              EnrollmentStatus::PendingApproval);
    EXPECT_EQ(error_of([&] { w2.campus->enrollment.decide_pending_enrollment(w2.admin, "missing", Decision::Approve); }).code(),
              ErrorCode::UnknownEnrollment);
}

TEST(GateProperty, ApprovedWithoutPrerequisitesOnlyViaDecision) {
    auto gen = testkit::rng(103);
    for (int round = 0; round < 40; ++round) {
        auto doc = testkit::random_fixture(gen);
        World w(Fixture::from_json(doc));
        const Caller me{PersonId("S001"), Role::Student};
        const Caller staff = (gen() % 2) ? w.academic : w.admin;
        for (const auto& [code, met] : testkit::oracle_eligible(doc, "S001", "LTK", "2011-T1")) {
            switch (gen() % 3) {
                case 0: {
                    auto e = w.campus->enrollment.enroll(me, me.id, at_ltk(code));
                    if (!met && gen() % 2) {
                        w.campus->enrollment.decide_pending_enrollment(
                            w.admin, e.id, (gen() % 2) ? Decision::Approve : Decision::Reject);
                    }
                    break;
                }
                case 1: {
                    auto r = error_of([&] { w.campus->enrollment.enroll(staff, me.id, at_ltk(code)); });
                    if (!met) ASSERT_EQ(r.code(), ErrorCode::PrerequisiteNotMet);
                    break;
                }
                default: break;
            }
        }
        auto tx = w.db->begin();
        for (const auto& e : DataAccess(tx).all_enrollments()) {
            if (e.status == EnrollmentStatus::Approved && !e.prerequisite_met) {
                ASSERT_TRUE(e.decided_by.has_value()) << e.id;
            }
        }
    }
}

TEST(Drop, WindowAndTerminalRules) {
    World w;
    auto e = w.campus->enrollment.enroll(w.s001, PersonId("S001"), at_ltk("CS201"));
    auto pending = w.campus->enrollment.enroll(w.s001, PersonId("S001"), at_ltk("CS301"));
    EXPECT_EQ(error_of([&] { w.campus->enrollment.drop_unit(w.s002, e.id); }).code(), ErrorCode::Forbidden);
    EXPECT_EQ(w.campus->enrollment.drop_unit(w.s001, pending.id).status, EnrollmentStatus::Dropped);
    EXPECT_EQ(error_of([&] { w.campus->enrollment.drop_unit(w.s001, pending.id); }).code(), ErrorCode::AlreadyTerminal);

    // Last day of the window is still open; the next day is not.
    w.clock.set(parse_timestamp("2011-03-15T23:59:00.000Z"));
    auto e2 = w.campus->enrollment.enroll(w.s001, PersonId("S001"), at_ltk("CS301"));
    EXPECT_EQ(w.campus->enrollment.drop_unit(w.s001, e2.id).status, EnrollmentStatus::Dropped);
    w.clock.set(parse_timestamp("2011-03-16T00:00:00.000Z"));
    EXPECT_EQ(error_of([&] { w.campus->enrollment.drop_unit(w.s001, e.id); }).code(), ErrorCode::ChangeWindowClosed);

    w.campus->records.record_final_grade(w.academic, e.id, Grade::B);
    EXPECT_EQ(error_of([&] { w.campus->enrollment.drop_unit(w.admin, e.id); }).code(), ErrorCode::AlreadyTerminal);
}

TEST(ProgramChange, RequestAndDecide) {
    World w;
    auto major = w.campus->enrollment.request_program_change(w.s001, PersonId("S001"), std::nullopt, "Networks");
    EXPECT_EQ(major.status, RequestStatus::Submitted);
    EXPECT_EQ(error_of([&] { w.campus->enrollment.request_program_change(w.s001, PersonId("S001"), std::nullopt, std::nullopt); }).code(),
              ErrorCode::EmptyRequest);
    EXPECT_EQ(error_of([&] { w.campus->enrollment.request_program_change(w.s001, PersonId("S001"), "BXYZ", std::nullopt); }).code(),
              ErrorCode::UnknownProgram);
    EXPECT_EQ(error_of([&] { w.campus->enrollment.request_program_change(w.s002, PersonId("S001"), "BNet", std::nullopt); }).code(),
              ErrorCode::Forbidden);

    auto change = w.campus->enrollment.request_program_change(w.s001, PersonId("S001"), "BNet", std::nullopt);
    EXPECT_EQ(w.campus->enrollment.list_program_change_requests(w.admin).size(), 2u);
    auto rejected = w.campus->enrollment.decide_program_change(w.admin, major.id, Decision::Reject);
    EXPECT_EQ(rejected.status, RequestStatus::Rejected);
    {
        auto tx = w.db->begin();
        auto s = DataAccess(tx).student(PersonId("S001"));
        EXPECT_EQ(s->program_id, "BSCS");
        EXPECT_FALSE(s->major);
    }
    EXPECT_EQ(w.campus->enrollment.decide_program_change(w.admin, change.id, Decision::Approve).status,
              RequestStatus::Approved);
    EXPECT_EQ(error_of([&] { w.campus->enrollment.decide_program_change(w.admin, change.id, Decision::Approve); }).code(),
              ErrorCode::AlreadyDecided);
    auto tx = w.db->begin();
    DataAccess da(tx);
    EXPECT_EQ(da.student(PersonId("S001"))->program_id, "BNet");
    EXPECT_EQ(da.grades_for_student(PersonId("S001")).size(), 2u);
    tx.commit();

    // Eligibility now follows BNet: NW201 once activated, CS201 no longer.
    w.campus->enrollment.activate_offering(w.admin, OfferingKey{"NW201", "LTK", kT1});
    auto rows = as_map(w.campus->enrollment.eligible_units(w.s001, PersonId("S001"), "LTK", kT1));
    EXPECT_EQ(rows, (std::map<std::string, bool>{{"NW201", true}}));
}

TEST(Menus, EnrollmentOperationsPerRole) {
    const auto& m = AccessMatrix::instance();
    EXPECT_TRUE(m.allows(Role::Student, "enroll"));
    EXPECT_TRUE(m.allows(Role::Student, "eligible_units"));
    EXPECT_TRUE(m.allows(Role::Student, "drop_unit"));
    EXPECT_TRUE(m.allows(Role::Student, "request_program_change"));
    EXPECT_FALSE(m.allows(Role::Student, "decide_program_change"));
    EXPECT_TRUE(m.allows(Role::AcademicStaff, "enroll"));
    EXPECT_FALSE(m.allows(Role::AcademicStaff, "activate_offering"));
    EXPECT_TRUE(m.allows(Role::AdminStaff, "activate_offering"));
    EXPECT_TRUE(m.allows(Role::AdminStaff, "decide_program_change"));
}
