#include "campus/error.hpp"
#include "campus/persistence.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <thread>

using namespace campus;
using campus::testkit::TempDir;
using campus::testkit::World;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const CampusError& e) {
        return e.code();
    }
    return ErrorCode::InternalError;
}

EntityCounts load(Database& db, const nlohmann::json& doc) {
    ManualClock clock(testkit::f1_now());
    auto tx = db.begin();
    auto counts = load_fixture(tx, Fixture::from_json(doc), clock);
    tx.commit();
    return counts;
}

Enrollment pending(const std::string& id, const std::string& student, const std::string& unit) {
    Enrollment e;
    e.id = id;
    e.student_id = PersonId(student);
    e.offering = OfferingKey{unit, "LTK", TermId::parse("2011-T1")};
    e.status = EnrollmentStatus::PendingApproval;
    e.created_at = "2011-02-14T09:00:00.000Z";
    return e;
}

}  // namespace

TEST(Migrate, CreatesThenIsIdempotent) {
    TempDir dir;
    auto store = dir.path() / "store";
    EXPECT_EQ(migrate(store), kLatestSchemaVersion);
    auto stamp = std::filesystem::last_write_time(store / "campus.db");
    EXPECT_EQ(migrate(store), kLatestSchemaVersion);
    EXPECT_EQ(std::filesystem::last_write_time(store / "campus.db"), stamp);
    std::ifstream v(store / "schema_version");
    int version = 0;
    v >> version;
    EXPECT_EQ(version, kLatestSchemaVersion);
    EXPECT_NO_THROW(Database::open(store));
}

TEST(Migrate, RejectsCorruptOrNewerVersion) {
    TempDir dir;
    auto store = dir.path() / "store";
    migrate(store);
    std::ofstream(store / "schema_version") << "garbage";
    EXPECT_EQ(code_of([&] { migrate(store); }), ErrorCode::CorruptSchema);
    std::ofstream(store / "schema_version") << (kLatestSchemaVersion + 1);
    EXPECT_EQ(code_of([&] { migrate(store); }), ErrorCode::CorruptSchema);
}

TEST(Migrate, UnwritableLocationIsStorageUnavailable) {
    TempDir dir;
    std::ofstream(dir.path() / "file") << "x";
    EXPECT_EQ(code_of([&] { migrate(dir.path() / "file" / "sub"); }), ErrorCode::StorageUnavailable);
}

TEST(Open, UnmigratedStoreIsRefused) {
    TempDir dir;
    auto code = code_of([&] { Database::open(dir.path() / "never"); });
    EXPECT_TRUE(code == ErrorCode::StorageUnavailable || code == ErrorCode::CorruptSchema);
}

TEST(Fixture, F1LoadsWithExpectedCounts) {
    auto db = Database::open_in_memory();
    auto counts = load(*db, testkit::f1_json());
    EXPECT_EQ(counts["programs"], 2);
    EXPECT_EQ(counts["units"], 5);
    EXPECT_EQ(counts["students"], 2);
    EXPECT_EQ(counts["grades"], 6);
    EXPECT_EQ(counts["fees"], 5);
}

TEST(Fixture, DanglingReferenceNamesTheReference) {
    auto doc = testkit::f1_json();
    doc["units"][1]["prerequisites"] = {"CS999"};
    auto db = Database::open_in_memory();
    try {
        load(*db, doc);
        FAIL() << "expected ReferentialViolation";
    } catch (const CampusError& e) {
        EXPECT_EQ(e.code(), ErrorCode::ReferentialViolation);
        EXPECT_NE(std::string(e.what()).find("CS999"), std::string::npos);
    }
    // Nothing persisted.
    auto tx = db->begin();
    EXPECT_TRUE(DataAccess(tx).units().empty());
}

TEST(Fixture, DuplicateKeyAndCycleAndUnknownKey) {
    auto dup = testkit::f1_json();
    dup["units"].push_back(dup["units"][0]);
    EXPECT_EQ(code_of([&] { load(*Database::open_in_memory(), dup); }), ErrorCode::DuplicateKey);

    auto cyc = testkit::f1_json();
    cyc["units"][0]["prerequisites"] = {"CS301"};
    EXPECT_EQ(code_of([&] { load(*Database::open_in_memory(), cyc); }), ErrorCode::ValidationError);

    auto extra = testkit::f1_json();
    extra["grades"] = nlohmann::json::array();
    EXPECT_EQ(code_of([&] { Fixture::from_json(extra); }), ErrorCode::ValidationError);
}

TEST(AtomicInsert, SecondInsertIsDuplicate) {
    World w;
    {
        auto tx = w.db->begin();
        atomic_check_and_insert_enrollment(tx, pending("E1", "S001", "CS201"));
        tx.commit();
    }
    auto tx = w.db->begin();
    EXPECT_EQ(code_of([&] { atomic_check_and_insert_enrollment(tx, pending("E2", "S001", "CS201")); }),
              ErrorCode::DuplicateEnrollment);
    EXPECT_EQ(code_of([&] { atomic_check_and_insert_enrollment(tx, pending("E3", "S404", "CS201")); }),
              ErrorCode::UnknownStudent);
    auto inactive = pending("E4", "S001", "CS101");
    inactive.offering.term = TermId::parse("2011-T1");
    EXPECT_EQ(code_of([&] { atomic_check_and_insert_enrollment(tx, inactive); }), ErrorCode::InactiveOffering);
}

TEST(AtomicInsert, TerminalEnrollmentDoesNotBlock) {
    World w;
    auto tx = w.db->begin();
    auto e = atomic_check_and_insert_enrollment(tx, pending("E1", "S001", "CS201"));
    e.status = EnrollmentStatus::Rejected;
    DataAccess(tx).update_enrollment(e);
    EXPECT_NO_THROW(atomic_check_and_insert_enrollment(tx, pending("E2", "S001", "CS201")));
}

TEST(AtomicInsert, ConcurrentInsertsLeaveOneRow) {
    World w;
    std::atomic<int> ok{0}, dup{0};
    std::vector<std::thread> threads;
    for (int i = 0; i < 16; ++i) {
        threads.emplace_back([&, i] {
            try {
                auto tx = w.db->begin();
                atomic_check_and_insert_enrollment(tx, pending("E" + std::to_string(i), "S001", "CS201"));
                tx.commit();
                ++ok;
            } catch (const CampusError& e) {
                if (e.code() == ErrorCode::DuplicateEnrollment) ++dup;
            }
        });
    }
    for (auto& t : threads) t.join();
    EXPECT_EQ(ok, 1);
    EXPECT_EQ(dup, 15);
    auto tx = w.db->begin();
    EXPECT_EQ(DataAccess(tx).count_enrollments(PersonId("S001"), "CS201", TermId::parse("2011-T1")), 1);
}

TEST(Transaction, DestroyedWithoutCommitRollsBack) {
    World w;
    {
        auto tx = w.db->begin();
        atomic_check_and_insert_enrollment(tx, pending("E1", "S001", "CS201"));
    }
    auto tx = w.db->begin();
    EXPECT_FALSE(DataAccess(tx).enrollment("E1").has_value());
}

TEST(Transaction, FileStoreSurvivesReopen) {
    TempDir dir;
    migrate(dir.path());
    {
        auto db = Database::open(dir.path());
        load(*db, testkit::f1_json());
    }
    auto db = Database::open(dir.path());
    auto tx = db->begin();
    EXPECT_TRUE(DataAccess(tx).student(PersonId("S002")).has_value());
    EXPECT_EQ(DataAccess(tx).grades_for_student(PersonId("S002")).size(), 4u);
}
