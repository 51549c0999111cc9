#include "campus/auth.hpp"
#include "campus/crypto.hpp"
#include "campus/error.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <functional>
#include <set>

using namespace campus;
using campus::testkit::World;

namespace {

CampusError error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const CampusError& e) {
        return e;
    }
    return CampusError(ErrorCode::InternalError, "no error raised");
}

}  // namespace

TEST(Login, StudentGetsStudentSession) {
    World w;
    auto issued = w.campus->auth.reset_password(PersonId("S001"));
    EXPECT_EQ(issued.username, "s001");
    EXPECT_EQ(issued.password.size(), 12u);
    auto s = w.campus->auth.login("s001", issued.password);
    EXPECT_EQ(s.role, Role::Student);
    EXPECT_EQ(s.person_id.str(), "S001");
    EXPECT_EQ(menu_for(s.role), "student");
    EXPECT_TRUE(s.must_change);
    EXPECT_GE(s.token.size(), 32u);  // at least 128 bits hex-encoded
}

TEST(Login, UnknownUserAndWrongPasswordAreIndistinguishable) {
    World w;
    w.campus->auth.reset_password(PersonId("S001"));
    auto wrong = error_of([&] { w.campus->auth.login("s001", "not-the-password"); });
    auto unknown = error_of([&] { w.campus->auth.login("nobody", "whatever"); });
    EXPECT_EQ(wrong.code(), ErrorCode::InvalidCredentials);
    EXPECT_EQ(unknown.code(), ErrorCode::InvalidCredentials);
    EXPECT_EQ(std::string(wrong.what()), std::string(unknown.what()));
    EXPECT_EQ(wrong.details(), unknown.details());
}

TEST(Login, InactiveStudentRefused) {
    World w;
    auto issued = w.campus->auth.reset_password(PersonId("S001"));
    {
        auto tx = w.db->begin();
        DataAccess da(tx);
        auto s = *da.student(PersonId("S001"));
        s.status = StudentStatus::Withdrawn;
        da.update_student(s);
        tx.commit();
    }
    EXPECT_EQ(error_of([&] { w.campus->auth.login("s001", issued.password); }).code(), ErrorCode::AccountInactive);
}

TEST(Logout, InvalidatesTokenAndIsNotRepeatable) {
    World w;
    auto token = w.login(PersonId("S001"));
    EXPECT_NO_THROW(w.campus->auth.authorize(token, "view_transcript"));
    w.campus->auth.logout(token);
    EXPECT_EQ(error_of([&] { w.campus->auth.authorize(token, "view_transcript"); }).code(), ErrorCode::UnknownSession);
    EXPECT_EQ(error_of([&] { w.campus->auth.logout(token); }).code(), ErrorCode::UnknownSession);
}

TEST(Sessions, ExpireAfterIdleTtlAndSlideOnUse) {
    World w;
    auto token = w.login(PersonId("S001"));
    w.clock.advance(std::chrono::hours(7));
    EXPECT_NO_THROW(w.campus->auth.authorize(token, "view_transcript"));  // slides to now + 8h
    w.clock.advance(std::chrono::hours(7));
    EXPECT_NO_THROW(w.campus->auth.authorize(token, "view_transcript"));
    w.clock.advance(std::chrono::hours(8) + std::chrono::seconds(1));
    EXPECT_EQ(error_of([&] { w.campus->auth.authorize(token, "view_transcript"); }).code(), ErrorCode::SessionExpired);
    EXPECT_EQ(error_of([&] { w.campus->auth.logout(token); }).code(), ErrorCode::UnknownSession);
}

TEST(Sessions, SurviveServiceRestart) {
    World w;
    auto token = w.login(PersonId("S001"));
    Campus fresh(*w.db, w.clock, testkit::fast_config());  // empty session cache
    auto caller = fresh.auth.authorize(token, "view_transcript");
    EXPECT_EQ(caller.id.str(), "S001");
}

TEST(Sessions, RawTokenNeverStored) {
    World w;
    auto token = w.login(PersonId("S001"));
    auto tx = w.db->begin();
    EXPECT_FALSE(DataAccess(tx).session(token).has_value());
    EXPECT_TRUE(DataAccess(tx).session(crypto::sha256_hex(token)).has_value());
}

TEST(Authorize, MatrixExamples) {
    World w;
    auto student = w.login(PersonId("S001"));
    auto admin = w.login(PersonId("A100"));
    EXPECT_EQ(error_of([&] { w.campus->auth.authorize(student, "decide_application"); }).code(), ErrorCode::Forbidden);
    EXPECT_EQ(w.campus->auth.authorize(admin, "decide_application").role, Role::AdminStaff);
    EXPECT_EQ(w.campus->auth.authorize(student, "view_transcript").id.str(), "S001");
    EXPECT_EQ(error_of([&] { w.campus->auth.authorize("deadbeef", "view_transcript"); }).code(),
              ErrorCode::UnknownSession);
}

TEST(AccessMatrix, TotalAndOnlyLoginAndApplicationArePublic) {
    const auto& m = AccessMatrix::instance();
    std::set<std::string_view> publics;
    for (const auto& e : m.entries()) {
        if (e.is_public) publics.insert(e.name);
    }
    EXPECT_EQ(publics, (std::set<std::string_view>{"login", "submit_application"}));
    EXPECT_FALSE(m.knows("no_such_op"));
    for (auto role : kAllRoles) EXPECT_FALSE(m.allows(role, "no_such_op"));
    // Menu assignments that must hold.
    EXPECT_FALSE(m.allows(Role::Student, "activate_offering"));
    EXPECT_FALSE(m.allows(Role::AcademicStaff, "decide_pending_enrollment"));
    EXPECT_TRUE(m.allows(Role::AdminStaff, "decide_pending_enrollment"));
    EXPECT_TRUE(m.allows(Role::AcademicStaff, "import_coursework_csv"));
    EXPECT_FALSE(m.allows(Role::AdminStaff, "import_coursework_csv"));
}

TEST(Credentials, IssueOnceForKnownPeople) {
    World w;
    {
        auto tx = w.db->begin();
        Student s;
        s.id = PersonId("S003");
        s.name = "New";
        s.program_id = "BSCS";
        s.status = StudentStatus::Active;
        DataAccess(tx).insert_student(s);
        tx.commit();
    }
    auto issued = w.campus->auth.issue_credentials(PersonId("S003"));
    EXPECT_EQ(issued.username, "s003");
    EXPECT_EQ(issued.password.size(), 12u);
    EXPECT_EQ(error_of([&] { w.campus->auth.issue_credentials(PersonId("S003")); }).code(), ErrorCode::CredentialExists);
    EXPECT_EQ(error_of([&] { w.campus->auth.issue_credentials(PersonId("S404")); }).code(), ErrorCode::UnknownPerson);
    auto tx = w.db->begin();
    auto cred = DataAccess(tx).credential(PersonId("S003"));
    ASSERT_TRUE(cred);
    EXPECT_EQ(cred->password_hash.find(issued.password), std::string::npos);
    EXPECT_TRUE(cred->must_change);
}

TEST(Credentials, ChangePasswordClearsMustChange) {
    World w;
    auto issued = w.campus->auth.reset_password(PersonId("S001"));
    EXPECT_EQ(error_of([&] { w.campus->auth.change_password(w.s001, issued.password, "short"); }).code(),
              ErrorCode::ValidationError);
    EXPECT_EQ(error_of([&] { w.campus->auth.change_password(w.s001, "wrong-current", "longenough1"); }).code(),
              ErrorCode::InvalidCredentials);
    w.campus->auth.change_password(w.s001, issued.password, "longenough1");
    auto s = w.campus->auth.login("s001", "longenough1");
    EXPECT_FALSE(s.must_change);
}

TEST(Profile, OnlyContactFieldsChange) {
    World w;
    auto before = w.campus->auth.view_profile(w.s001, PersonId("S001"));
    auto after = w.campus->auth.update_profile(w.s001, PersonId("S001"), {{"mobile", "9991234"}});
    EXPECT_EQ(after["mobile"], "9991234");
    before["mobile"] = "9991234";
    EXPECT_EQ(after, before);

    auto both = w.campus->auth.update_profile(w.s001, PersonId("S001"),
                                              {{"postal_address", "PO Box 1"}, {"residential_address", "Lautoka"}});
    EXPECT_EQ(both["postal_address"], "PO Box 1");
    EXPECT_EQ(both["residential_address"], "Lautoka");
}

TEST(Profile, RejectsOtherFieldsEmptyMobileAndOtherPeople) {
    World w;
    auto forbidden = error_of([&] { w.campus->auth.update_profile(w.s001, PersonId("S001"), {{"program_id", "BNet"}}); });
    EXPECT_EQ(forbidden.code(), ErrorCode::Forbidden);
    EXPECT_EQ(forbidden.details()["fields"], nlohmann::json({"program_id"}));
    EXPECT_EQ(error_of([&] { w.campus->auth.update_profile(w.s001, PersonId("S001"), {{"mobile", ""}}); }).code(),
              ErrorCode::ValidationError);
    EXPECT_EQ(error_of([&] { w.campus->auth.update_profile(w.s001, PersonId("S002"), {{"mobile", "1"}}); }).code(),
              ErrorCode::Forbidden);
    EXPECT_EQ(error_of([&] { w.campus->auth.view_profile(w.s001, PersonId("S002")); }).code(), ErrorCode::Forbidden);
    auto staff = w.campus->auth.update_profile(w.admin, PersonId("A100"), {{"home_phone", "666"}});
    EXPECT_EQ(staff["home_phone"], "666");
    EXPECT_EQ(staff["department"], "Computing Science");
}
