#include "campus/auth.hpp"

#include "campus/codec.hpp"
#include "campus/crypto.hpp"
#include "campus/error.hpp"

#include <algorithm>
#include <cctype>
#include <mutex>

namespace campus {

namespace {

// clang-format off
constexpr OperationAccess kOperations[] = {
    //  name                            public  student academic admin
    {"login",                           true,   true,   true,   true},
    {"submit_application",              true,   true,   true,   true},
    {"logout",                          false,  true,   true,   true},
    {"change_password",                 false,  true,   true,   true},
    {"describe_access",                 false,  true,   true,   true},
    {"view_profile",                    false,  true,   true,   true},
    {"update_profile",                  false,  true,   true,   true},
    {"external_links",                  false,  true,   true,   true},
    {"list_terms",                      false,  true,   true,   true},
    {"list_offerings",                  false,  true,   true,   true},
    {"list_pending_applications",       false,  false,  false,  true},
    {"decide_application",              false,  false,  false,  true},
    {"activate_offering",               false,  false,  false,  true},
    {"eligible_units",                  false,  true,   true,   true},
    {"enroll",                          false,  true,   true,   true},
    {"list_enrollments",                false,  true,   true,   true},
    {"list_pending_enrollments",        false,  false,  false,  true},
    {"decide_pending_enrollment",       false,  false,  false,  true},
    {"drop_unit",                       false,  true,   true,   true},
    {"request_program_change",          false,  true,   false,  false},
    {"list_program_change_requests",    false,  false,  false,  true},
    {"decide_program_change",           false,  false,  false,  true},
    {"view_transcript",                 false,  true,   true,   true},
    {"program_details",                 false,  true,   true,   true},
    {"record_final_grade",              false,  false,  true,   true},
    {"submit_coursework",               false,  false,  true,   false},
    {"import_coursework_csv",           false,  false,  true,   false},
    {"view_coursework",                 false,  true,   true,   true},
    {"class_list",                      false,  false,  true,   true},
    {"student_lookup",                  false,  false,  true,   true},
    {"view_timetable",                  false,  true,   true,   true},
    {"apply_graduation",                false,  true,   false,  false},
    {"list_graduation_requests",        false,  false,  false,  true},
    {"decide_graduation",               false,  false,  false,  true},
    {"view_invoices",                   false,  true,   true,   true},
    {"pay_invoice",                     false,  true,   false,  false},
    {"generate_report",                 false,  false,  false,  true},
};
// clang-format on

constexpr std::chrono::minutes kSlideGranularity{5};

const std::string& dummy_hash(int iterations) {
    static const std::string h = crypto::hash_password("not-a-real-password", iterations);
    return h;
}

bool contact_key(const std::string& k) {
    return k == "postal_address" || k == "residential_address" || k == "home_phone" || k == "mobile";
}

}  // namespace

AccessMatrix::AccessMatrix() : entries_(std::begin(kOperations), std::end(kOperations)) {}

const AccessMatrix& AccessMatrix::instance() {
    static const AccessMatrix m;
    return m;
}

bool AccessMatrix::allows(Role role, std::string_view operation) const {
    for (const auto& e : entries_) {
        if (e.name != operation) continue;
        switch (role) {
            case Role::Student:
                return e.student;
            case Role::AcademicStaff:
                return e.academic;
            case Role::AdminStaff:
                return e.admin;
        }
    }
    return false;
}

bool AccessMatrix::is_public(std::string_view operation) const {
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const OperationAccess& e) { return e.name == operation && e.is_public; });
}

bool AccessMatrix::knows(std::string_view operation) const {
    return std::any_of(entries_.begin(), entries_.end(), [&](const OperationAccess& e) { return e.name == operation; });
}

std::vector<std::string_view> AccessMatrix::operations() const {
    std::vector<std::string_view> out;
    for (const auto& e : entries_) out.push_back(e.name);
    return out;
}

nlohmann::json AccessMatrix::describe() const {
    nlohmann::json roles = nlohmann::json::object();
    for (auto role : kAllRoles) {
        nlohmann::json ops = nlohmann::json::array();
        for (const auto& e : entries_) {
            if (allows(role, e.name)) ops.push_back(e.name);
        }
        roles[std::string(to_string(role))] = ops;
    }
    nlohmann::json pub = nlohmann::json::array();
    for (const auto& e : entries_) {
        if (e.is_public) pub.push_back(e.name);
    }
    return {{"roles", roles}, {"public", pub}};
}

std::string_view menu_for(Role role) {
    switch (role) {
        case Role::Student:
            return "student";
        case Role::AcademicStaff:
            return "academic";
        case Role::AdminStaff:
            return "admin";
    }
    return "student";
}

std::string AuthService::username_for(const PersonId& person) {
    std::string u = person.str();
    std::transform(u.begin(), u.end(), u.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return u;
}

Session AuthService::login(const std::string& username, const std::string& password) {
    std::optional<StoredCredential> cred;
    {
        auto tx = ctx_.db.begin();
        cred = DataAccess(tx).credential_by_username(username);
        tx.commit();
    }
    // Unknown users pay for a hash too, and both failures share one message.
    const bool ok = crypto::verify_password(password, cred ? cred->password_hash : dummy_hash(ctx_.config.pbkdf2_iterations));
    if (!cred || !ok) fail(ErrorCode::InvalidCredentials, "invalid user name or password");

    auto tx = ctx_.db.begin();
    DataAccess da(tx);
    Role role;
    if (auto s = da.student(cred->person_id)) {
        if (s->status == StudentStatus::Applicant || s->status == StudentStatus::Withdrawn) {
            fail(ErrorCode::AccountInactive, "account is not active");
        }
        role = Role::Student;
    } else if (auto st = da.staff(cred->person_id)) {
        role = st->role;
    } else {
        fail(ErrorCode::InvalidCredentials, "invalid user name or password");
    }

    const auto now = ctx_.clock.now();
    const auto expires = now + ctx_.config.session_ttl;
    Session session{crypto::session_token(), cred->person_id, role, format_timestamp(now), format_timestamp(expires),
                    cred->must_change};
    const auto token_hash = crypto::sha256_hex(session.token);
    da.insert_session(StoredSession{token_hash, session.person_id, role, session.created_at, session.expires_at});
    tx.commit();

    std::unique_lock lock(cache_mu_);
    cache_[token_hash] = CachedSession{session.person_id, role, expires};
    return session;
}

std::optional<AuthService::CachedSession> AuthService::find_session(const std::string& token_hash) {
    {
        std::shared_lock lock(cache_mu_);
        if (auto it = cache_.find(token_hash); it != cache_.end()) return it->second;
    }
    auto tx = ctx_.db.begin();
    auto stored = DataAccess(tx).session(token_hash);
    tx.commit();
    if (!stored) return std::nullopt;
    CachedSession s{stored->person_id, stored->role, parse_timestamp(stored->expires_at)};
    std::unique_lock lock(cache_mu_);
    cache_.emplace(token_hash, s);
    return s;
}

void AuthService::logout(const std::string& token) {
    const auto token_hash = crypto::sha256_hex(token);
    auto s = find_session(token_hash);
    if (!s || ctx_.clock.now() > s->expires_at) fail(ErrorCode::UnknownSession, "no such session");
    {
        auto tx = ctx_.db.begin();
        DataAccess(tx).delete_session(token_hash);
        tx.commit();
    }
    std::unique_lock lock(cache_mu_);
    cache_.erase(token_hash);
}

Caller AuthService::authorize(const std::string& token, std::string_view operation) {
    const auto token_hash = crypto::sha256_hex(token);
    auto s = find_session(token_hash);
    if (!s) fail(ErrorCode::UnknownSession, "no such session");
    const auto now = ctx_.clock.now();
    if (now > s->expires_at) fail(ErrorCode::SessionExpired, "session expired");
    if (!AccessMatrix::instance().allows(s->role, operation)) {
        fail(ErrorCode::Forbidden, std::string(to_string(s->role)) + " may not call " + std::string(operation));
    }

    const auto slid = now + ctx_.config.session_ttl;
    if (slid - s->expires_at >= kSlideGranularity) {
        {
            std::unique_lock lock(cache_mu_);
            if (auto it = cache_.find(token_hash); it != cache_.end()) it->second.expires_at = slid;
        }
        auto tx = ctx_.db.begin();
        DataAccess(tx).update_session_expiry(token_hash, format_timestamp(slid));
        tx.commit();
    }
    return Caller{s->person_id, s->role};
}

IssuedCredentials AuthService::issue_credentials(DataAccess& da, const PersonId& person, const std::string& password,
                                                 const std::string& password_hash) {
    if (!da.person_exists(person)) fail(ErrorCode::UnknownPerson, "no person " + person.str());
    if (da.credential(person)) fail(ErrorCode::CredentialExists, person.str() + " already holds a credential");
    const auto username = username_for(person);
    da.insert_credential(StoredCredential{person, username, password_hash, true});
    return IssuedCredentials{username, password};
}

IssuedCredentials AuthService::issue_credentials(const PersonId& person) {
    auto password = crypto::generate_password();
    auto hash = crypto::hash_password(password, ctx_.config.pbkdf2_iterations);
    auto tx = ctx_.db.begin();
    DataAccess da(tx);
    auto issued = issue_credentials(da, person, password, hash);
    tx.commit();
    return issued;
}

IssuedCredentials AuthService::reset_password(const PersonId& person) {
    auto password = crypto::generate_password();
    auto hash = crypto::hash_password(password, ctx_.config.pbkdf2_iterations);
    auto tx = ctx_.db.begin();
    DataAccess da(tx);
    IssuedCredentials out;
    if (da.credential(person)) {
        da.update_password(person, hash, true);
        out = IssuedCredentials{username_for(person), password};
    } else {
        out = issue_credentials(da, person, password, hash);
    }
    tx.commit();
    return out;
}

void AuthService::change_password(const Caller& caller, const std::string& current, const std::string& next) {
    if (next.size() < 8) {
        fail(ErrorCode::ValidationError, "new password must be at least 8 characters", {{"fields", {"new_password"}}});
    }
    std::optional<StoredCredential> cred;
    {
        auto tx = ctx_.db.begin();
        cred = DataAccess(tx).credential(caller.id);
        tx.commit();
    }
    if (!cred || !crypto::verify_password(current, cred->password_hash)) {
        fail(ErrorCode::InvalidCredentials, "invalid user name or password");
    }
    auto hash = crypto::hash_password(next, ctx_.config.pbkdf2_iterations);
    auto tx = ctx_.db.begin();
    DataAccess(tx).update_password(caller.id, hash, false);
    tx.commit();
}

nlohmann::json AuthService::view_profile(const Caller& caller, const PersonId& person) {
    auto tx = ctx_.db.begin();
    DataAccess da(tx);
    if (auto s = da.student(person)) {
        require_self_or_staff(caller, person, "view a profile");
        return nlohmann::json(*s);
    }
    if (auto st = da.staff(person)) {
        if (caller.id != person) fail(ErrorCode::Forbidden, "staff profiles are visible only to their owner");
        return nlohmann::json(*st);
    }
    fail(ErrorCode::UnknownPerson, "no person " + person.str());
}

nlohmann::json AuthService::update_profile(const Caller& caller, const PersonId& person, const nlohmann::json& fields) {
    if (!fields.is_object()) fail(ErrorCode::MalformedPayload, "fields must be an object");
    std::vector<std::string> forbidden;
    for (const auto& [k, v] : fields.items()) {
        if (!contact_key(k)) forbidden.push_back(k);
    }
    if (!forbidden.empty()) {
        fail(ErrorCode::Forbidden, "only contact fields may be updated", {{"fields", forbidden}});
    }
    for (const auto& [k, v] : fields.items()) {
        if (!v.is_string()) fail(ErrorCode::ValidationError, k + " must be text", {{"fields", {k}}});
    }
    if (fields.contains("mobile") && fields["mobile"].get<std::string>().empty()) {
        fail(ErrorCode::ValidationError, "mobile must not be empty", {{"fields", {"mobile"}}});
    }
    if (caller.id != person) fail(ErrorCode::Forbidden, "profiles may only be updated by their owner");

    auto apply = [&](ContactFields c) {
        if (fields.contains("postal_address")) c.postal_address = fields["postal_address"];
        if (fields.contains("residential_address")) c.residential_address = fields["residential_address"];
        if (fields.contains("home_phone")) c.home_phone = fields["home_phone"];
        if (fields.contains("mobile")) c.mobile = fields["mobile"];
        return c;
    };

    auto tx = ctx_.db.begin();
    DataAccess da(tx);
    nlohmann::json out;
    if (auto s = da.student(person)) {
        s->contact = apply(s->contact);
        da.update_student(*s);
        out = *s;
    } else if (auto st = da.staff(person)) {
        st->contact = apply(st->contact);
        da.update_staff_contact(person, st->contact);
        out = *st;
    } else {
        fail(ErrorCode::UnknownPerson, "no person " + person.str());
    }
    tx.commit();
    return out;
}

}  // namespace campus
