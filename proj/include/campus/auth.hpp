#pragma once

#include "campus/context.hpp"

#include <nlohmann/json.hpp>

#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace campus {

/// One exposed operation and the roles the access matrix grants it to.
/// Public operations need no session at all.
struct OperationAccess {
    std::string_view name;
    bool is_public = false;
    bool student = false;
    bool academic = false;
    bool admin = false;
};

/// The (role, operation) -> allow/deny table. Total over every exposed
/// operation; any pair not granted here is denied.
class AccessMatrix {
  public:
    static const AccessMatrix& instance();

    bool allows(Role role, std::string_view operation) const;
    bool is_public(std::string_view operation) const;
    bool knows(std::string_view operation) const;
    const std::vector<OperationAccess>& entries() const { return entries_; }
    std::vector<std::string_view> operations() const;

    nlohmann::json describe() const;

  private:
    AccessMatrix();
    std::vector<OperationAccess> entries_;
};

struct Session {
    std::string token;  // only ever returned to the client that logged in
    PersonId person_id;
    Role role = Role::Student;
    std::string created_at;
    std::string expires_at;
    bool must_change = false;
};

/// "student", "academic" or "admin": the menu a role lands on after login.
std::string_view menu_for(Role role);

struct IssuedCredentials {
    std::string username;
    std::string password;
};

/// Login, sessions, credential issuance, profile updates and request
/// authorization. Sessions are persisted and cached in memory; the cache is a
/// pure accelerator, so a restarted server keeps honouring live tokens.
class AuthService {
  public:
    explicit AuthService(Context& ctx) : ctx_(ctx) {}

    Session login(const std::string& username, const std::string& password);
    void logout(const std::string& token);
    Caller authorize(const std::string& token, std::string_view operation);

    IssuedCredentials issue_credentials(const PersonId& person);
    /// Issue within an open transaction; the password hash is precomputed so
    /// the slow hash never runs under the store lock.
    static IssuedCredentials issue_credentials(DataAccess& da, const PersonId& person, const std::string& password,
                                               const std::string& password_hash);
    /// Ops action: new one-time password, issuing a credential if none exists.
    IssuedCredentials reset_password(const PersonId& person);
    void change_password(const Caller& caller, const std::string& current, const std::string& next);

    nlohmann::json view_profile(const Caller& caller, const PersonId& person);
    /// Only the four contact fields may change; anything else is Forbidden.
    nlohmann::json update_profile(const Caller& caller, const PersonId& person, const nlohmann::json& fields);

    static std::string username_for(const PersonId& person);

  private:
    struct CachedSession {
        PersonId person_id;
        Role role;
        TimePoint expires_at;
    };

    std::optional<CachedSession> find_session(const std::string& token_hash);

    Context& ctx_;
    std::shared_mutex cache_mu_;
    std::unordered_map<std::string, CachedSession> cache_;
};

}  // namespace campus
