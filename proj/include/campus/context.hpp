#pragma once

#include "campus/clock.hpp"
#include "campus/domain.hpp"
#include "campus/letters.hpp"
#include "campus/persistence.hpp"

#include <chrono>
#include <functional>
#include <initializer_list>
#include <map>
#include <mutex>
#include <string>

namespace campus {

/// Authenticated identity attached to a request.
struct Caller {
    PersonId id;
    Role role = Role::Student;

    bool is_staff() const { return role != Role::Student; }
};

struct ServiceConfig {
    std::chrono::hours session_ttl{8};
    int pbkdf2_iterations = 10000;
    std::string hr_url = "https://hr.example.invalid/";
    LetterTemplates letters = LetterTemplates::defaults();
};

/// Named crash points inside multi-step workflows. Tests arm a point to
/// throw (in-process) or to terminate the process (out-of-process).
class FaultInjector {
  public:
    enum class Action { Throw, Exit };

    void arm(const std::string& point, Action action);
    void disarm_all();
    void hit(const std::string& point) const;

    /// Arms every comma-separated point listed in $CAMPUS_FAULT with Action::Exit.
    void arm_from_environment();

  private:
    mutable std::mutex mu_;
    std::map<std::string, Action> armed_;
};

struct Context {
    Database& db;
    const Clock& clock;
    ServiceConfig config;
    FaultInjector faults;

    std::string now_stamp() const { return format_timestamp(clock.now()); }
    std::string today() const { return format_date(clock.now()); }
    std::string new_id() const;
};

void require_role(const Caller& caller, std::initializer_list<Role> roles, std::string_view what);
/// Students may act only on their own record; staff on any.
void require_self_or_staff(const Caller& caller, const PersonId& subject, std::string_view what);

/// The current term and the one after it, in calendar order.
std::vector<TermId> open_terms(DataAccess& da);

}  // namespace campus
