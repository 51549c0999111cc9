#include "campus/context.hpp"

#include "campus/crypto.hpp"
#include "campus/error.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

namespace campus {

void FaultInjector::arm(const std::string& point, Action action) {
    std::lock_guard lock(mu_);
    armed_[point] = action;
}

void FaultInjector::disarm_all() {
    std::lock_guard lock(mu_);
    armed_.clear();
}

void FaultInjector::hit(const std::string& point) const {
    Action action;
    {
        std::lock_guard lock(mu_);
        auto it = armed_.find(point);
        if (it == armed_.end()) return;
        action = it->second;
    }
    if (action == Action::Exit) std::_Exit(75);
    fail(ErrorCode::InternalError, "injected fault at " + point);
}

void FaultInjector::arm_from_environment() {
    const char* env = std::getenv("CAMPUS_FAULT");
    if (!env) return;
    std::stringstream ss(env);
    std::string point;
    while (std::getline(ss, point, ',')) {
        if (!point.empty()) arm(point, Action::Exit);
    }
}

std::string Context::new_id() const {
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(clock.now().time_since_epoch()).count();
    return crypto::ulid(static_cast<std::uint64_t>(ms));
}

void require_role(const Caller& caller, std::initializer_list<Role> roles, std::string_view what) {
    if (std::find(roles.begin(), roles.end(), caller.role) == roles.end()) {
        fail(ErrorCode::Forbidden, std::string(to_string(caller.role)) + " may not " + std::string(what));
    }
}

void require_self_or_staff(const Caller& caller, const PersonId& subject, std::string_view what) {
    if (!caller.is_staff() && caller.id != subject) {
        fail(ErrorCode::Forbidden, "students may only " + std::string(what) + " for themselves");
    }
}

std::vector<TermId> open_terms(DataAccess& da) {
    auto terms = da.terms();
    auto cur = std::find_if(terms.begin(), terms.end(), [](const Term& t) { return t.is_current; });
    if (cur == terms.end()) return {};
    std::vector<TermId> out{cur->id};
    if (std::next(cur) != terms.end()) out.push_back(std::next(cur)->id);
    return out;
}

}  // namespace campus
