#pragma once

// The application-server tier's business core: every module wired to one
// store, one clock and one configuration.

#include "campus/admissions.hpp"
#include "campus/auth.hpp"
#include "campus/context.hpp"
#include "campus/enrollment.hpp"
#include "campus/finance.hpp"
#include "campus/records.hpp"
#include "campus/reporting.hpp"

namespace campus {

class Campus {
  public:
    Campus(Database& db, const Clock& clock, ServiceConfig config = {})
        : ctx{db, clock, std::move(config), {}},
          auth(ctx),
          admissions(ctx),
          finance(ctx),
          enrollment(ctx, finance),
          records(ctx),
          reporting(ctx) {}

    Campus(const Campus&) = delete;
    Campus& operator=(const Campus&) = delete;

    Context ctx;
    AuthService auth;
    Admissions admissions;
    Finance finance;
    EnrollmentEngine enrollment;
    AcademicRecords records;
    Reporting reporting;
};

}  // namespace campus
