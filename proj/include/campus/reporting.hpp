#pragma once

#include "campus/context.hpp"

#include <map>
#include <string>
#include <string_view>

namespace campus {

enum class ReportKind { EnrollmentByUnit, ApplicationsByStatus, GradeDistribution };

std::string_view to_string(ReportKind kind);
ReportKind parse_report_kind(std::string_view s);

/// Optional filters keyed "campus", "term" and "program". Any other key is
/// UnknownFilter, as is a value naming an entity that does not exist.
/// ApplicationsByStatus honours only "program".
using ReportFilters = std::map<std::string, std::string>;

std::string_view report_header(ReportKind kind);

/// Header plus rows sorted lexicographically, LF-terminated. Byte-identical
/// for identical state.
class Reporting {
  public:
    explicit Reporting(Context& ctx) : ctx_(ctx) {}

    std::string generate_report(const Caller& caller, ReportKind kind, const ReportFilters& filters);
    /// Ops path for the CLI: no session, same output.
    std::string generate_unchecked(ReportKind kind, const ReportFilters& filters);

  private:
    Context& ctx_;
};

}  // namespace campus
