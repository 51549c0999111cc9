#pragma once

#include "campus/campus.hpp"
#include "campus/codec.hpp"
#include "campus/error.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace campus {

inline constexpr int kProtocolVersion = 1;

/// What a handler sees: the authenticated caller (null for public
/// operations), the raw session token, and the request payload.
struct Call {
    const Caller* caller;
    const std::string& token;
    const PayloadReader& payload;
};

/// Maps wire messages onto business operations. One handler per operation
/// named in the access matrix; authorization runs before every non-public
/// handler.
class Dispatcher {
  public:
    using Handler = std::function<nlohmann::json(Call)>;

    explicit Dispatcher(Campus& campus);

    /// Never throws. Any failure becomes an Error response carrying a catalog
    /// code; internal failures carry no detail beyond "internal error".
    nlohmann::json dispatch(const nlohmann::json& message);
    /// Decodes `frame` first; undecodable text yields MalformedPayload.
    std::string dispatch_text(std::string_view frame);

    std::vector<std::string> operations() const;

  private:
    Campus& campus_;
    std::map<std::string, Handler, std::less<>> handlers_;
};

nlohmann::json ok_response(const std::string& request_id, nlohmann::json payload);
nlohmann::json error_response(const std::string& request_id, ErrorCode code, const std::string& message,
                              nlohmann::json details = nlohmann::json::object());

}  // namespace campus
