#pragma once

#include <string>

#include "json.hpp"

namespace curation {

// POSTs a JSON body to an http:// URL and returns the parsed JSON response.
// Any transport failure, non-2xx status or unparsable body is reported as
// ProviderUnavailable.
nlohmann::json post_json(const std::string& url, const nlohmann::json& body, int timeout_seconds = 10);

}  // namespace curation
