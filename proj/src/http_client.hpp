#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace verifai::detail {

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds backoff{100};
    std::chrono::milliseconds timeout{30000};
};

struct HttpFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Url {
    std::string base;  // scheme://host[:port]
    std::string path;  // starts with '/'
};

/// Throws HttpFailure on anything that is not http(s)://host[:port][/path].
Url split_url(const std::string& url);

/// POSTs `body` as JSON and hands the parsed 2xx response to `accept`, which
/// throws HttpFailure to reject it. Transport errors, non-2xx statuses,
/// unparsable bodies and rejections are retried with doubling backoff; the
/// last failure is rethrown as HttpFailure.
void post_json(const std::string& url, const nlohmann::json& body, const std::optional<std::string>& bearer,
               const RetryPolicy& policy, const std::function<void(const nlohmann::json&)>& accept);

}  // namespace verifai::detail
