#include "http_client.hpp"

#include <thread>

#include "httplib.h"

namespace verifai::detail {

Url split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw HttpFailure("malformed URL '" + url + "'");
    const auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") throw HttpFailure("unsupported URL scheme '" + scheme + "'");
    const auto path_start = url.find('/', scheme_end + 3);
    Url out;
    out.base = url.substr(0, path_start);
    out.path = path_start == std::string::npos ? "/" : url.substr(path_start);
    if (out.base.size() <= scheme_end + 3) throw HttpFailure("URL has no host: '" + url + "'");
    return out;
}

void post_json(const std::string& url, const nlohmann::json& body, const std::optional<std::string>& bearer,
               const RetryPolicy& policy, const std::function<void(const nlohmann::json&)>& accept) {
    const Url target = split_url(url);
    const std::string payload = body.dump();
    httplib::Headers headers;
    if (bearer && !bearer->empty()) headers.emplace("Authorization", "Bearer " + *bearer);

    std::string last_error = "no attempt made";
    auto delay = policy.backoff;
    const int attempts = std::max(1, policy.max_attempts);
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        if (attempt > 1) {
            std::this_thread::sleep_for(delay);
            delay *= 2;
        }
        httplib::Client client(target.base);
        const auto secs = std::chrono::duration_cast<std::chrono::seconds>(policy.timeout);
        const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(policy.timeout - secs);
        client.set_connection_timeout(static_cast<time_t>(secs.count()), static_cast<time_t>(usecs.count()));
        client.set_read_timeout(static_cast<time_t>(secs.count()), static_cast<time_t>(usecs.count()));
        client.set_write_timeout(static_cast<time_t>(secs.count()), static_cast<time_t>(usecs.count()));

        auto res = client.Post(target.path, headers, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status < 200 || res->status >= 300) {
            last_error = "HTTP status " + std::to_string(res->status);
            continue;
        }
        try {
            accept(nlohmann::json::parse(res->body));
            return;
        } catch (const nlohmann::json::exception& e) {
            last_error = std::string("malformed response: ") + e.what();
        } catch (const HttpFailure& e) {
            last_error = e.what();
        }
    }
    throw HttpFailure(last_error + " (after " + std::to_string(attempts) + " attempts)");
}

}  // namespace verifai::detail
