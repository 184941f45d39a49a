#pragma once

#include <chrono>
#include <map>
#include <string>

namespace archon {

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// Thin wrappers over the vendored HTTP client. Transport failures throw infrastructure errors;
/// HTTP error statuses are returned to the caller.
HttpResponse http_get(const std::string& url, std::chrono::milliseconds timeout);
HttpResponse http_post_json(const std::string& url, const std::string& body,
                            const std::map<std::string, std::string>& headers, std::chrono::milliseconds timeout);

}  // namespace archon
