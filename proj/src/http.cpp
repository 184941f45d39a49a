#include "archon/http.hpp"

#include "archon/error.hpp"

#include <httplib.h>

namespace archon {
namespace {

struct Target {
    std::string base;  // scheme://host[:port]
    std::string path;
};

Target split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw config_error("not a URL: " + url);
    auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") throw config_error("unsupported URL scheme: " + scheme);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

void configure(httplib::Client& client, std::chrono::milliseconds timeout) {
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    client.set_follow_location(true);
}

HttpResponse finish(const httplib::Result& res, const std::string& url) {
    if (!res) throw infra_error("request to " + url + " failed: " + httplib::to_string(res.error()));
    return {res->status, res->body};
}

}  // namespace

HttpResponse http_get(const std::string& url, std::chrono::milliseconds timeout) {
    auto t = split_url(url);
    httplib::Client client(t.base);
    configure(client, timeout);
    return finish(client.Get(t.path), url);
}

HttpResponse http_post_json(const std::string& url, const std::string& body,
                            const std::map<std::string, std::string>& headers, std::chrono::milliseconds timeout) {
    auto t = split_url(url);
    httplib::Client client(t.base);
    configure(client, timeout);
    httplib::Headers h(headers.begin(), headers.end());
    return finish(client.Post(t.path, h, body, "application/json"), url);
}

}  // namespace archon
