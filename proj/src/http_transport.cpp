#include "chartml/http_transport.hpp"

#include <charconv>

#if defined(CHARTML_HAVE_OPENSSL)
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include <fmt/format.h>

#include "chartml/error.hpp"

namespace chartml::client {

namespace {

struct SplitUrl {
    std::string origin;          // scheme://host[:port]
    std::string path_and_query;  // /path?query
};

SplitUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ValueError(fmt::format("URL '{}' has no scheme", url));
    }
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

TransportResponse HttpTransport::send(const HttpRequest& request) {
    SplitUrl url = split_url(request.url);
    httplib::Client cli(url.origin);
    cli.set_connection_timeout(15);
    cli.set_read_timeout(60);

    httplib::Headers headers;
    std::string content_type = "application/octet-stream";
    for (const auto& [name, value] : request.headers) {
        if (name == "Content-Type") {
            content_type = value;
        } else {
            headers.emplace(name, value);
        }
    }

    httplib::Result res = request.method == "POST"
                              ? cli.Post(url.path_and_query, headers, request.body, content_type)
                              : cli.Get(url.path_and_query, headers);
    if (!res) {
        throw HttpError(fmt::format("transport failure for {}: {}", request.url,
                                    httplib::to_string(res.error())),
                        0);
    }

    TransportResponse out;
    out.status = res->status;
    out.body = res->body;
    if (res->has_header("Retry-After")) {
        std::string v = res->get_header_value("Retry-After");
        long long seconds{};
        auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), seconds);
        if (ec == std::errc() && ptr == v.data() + v.size() && seconds >= 0) {
            out.retry_after = Duration(seconds * 1000);
        }
    }
    return out;
}

}  // namespace chartml::client
