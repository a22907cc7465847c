#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "contentcf/ingest/sparql.hpp"

namespace contentcf::ingest {

HttpResponse HttplibTransport::post_form(const std::string& url,
                                         const std::vector<std::pair<std::string, std::string>>& fields,
                                         const std::string& accept) {
    HttpResponse out;
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        out.error = "endpoint URL lacks a scheme: " + url;
        return out;
    }
    auto path_start = url.find('/', scheme_end + 3);
    std::string origin = path_start == std::string::npos ? url : url.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

    httplib::Client client(origin);
    client.set_connection_timeout(timeout_seconds_, 0);
    client.set_read_timeout(timeout_seconds_, 0);
    client.set_follow_location(true);

    httplib::Params params;
    for (const auto& [k, v] : fields) params.emplace(k, v);
    httplib::Headers headers = {{"Accept", accept}};

    auto res = client.Post(path, headers, params);
    if (!res) {
        out.error = "request to " + url + " failed: " + httplib::to_string(res.error());
        return out;
    }
    out.status = res->status;
    out.body = std::move(res->body);
    return out;
}

}  // namespace contentcf::ingest
