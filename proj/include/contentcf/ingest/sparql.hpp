#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "contentcf/types.hpp"

namespace contentcf::ingest {

/// The DBpedia film query with `Film Name` standing in for the title.
extern const std::string_view kFilmQueryTemplate;

/// Prefix declarations sent ahead of the query so it runs on endpoints
/// that do not predefine `dbpedia-owl:`.
extern const std::string_view kFilmQueryPrefixes;

constexpr std::string_view kDefaultEndpoint = "https://dbpedia.org/sparql";
constexpr std::string_view kEndpointEnvVar = "CONTENTCF_SPARQL_ENDPOINT";

/// Escapes text for use inside a double-quoted SPARQL string literal.
/// Throws Error for control characters SPARQL has no escape for.
std::string escape_sparql_string(std::string_view text);

/// Substitutes the escaped title into kFilmQueryTemplate. Throws Error on an empty title.
std::string build_sparql_query(std::string_view title);

/// One film's people, aggregated over all (director, star) result rows.
struct SparqlMovieResult {
    std::set<std::string> film_titles;
    std::set<std::string> director_names;
    std::set<std::string> star_names;
    std::size_t row_count = 0;

    bool empty() const { return row_count == 0; }
    /// Several distinct labels came back; the title matched more than one film.
    bool ambiguous() const { return film_titles.size() > 1; }
    bool operator==(const SparqlMovieResult&) const = default;
};

class SparqlXmlError : public Error {
public:
    SparqlXmlError(const std::string& what, long long byte_offset)
        : Error(what + " at byte " + std::to_string(byte_offset)), offset_(byte_offset) {}
    long long byte_offset() const { return offset_; }

private:
    long long offset_;
};

/// Parses an `application/sparql-results+xml` document and aggregates rows.
/// Throws SparqlXmlError with the byte offset of malformed input.
SparqlMovieResult parse_sparql_results(std::string_view xml);

struct HttpResponse {
    int status = 0;
    std::string body;
    std::string error;  // transport-level failure, empty when a response arrived
};

/// Sends an HTTP POST with a url-encoded form body. Must be safe to call
/// from several threads at once.
class HttpPostTransport {
public:
    virtual ~HttpPostTransport() = default;
    virtual HttpResponse post_form(const std::string& url,
                                   const std::vector<std::pair<std::string, std::string>>& fields,
                                   const std::string& accept) = 0;
};

/// cpp-httplib backed transport with a per-request timeout.
class HttplibTransport : public HttpPostTransport {
public:
    explicit HttplibTransport(int timeout_seconds = 30) : timeout_seconds_(timeout_seconds) {}
    HttpResponse post_form(const std::string& url,
                           const std::vector<std::pair<std::string, std::string>>& fields,
                           const std::string& accept) override;

private:
    int timeout_seconds_;
};

enum class FetchStatus { ok, not_found, failed };

std::string to_string(FetchStatus status);

struct FetchOutcome {
    FetchStatus status = FetchStatus::failed;
    SparqlMovieResult result;
    std::string message;
};

/// Runs one film query. Transport failures and non-2xx statuses yield
/// FetchStatus::failed; an empty result set yields not_found. Malformed XML
/// propagates as SparqlXmlError.
FetchOutcome fetch_profile(std::string_view title, const std::string& endpoint, HttpPostTransport& transport);

/// Endpoint from the environment override, or kDefaultEndpoint.
std::string default_endpoint();

}  // namespace contentcf::ingest
