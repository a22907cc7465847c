#include "contentcf/ingest/sparql.hpp"

#include <cstdlib>
#include <expat.h>
#include <memory>

namespace contentcf::ingest {

const std::string_view kFilmQueryTemplate = R"(SELECT ?film_title ?star_name ?nameDirector {
  {
    SELECT DISTINCT ?movies ?film_title
    WHERE {
      ?movies rdf:type <http://dbpedia.org/ontology/Film>;
      rdfs:label ?film_title.
    }
  }.
  ?movies dbpedia-owl:starring ?star;
  dbpedia-owl:director ?director.
  ?director foaf:name ?nameDirector.
  ?star foaf:name ?star_name.

  FILTER ((str(?film_title) IN ("Film Name"))
  &&(LANGMATCHES(LANG(?film_title),"en")))
}
ORDER BY ?film_title
)";

const std::string_view kFilmQueryPrefixes =
    "PREFIX rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#>\n"
    "PREFIX rdfs: <http://www.w3.org/2000/01/rdf-schema#>\n"
    "PREFIX foaf: <http://xmlns.com/foaf/0.1/>\n"
    "PREFIX dbpedia-owl: <http://dbpedia.org/ontology/>\n";

namespace {
constexpr std::string_view kPlaceholder = "\"Film Name\"";
}

std::string escape_sparql_string(std::string_view text) {
    std::string out;
    out.reserve(text.size() + 8);
    for (char ch : text) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\'': out += "\\'"; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            case '\b': out += "\\b"; break;
            case '\f': out += "\\f"; break;
            default: {
                auto c = static_cast<unsigned char>(ch);
                if (c < 0x20 || c == 0x7F)
                    throw Error("title contains control character 0x" + std::to_string(int(c)) + " with no SPARQL escape");
                out.push_back(ch);
            }
        }
    }
    return out;
}

std::string build_sparql_query(std::string_view title) {
    if (title.empty()) throw Error("cannot build a film query for an empty title");
    std::string query(kFilmQueryTemplate);
    auto pos = query.find(kPlaceholder);
    query.replace(pos, kPlaceholder.size(), "\"" + escape_sparql_string(title) + "\"");
    return query;
}

namespace {

struct ResultsParser {
    SparqlMovieResult result;
    int depth_in_result = 0;
    bool in_result = false;
    std::string binding;
    bool in_value = false;
    std::string text;
    std::string row_title;
    std::vector<std::string> row_directors;
    std::vector<std::string> row_stars;
    bool saw_root = false;

    static std::string_view local_name(const XML_Char* name) {
        std::string_view n(name);
        // Namespace-aware parser reports "uri|local".
        auto bar = n.rfind('|');
        return bar == std::string_view::npos ? n : n.substr(bar + 1);
    }

    void start(const XML_Char* name, const XML_Char** attrs) {
        auto n = local_name(name);
        if (n == "sparql") saw_root = true;
        if (n == "result") {
            in_result = true;
            row_title.clear();
            row_directors.clear();
            row_stars.clear();
        } else if (in_result && n == "binding") {
            binding.clear();
            for (auto a = attrs; a && *a; a += 2) {
                if (local_name(a[0]) == "name") binding = a[1];
            }
        } else if (in_result && (n == "literal" || n == "uri" || n == "bnode")) {
            in_value = true;
            text.clear();
        }
    }

    void end(const XML_Char* name) {
        auto n = local_name(name);
        if (in_value && (n == "literal" || n == "uri" || n == "bnode")) {
            in_value = false;
            if (binding == "film_title") row_title = text;
            else if (binding == "nameDirector") row_directors.push_back(text);
            else if (binding == "star_name") row_stars.push_back(text);
        } else if (n == "binding") {
            binding.clear();
        } else if (n == "result" && in_result) {
            in_result = false;
            ++result.row_count;
            if (!row_title.empty()) result.film_titles.insert(row_title);
            for (auto& d : row_directors) if (!d.empty()) result.director_names.insert(d);
            for (auto& s : row_stars) if (!s.empty()) result.star_names.insert(s);
        }
    }

    void chars(const XML_Char* s, int len) {
        if (in_value) text.append(s, static_cast<std::size_t>(len));
    }
};

}  // namespace

SparqlMovieResult parse_sparql_results(std::string_view xml) {
    std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)> parser(
        XML_ParserCreateNS("UTF-8", '|'), &XML_ParserFree);
    if (!parser) throw Error("cannot allocate XML parser");

    ResultsParser state;
    XML_SetUserData(parser.get(), &state);
    XML_SetElementHandler(
        parser.get(),
        [](void* ud, const XML_Char* name, const XML_Char** attrs) { static_cast<ResultsParser*>(ud)->start(name, attrs); },
        [](void* ud, const XML_Char* name) { static_cast<ResultsParser*>(ud)->end(name); });
    XML_SetCharacterDataHandler(parser.get(), [](void* ud, const XML_Char* s, int len) {
        static_cast<ResultsParser*>(ud)->chars(s, len);
    });

    if (XML_Parse(parser.get(), xml.data(), static_cast<int>(xml.size()), XML_TRUE) == XML_STATUS_ERROR) {
        throw SparqlXmlError(std::string("malformed SPARQL XML: ") + XML_ErrorString(XML_GetErrorCode(parser.get())),
                             static_cast<long long>(XML_GetCurrentByteIndex(parser.get())));
    }
    if (!state.saw_root) throw SparqlXmlError("document is not a SPARQL results document", 0);
    return state.result;
}

std::string to_string(FetchStatus status) {
    switch (status) {
        case FetchStatus::ok: return "fetched-ok";
        case FetchStatus::not_found: return "not-found";
        case FetchStatus::failed: return "fetch-failed";
    }
    return "fetch-failed";
}

FetchOutcome fetch_profile(std::string_view title, const std::string& endpoint, HttpPostTransport& transport) {
    std::string query = std::string(kFilmQueryPrefixes) + build_sparql_query(title);
    HttpResponse resp = transport.post_form(endpoint, {{"query", query}}, "application/sparql-results+xml");

    FetchOutcome out;
    if (!resp.error.empty()) {
        out.status = FetchStatus::failed;
        out.message = resp.error;
        return out;
    }
    if (resp.status < 200 || resp.status >= 300) {
        out.status = FetchStatus::failed;
        out.message = "HTTP status " + std::to_string(resp.status);
        return out;
    }
    out.result = parse_sparql_results(resp.body);
    out.status = out.result.empty() ? FetchStatus::not_found : FetchStatus::ok;
    return out;
}

std::string default_endpoint() {
    if (const char* env = std::getenv(std::string(kEndpointEnvVar).c_str()); env && *env) return env;
    return std::string(kDefaultEndpoint);
}

}  // namespace contentcf::ingest
