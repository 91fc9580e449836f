#pragma once

#include "kg/graph.hpp"

#include <string>

namespace kg::detail {

struct ParsedUrl {
    std::string base; // scheme://host[:port]
    std::string path; // leading '/', "" when absent
};

inline ParsedUrl parse_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error("bad URL (missing scheme): " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, ""};
    return {url.substr(0, path_start), url.substr(path_start)};
}

} // namespace kg::detail
