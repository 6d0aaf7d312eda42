#include "bmg/functions.hpp"

#include <cstdio>
#include <vector>

namespace bmg {
namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        const size_t pos = s.find(sep, start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

double num(const std::string& tok, const std::string& spec) {
    try {
        size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos == tok.size()) return v;
    } catch (...) {
    }
    throw GraphError("bad function spec '" + spec + "'");
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

}  // namespace

GraphFunction constant_fn(double v) { return {GraphFunction::Constant, v, 0, 0, ""}; }

GraphFunction bump_fn(std::string edge_id, double center, double width) {
    if (!(width > 0)) throw GraphError("bump width must be positive");
    return {GraphFunction::Bump, center, width, 0, std::move(edge_id)};
}

GraphFunction indicator_fn(std::string edge_id, double lo, double hi, double ramp) {
    if (!(ramp > 0) || !(hi > lo)) throw GraphError("bad indicator parameters");
    return {GraphFunction::Indicator, lo, hi, ramp, std::move(edge_id)};
}

GraphFunction parse_function(const std::string& spec) {
    const auto parts = split(spec, ':');
    if (parts[0] == "const" && parts.size() == 2)
        return constant_fn(num(parts[1], spec));
    if (parts[0] == "bump" && parts.size() == 4)
        return bump_fn(parts[1], num(parts[2], spec), num(parts[3], spec));
    if (parts[0] == "ind" && parts.size() == 5)
        return indicator_fn(parts[1], num(parts[2], spec), num(parts[3], spec),
                            num(parts[4], spec));
    throw GraphError("bad function spec '" + spec + "'");
}

std::string GraphFunction::describe() const {
    switch (type) {
        case Constant:
            return "const:" + fmt(p0);
        case Bump:
            return "bump:" + edge_id + ":" + fmt(p0) + ":" + fmt(p1);
        case Indicator:
            return "ind:" + edge_id + ":" + fmt(p0) + ":" + fmt(p1) + ":" + fmt(p2);
    }
    return "?";
}

}  // namespace bmg
