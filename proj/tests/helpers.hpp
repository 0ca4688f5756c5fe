#pragma once

#include <initializer_list>
#include <string>
#include <vector>

#include "oag/parse.hpp"

namespace oagtest {

inline oag::GroupSpec spec(const std::string& text) { return oag::parse_group_spec(text); }

inline oag::GroupSpec z_spec() {
    return spec("component a: dims{} default 1 discrete realize Z\n");
}

inline oag::GroupSpec q_spec() { return spec("component a: dims{} default 0 realize Q\n"); }

inline oag::GroupSpec zz_spec() {
    return spec(
        "component hi: dims{} default 1 discrete realize Z\n"
        "component lo: dims{} default 1 discrete realize Z\n");
}

inline oag::GroupSpec zqz_spec() {
    return spec(
        "component hi: dims{} default 1 discrete realize Z\n"
        "component mid: dims{} default 0 realize Q\n"
        "component lo: dims{} default 1 discrete realize Z\n");
}

inline oag::GroupElement el(const oag::GroupSpec& g, std::initializer_list<long long> coords) {
    std::vector<oag::Rational> v;
    for (long long c : coords) v.emplace_back(c);
    return oag::GroupElement(g, std::move(v));
}

}  // namespace oagtest
