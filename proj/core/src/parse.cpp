#include "oag/parse.hpp"

#include <fstream>
#include <sstream>

namespace oag {

namespace {

struct LineParser {
    const std::string& s;
    std::size_t pos = 0;
    std::size_t lineno;

    [[noreturn]] void fail(const std::string& msg) const {
        throw parse_error("line " + std::to_string(lineno) + ": " + msg, pos);
    }

    void skip_ws() {
        while (pos < s.size() && std::isspace((unsigned char)s[pos])) ++pos;
    }
    bool done() {
        skip_ws();
        return pos >= s.size();
    }
    bool eat(char c) {
        skip_ws();
        if (pos < s.size() && s[pos] == c) { ++pos; return true; }
        return false;
    }
    void expect(char c) {
        if (!eat(c)) fail(std::string("expected '") + c + "'");
    }
    std::string word() {
        skip_ws();
        std::size_t start = pos;
        while (pos < s.size() && (std::isalnum((unsigned char)s[pos]) || s[pos] == '_')) ++pos;
        if (pos == start) fail("expected a word");
        return s.substr(start, pos - start);
    }
    bool peek_word(const std::string& w) {
        std::size_t save = pos;
        skip_ws();
        bool ok = s.compare(pos, w.size(), w) == 0 &&
                  (pos + w.size() >= s.size() ||
                   !(std::isalnum((unsigned char)s[pos + w.size()]) || s[pos + w.size()] == '_'));
        if (!ok) pos = save;
        else pos += w.size();
        return ok;
    }
    long long integer() {
        skip_ws();
        std::size_t start = pos;
        while (pos < s.size() && std::isdigit((unsigned char)s[pos])) ++pos;
        if (pos == start) fail("expected a number");
        return std::stoll(s.substr(start, pos - start));
    }
    ExtNat extnat() {
        if (peek_word("inf")) return ExtNat::infinity();
        return ExtNat(integer());
    }
};

ArchComponent parse_component_body(LineParser& lp, std::string name) {
    ArchComponent c;
    c.name = std::move(name);

    if (!lp.peek_word("dims")) lp.fail("expected 'dims{...}'");
    lp.expect('{');
    std::map<long long, ExtNat> exceptions;
    if (!lp.eat('}')) {
        do {
            long long p = lp.integer();
            lp.expect(':');
            ExtNat d = lp.extnat();
            if (!is_prime(p)) lp.fail("dims key " + std::to_string(p) + " is not prime");
            if (!exceptions.emplace(p, d).second)
                lp.fail("duplicate dims entry for prime " + std::to_string(p));
        } while (lp.eat(','));
        lp.expect('}');
    }

    if (!lp.peek_word("default")) lp.fail("expected 'default <n|inf>'");
    ExtNat def = lp.extnat();
    c.dims = PrimeDimProfile(std::move(exceptions), def);

    while (!lp.done()) {
        if (lp.peek_word("discrete")) {
            c.discrete = true;
        } else if (lp.peek_word("realize")) {
            RankOneRealization r;
            if (lp.peek_word("Z_inv")) {
                lp.expect('{');
                do r.invertible.insert(lp.integer());
                while (lp.eat(','));
                lp.expect('}');
                for (long long p : r.invertible)
                    if (!is_prime(p)) lp.fail("Z_inv prime " + std::to_string(p) + " is not prime");
            } else if (lp.peek_word("Q")) {
                r.all_invertible = true;
            } else if (lp.peek_word("Z")) {
                // defaults
            } else {
                lp.fail("expected Z, Q, or Z_inv{...} after 'realize'");
            }
            c.realization = r;
        } else {
            lp.fail("unexpected trailing text");
        }
    }
    return c;
}

std::string strip_comment(const std::string& line) {
    auto h = line.find('#');
    return h == std::string::npos ? line : line.substr(0, h);
}

}  // namespace

GroupSpec parse_group_spec(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    std::vector<ArchComponent> components;
    std::optional<ArchComponent> tower;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = strip_comment(raw);
        LineParser lp{line, 0, lineno};
        if (lp.done()) continue;
        if (tower) lp.fail("omega_tower must be the last line");
        if (lp.peek_word("component")) {
            std::string name = lp.word();
            lp.expect(':');
            components.push_back(parse_component_body(lp, name));
        } else if (lp.peek_word("omega_tower")) {
            lp.expect(':');
            tower = parse_component_body(lp, "omega_tower");
        } else {
            lp.fail("expected 'component' or 'omega_tower'");
        }
    }
    try {
        return GroupSpec(std::move(components), std::move(tower));
    } catch (const domain_error& e) {
        throw parse_error(e.what(), 0);
    }
}

GroupSpec read_group_spec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw domain_error("cannot read group spec file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_group_spec(buf.str());
    } catch (const parse_error& e) {
        throw parse_error(path + ": " + e.what(), e.offset);
    }
}

std::string format_group_spec(const GroupSpec& g) {
    std::ostringstream os;
    auto emit = [&](const ArchComponent& c, bool tower) {
        os << (tower ? "omega_tower:" : "component " + c.name + ":") << " dims{";
        bool first = true;
        for (auto& [p, d] : c.dims.exceptions()) {
            if (!first) os << ",";
            first = false;
            os << p << ":" << d.str();
        }
        os << "} default " << c.dims.default_dim().str();
        if (c.discrete) os << " discrete";
        if (c.realization) os << " realize " << c.realization->str();
        os << "\n";
    };
    for (auto& c : g.components()) emit(c, false);
    if (g.omega_tower()) emit(*g.omega_tower(), true);
    return os.str();
}

}  // namespace oag
