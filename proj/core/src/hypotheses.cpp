#include "bfvar/hypotheses.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>

#include "bfvar/errors.hpp"
#include "bfvar/specfun.hpp"

namespace bfvar {

namespace {

class Parser {
public:
    explicit Parser(std::string_view text) : s_(text) {}

    // Each term is a list of blocks; each block a list of 1-based indices with their positions.
    using Block = std::vector<std::pair<std::size_t, std::size_t>>;
    using Term = std::vector<Block>;

    void parse(std::vector<Term>& terms, std::vector<char>& ops) {
        terms.push_back(term());
        while (true) {
            skip();
            if (pos_ >= s_.size()) break;
            const char c = s_[pos_];
            if (c != '<' && c != '>') fail("unexpected '" + std::string(1, c) + "'");
            ++pos_;
            ops.push_back(c);
            terms.push_back(term());
        }
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    char peek() {
        skip();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }

    Term term() {
        Term t = item();
        while (peek() == ',') {
            ++pos_;
            Term more = item();
            t.insert(t.end(), more.begin(), more.end());
        }
        return t;
    }

    Term item() {
        if (peek() == '(') {
            ++pos_;
            Term t = term();
            if (peek() != ')') fail("expected ')'");
            ++pos_;
            return t;
        }
        return Term{atom()};
    }

    Block atom() {
        Block b{index()};
        while (peek() == '=') {
            ++pos_;
            b.push_back(index());
        }
        return b;
    }

    std::pair<std::size_t, std::size_t> index() {
        const char c = peek();
        if (pos_ >= s_.size()) fail("unexpected end of input, expected a group index");
        if (!std::isdigit(static_cast<unsigned char>(c))) fail("unexpected '" + std::string(1, c) + "', expected a group index");
        const std::size_t start = pos_;
        std::size_t v = 0;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
            v = v * 10 + static_cast<std::size_t>(s_[pos_] - '0');
            if (v > 1000000) fail("group index too large");
            ++pos_;
        }
        return {v, start};
    }
};

void canonicalize(HypothesisSpec& spec) {
    for (auto& b : spec.blocks) std::sort(b.begin(), b.end());
    std::vector<std::size_t> perm(spec.blocks.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) { return spec.blocks[a][0] < spec.blocks[b][0]; });
    std::vector<std::size_t> where(perm.size());
    std::vector<std::vector<std::size_t>> blocks(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
        where[perm[i]] = i;
        blocks[i] = std::move(spec.blocks[perm[i]]);
    }
    spec.blocks = std::move(blocks);
    for (auto& [g, l] : spec.order) {
        g = where[g];
        l = where[l];
    }
    std::sort(spec.order.begin(), spec.order.end());
    spec.order.erase(std::unique(spec.order.begin(), spec.order.end()), spec.order.end());
}

// Depth of each block in the order: 0 for blocks nothing is greater than.
std::vector<std::size_t> layers(const HypothesisSpec& spec) {
    const std::size_t m = spec.blocks.size();
    std::vector<std::size_t> depth(m, 0);
    for (std::size_t round = 0; round < m; ++round) {
        bool changed = false;
        for (auto [g, l] : spec.order) {
            if (depth[l] < depth[g] + 1) {
                depth[l] = depth[g] + 1;
                changed = true;
            }
        }
        if (!changed) return depth;
    }
    throw DomainError("hypothesis order is cyclic");
}

std::string block_text(const std::vector<std::size_t>& b) {
    std::string out;
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (i) out += '=';
        out += std::to_string(b[i] + 1);
    }
    return out;
}

std::string term_text(const HypothesisSpec& spec, const std::vector<std::size_t>& members, bool parens) {
    std::string out;
    if (parens && members.size() > 1) out += '(';
    for (std::size_t j = 0; j < members.size(); ++j) {
        if (j) out += ',';
        out += block_text(spec.blocks[members[j]]);
    }
    if (parens && members.size() > 1) out += ')';
    return out;
}

// Writes the order as a chain of terms with mixed '<' and '>'. Blocks with the same
// neighbours form one term; the terms must link up as a path.
std::optional<std::string> chain_text(const HypothesisSpec& spec) {
    const std::size_t m = spec.blocks.size();
    std::vector<std::vector<std::size_t>> nbr(m);
    for (auto [g, l] : spec.order) {
        nbr[g].push_back(l);
        nbr[l].push_back(g);
    }
    std::map<std::vector<std::size_t>, std::vector<std::size_t>> by_nbr;
    for (std::size_t i = 0; i < m; ++i) {
        std::sort(nbr[i].begin(), nbr[i].end());
        nbr[i].erase(std::unique(nbr[i].begin(), nbr[i].end()), nbr[i].end());
        if (nbr[i].empty()) return std::nullopt;
        by_nbr[nbr[i]].push_back(i);
    }
    std::vector<std::vector<std::size_t>> terms;
    std::vector<std::size_t> term_of(m);
    for (auto& [key, members] : by_nbr) {
        for (std::size_t b : members) term_of[b] = terms.size();
        terms.push_back(members);
    }
    const std::size_t t = terms.size();
    std::vector<std::set<std::size_t>> adj(t);
    for (auto [g, l] : spec.order) {
        adj[term_of[g]].insert(term_of[l]);
        adj[term_of[l]].insert(term_of[g]);
    }
    std::vector<std::size_t> ends;
    for (std::size_t i = 0; i < t; ++i) {
        if (adj[i].size() > 2 || adj[i].count(i)) return std::nullopt;
        if (adj[i].size() == 1) ends.push_back(i);
    }
    if (ends.size() != 2) return std::nullopt;
    auto walk = [&](std::size_t start) {
        std::vector<std::size_t> path{start};
        std::size_t prev = t, cur = start;
        while (true) {
            std::size_t next = t;
            for (std::size_t n : adj[cur])
                if (n != prev) next = n;
            if (next == t) break;
            path.push_back(next);
            prev = cur;
            cur = next;
        }
        return path;
    };
    auto greater = [&](std::size_t a, std::size_t b) {
        return std::binary_search(spec.order.begin(), spec.order.end(), std::pair{terms[a][0], terms[b][0]});
    };
    auto first_gt = [&](std::size_t end) { return greater(end, *adj[end].begin()); };
    std::size_t start = ends[0];
    if (first_gt(ends[1]) && !first_gt(ends[0])) start = ends[1];
    else if (first_gt(ends[0]) == first_gt(ends[1]) && terms[ends[1]][0] < terms[ends[0]][0]) start = ends[1];
    const auto path = walk(start);
    if (path.size() != t) return std::nullopt;
    std::string out = term_text(spec, terms[path[0]], true);
    for (std::size_t i = 1; i < path.size(); ++i) {
        out += greater(path[i - 1], path[i]) ? '>' : '<';
        out += term_text(spec, terms[path[i]], true);
    }
    return out;
}

}  // namespace

void validate(const HypothesisSpec& spec) {
    if (spec.k == 0) throw DomainError("hypothesis needs at least one group");
    std::vector<int> seen(spec.k, 0);
    for (const auto& b : spec.blocks) {
        if (b.empty()) throw DomainError("hypothesis contains an empty block");
        for (std::size_t g : b) {
            if (g >= spec.k) throw DomainError("group index " + std::to_string(g + 1) + " is out of range 1.." + std::to_string(spec.k));
            if (seen[g]++) throw DomainError("group index " + std::to_string(g + 1) + " appears more than once");
        }
    }
    for (std::size_t g = 0; g < spec.k; ++g)
        if (!seen[g]) throw DomainError("group index " + std::to_string(g + 1) + " is missing from the hypothesis");
    for (auto [g, l] : spec.order) {
        if (g >= spec.blocks.size() || l >= spec.blocks.size()) throw DomainError("order refers to an unknown block");
        if (g == l) throw DomainError("hypothesis order is cyclic");
    }
    layers(spec);
}

HypothesisSpec parse_hypothesis(std::string_view text, std::size_t k) {
    if (k == 0) throw DomainError("group count must be positive");
    std::vector<Parser::Term> terms;
    std::vector<char> ops;
    {
        std::size_t i = 0;
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i == text.size()) throw ParseError("empty hypothesis", 0);
    }
    Parser(text).parse(terms, ops);

    HypothesisSpec spec;
    spec.k = k;
    std::vector<std::size_t> term_first_block;
    for (const auto& t : terms) {
        term_first_block.push_back(spec.blocks.size());
        for (const auto& b : t) {
            std::vector<std::size_t> block;
            for (auto [idx, at] : b) {
                if (idx < 1 || idx > k)
                    throw DomainError("group index " + std::to_string(idx) + " at position " + std::to_string(at) +
                                      " is out of range 1.." + std::to_string(k));
                block.push_back(idx - 1);
            }
            spec.blocks.push_back(std::move(block));
        }
    }
    term_first_block.push_back(spec.blocks.size());
    for (std::size_t t = 0; t < ops.size(); ++t) {
        for (std::size_t a = term_first_block[t]; a < term_first_block[t + 1]; ++a)
            for (std::size_t b = term_first_block[t + 1]; b < term_first_block[t + 2]; ++b)
                spec.order.push_back(ops[t] == '>' ? std::pair{a, b} : std::pair{b, a});
    }
    validate(spec);
    canonicalize(spec);
    return spec;
}

std::string to_string(const HypothesisSpec& spec) {
    validate(spec);
    const std::size_t m = spec.blocks.size();
    if (spec.order.empty()) {
        std::vector<std::size_t> all(m);
        for (std::size_t i = 0; i < m; ++i) all[i] = i;
        return term_text(spec, all, false);
    }
    std::string out;
    const auto depth = layers(spec);
    const std::size_t levels = *std::max_element(depth.begin(), depth.end()) + 1;
    for (std::size_t d = 0; d < levels; ++d) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < m; ++i)
            if (depth[i] == d) members.push_back(i);
        if (d) out += '>';
        out += term_text(spec, members, true);
    }
    if (parse_hypothesis(out, spec.k) == spec) return out;
    if (auto chain = chain_text(spec); chain && parse_hypothesis(*chain, spec.k) == spec) return *chain;
    throw DomainError("hypothesis order cannot be written in the hypothesis grammar");
}

HypothesisSpec unconstrained_spec(std::size_t k) {
    HypothesisSpec s;
    s.k = k;
    for (std::size_t i = 0; i < k; ++i) s.blocks.push_back({i});
    return s;
}

HypothesisSpec null_spec(std::size_t k) {
    HypothesisSpec s;
    s.k = k;
    s.blocks.emplace_back();
    for (std::size_t i = 0; i < k; ++i) s.blocks[0].push_back(i);
    return s;
}

bool satisfies_order(std::span<const double> rho, const HypothesisSpec& spec) {
    if (rho.size() != spec.k)
        throw DomainError("rho has length " + std::to_string(rho.size()) + " but the hypothesis has " +
                          std::to_string(spec.k) + " groups");
    for (auto [g, l] : spec.order)
        for (std::size_t i : spec.blocks[g])
            for (std::size_t j : spec.blocks[l])
                if (!(rho[i] > rho[j])) return false;
    return true;
}

Collapsed collapse(const std::vector<GroupStats>& stats, const HypothesisSpec& spec) {
    validate(spec);
    if (stats.size() != spec.k)
        throw DomainError("got " + std::to_string(stats.size()) + " groups for a hypothesis over " + std::to_string(spec.k));
    Collapsed out;
    out.spec.k = spec.blocks.size();
    for (std::size_t b = 0; b < spec.blocks.size(); ++b) {
        GroupStats pooled{0, 0.0, 0};
        for (std::size_t g : spec.blocks[b]) {
            pooled.n += stats[g].n;
            pooled.ss += stats[g].ss;
            pooled.members += stats[g].members;
        }
        out.stats.push_back(pooled);
        out.spec.blocks.push_back({b});
    }
    out.spec.order = spec.order;
    return out;
}

double log_prior_order_fraction(const HypothesisSpec& spec) {
    validate(spec);
    const std::size_t m = spec.blocks.size();
    if (spec.order.empty()) return 0.0;
    if (m > 24) throw DomainError("exact order fraction supports at most 24 blocks");
    std::vector<std::uint32_t> greater(m, 0);
    for (auto [g, l] : spec.order) greater[l] |= (1u << g);
    // dp[mask]: ways to arrange the blocks of mask as the top |mask| positions
    std::vector<double> dp(std::size_t{1} << m, 0.0);
    dp[0] = 1.0;
    for (std::uint32_t mask = 0; mask < dp.size(); ++mask) {
        if (dp[mask] == 0.0) continue;
        for (std::size_t e = 0; e < m; ++e) {
            const std::uint32_t bit = 1u << e;
            if ((mask & bit) || (greater[e] & ~mask)) continue;
            dp[mask | bit] += dp[mask];
        }
    }
    return std::log(dp.back()) - specfun::log_gamma(static_cast<double>(m) + 1.0);
}

std::string partition_key(const HypothesisSpec& spec) {
    std::string out;
    for (std::size_t i = 0; i < spec.blocks.size(); ++i) {
        if (i) out += '|';
        out += block_text(spec.blocks[i]);
    }
    return out;
}

}  // namespace bfvar
