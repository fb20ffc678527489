#include "modelsearch/discovery.hpp"

#include <algorithm>

#include "modelsearch/error.hpp"
#include "modelsearch/tokenize.hpp"

namespace modelsearch {

std::string to_string(Operator op)
{
    switch (op) {
    case Operator::keyword: return "keyword";
    case Operator::joinable: return "joinable";
    case Operator::unionable: return "unionable";
    }
    return "?";
}

Operator parse_operator(std::string_view s)
{
    if (s == "keyword") return Operator::keyword;
    if (s == "joinable") return Operator::joinable;
    if (s == "unionable") return Operator::unionable;
    throw InvalidArgument("unknown discovery operator '" + std::string(s) + "'");
}

ColumnProfile profile_column(std::string_view header, std::span<const Cell> cells)
{
    ColumnProfile p;
    p.header = normalize_value(header);
    bool any = false;
    bool all_numeric = true;
    for (const auto& c : cells) {
        if (c.is_null()) {
            continue;
        }
        any = true;
        all_numeric = all_numeric && c.is_number();
        auto v = normalize_value(c.str());
        if (!v.empty()) {
            p.values.insert(std::move(v));
        }
    }
    p.numeric_only = any && all_numeric;
    return p;
}

ColumnProfile profile_column(const EvidenceTable& t, std::size_t j)
{
    auto cells = t.column(j);
    return profile_column(t.headers.at(j), cells);
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b)
{
    if (a.empty() && b.empty()) {
        return 0.0;
    }
    std::size_t inter = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) {
            ++ia;
        } else if (*ib < *ia) {
            ++ib;
        } else {
            ++inter;
            ++ia;
            ++ib;
        }
    }
    return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

std::optional<double> alignment_strength(const ColumnProfile& a, const ColumnProfile& b, double tau)
{
    const bool value_comparable = !a.values.empty() && !b.values.empty() && !a.numeric_only && !b.numeric_only;
    const double jac = value_comparable ? jaccard(a.values, b.values) : 0.0;
    if (!a.header.empty() && a.header == b.header) {
        return 2.0 + jac;
    }
    if (value_comparable && jac >= tau) {
        return jac;
    }
    return std::nullopt;
}

std::size_t max_bipartite_matching(const std::vector<std::vector<std::size_t>>& adj, std::size_t right_count)
{
    // Kuhn's augmenting-path algorithm; graphs here are at most ~100 x 100.
    constexpr std::size_t none = static_cast<std::size_t>(-1);
    std::vector<std::size_t> match_right(right_count, none);
    std::vector<char> visited;

    auto augment = [&](auto&& self, std::size_t u) -> bool {
        for (auto v : adj[u]) {
            if (visited[v]) {
                continue;
            }
            visited[v] = 1;
            if (match_right[v] == none || self(self, match_right[v])) {
                match_right[v] = u;
                return true;
            }
        }
        return false;
    };

    std::size_t matched = 0;
    for (std::size_t u = 0; u < adj.size(); ++u) {
        visited.assign(right_count, 0);
        if (augment(augment, u)) {
            ++matched;
        }
    }
    return matched;
}

// ---------------------------------------------------------------------------

DiscoveryIndex::DiscoveryIndex(std::span<const EvidenceTable> tables, DiscoveryConfig config) : config_(config)
{
    profiles_.reserve(tables.size());
    for (const auto& t : tables) {
        TableProfile p;
        p.id = t.id;
        for (const auto& h : t.headers) {
            for (auto& tok : normalize_token(h)) {
                ++p.token_counts[tok];
            }
        }
        for (const auto& row : t.rows) {
            for (const auto& c : row) {
                for (auto& tok : normalize_token(c.str())) {
                    ++p.token_counts[tok];
                }
            }
        }
        for (std::size_t j = 0; j < t.column_count(); ++j) {
            p.columns.push_back(profile_column(t, j));
        }
        profiles_.push_back(std::move(p));
    }
}

std::vector<ScoredTable> DiscoveryIndex::rank(std::vector<ScoredTable> scored, std::size_t k) const
{
    std::sort(scored.begin(), scored.end(), [](const ScoredTable& a, const ScoredTable& b) {
        if (a.score != b.score) {
            return a.score > b.score;
        }
        return a.table_id < b.table_id;
    });
    if (scored.size() > k) {
        scored.resize(k);
    }
    return scored;
}

std::vector<std::string> DiscoveryIndex::keyword_query(const EvidenceTable& anchor)
{
    std::set<std::string> q;
    for (const auto& h : anchor.headers) {
        for (auto& tok : normalize_token(h)) {
            q.insert(std::move(tok));
        }
    }
    if (anchor.column_count() > 0) {
        for (const auto& row : anchor.rows) {
            for (auto& tok : normalize_token(row[0].str())) {
                q.insert(std::move(tok));
            }
        }
    }
    return {q.begin(), q.end()};
}

DiscoveryResult DiscoveryIndex::keyword_search(const EvidenceTable& anchor, std::size_t k) const
{
    DiscoveryResult out;
    auto query = keyword_query(anchor);
    if (query.empty()) {
        out.degenerate_query = true;
        return out;
    }
    std::vector<ScoredTable> scored;
    for (const auto& p : profiles_) {
        if (p.id == anchor.id) {
            continue;
        }
        std::size_t hits = 0;
        for (const auto& tok : query) {
            if (auto it = p.token_counts.find(tok); it != p.token_counts.end()) {
                hits += it->second;
            }
        }
        if (hits > 0) {
            scored.push_back({p.id, static_cast<double>(hits), Operator::keyword});
        }
    }
    out.tables = rank(std::move(scored), k);
    return out;
}

DiscoveryResult DiscoveryIndex::joinable_search(const EvidenceTable& anchor, std::size_t k) const
{
    DiscoveryResult out;
    if (anchor.column_count() == 0 || anchor.row_count() == 0) {
        out.degenerate_query = true;
        return out;
    }
    auto key = profile_column(anchor, 0);
    if (key.numeric_only || key.values.empty()) {
        out.degenerate_query = true;
        return out;
    }
    std::vector<ScoredTable> scored;
    for (const auto& p : profiles_) {
        if (p.id == anchor.id) {
            continue;
        }
        std::size_t best = 0;
        for (const auto& col : p.columns) {
            if (col.numeric_only) {
                continue;
            }
            std::size_t overlap = 0;
            for (const auto& v : key.values) {
                overlap += col.values.count(v);
            }
            best = std::max(best, overlap);
        }
        if (best >= 1) {
            scored.push_back({p.id, static_cast<double>(best), Operator::joinable});
        }
    }
    out.tables = rank(std::move(scored), k);
    return out;
}

std::size_t DiscoveryIndex::unionable_score(const std::vector<ColumnProfile>& anchor_cols, std::size_t candidate) const
{
    const auto& cand = profiles_.at(candidate).columns;
    std::vector<std::vector<std::size_t>> adj(anchor_cols.size());
    for (std::size_t i = 0; i < anchor_cols.size(); ++i) {
        for (std::size_t j = 0; j < cand.size(); ++j) {
            if (alignment_strength(anchor_cols[i], cand[j], config_.tau)) {
                adj[i].push_back(j);
            }
        }
    }
    return max_bipartite_matching(adj, cand.size());
}

DiscoveryResult DiscoveryIndex::unionable_search(const EvidenceTable& anchor, std::size_t k) const
{
    DiscoveryResult out;
    std::vector<ColumnProfile> anchor_cols;
    for (std::size_t j = 0; j < anchor.column_count(); ++j) {
        anchor_cols.push_back(profile_column(anchor, j));
    }
    if (anchor_cols.empty()) {
        out.degenerate_query = true;
        return out;
    }
    std::vector<ScoredTable> scored;
    for (std::size_t c = 0; c < profiles_.size(); ++c) {
        if (profiles_[c].id == anchor.id) {
            continue;
        }
        auto s = unionable_score(anchor_cols, c);
        if (s >= 1) {
            scored.push_back({profiles_[c].id, static_cast<double>(s), Operator::unionable});
        }
    }
    out.tables = rank(std::move(scored), k);
    return out;
}

DiscoveryResult DiscoveryIndex::search(Operator op, const EvidenceTable& anchor, std::size_t k) const
{
    switch (op) {
    case Operator::keyword: return keyword_search(anchor, k);
    case Operator::joinable: return joinable_search(anchor, k);
    case Operator::unionable: return unionable_search(anchor, k);
    }
    return {};
}

DiscoveryResult keyword_search(const EvidenceTable& anchor, std::span<const EvidenceTable> lake, std::size_t k)
{
    return DiscoveryIndex(lake).keyword_search(anchor, k);
}

DiscoveryResult joinable_search(const EvidenceTable& anchor, std::span<const EvidenceTable> lake, std::size_t k)
{
    return DiscoveryIndex(lake).joinable_search(anchor, k);
}

DiscoveryResult unionable_search(const EvidenceTable& anchor, std::span<const EvidenceTable> lake, std::size_t k,
                                 DiscoveryConfig config)
{
    return DiscoveryIndex(lake, config).unionable_search(anchor, k);
}

}  // namespace modelsearch
