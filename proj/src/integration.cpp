#include "modelsearch/integration.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "modelsearch/discovery.hpp"
#include "modelsearch/error.hpp"
#include "modelsearch/tokenize.hpp"

namespace modelsearch {

namespace {

struct Axes {
    std::set<std::string> header;
    std::set<std::string> first_column;
};

template <typename Rows>
Axes axes_of(const std::vector<std::string>& headers, const Rows& rows)
{
    Axes a;
    for (std::size_t j = 1; j < headers.size(); ++j) {
        for (auto& tok : normalize_token(headers[j])) {
            a.header.insert(std::move(tok));
        }
    }
    for (const auto& row : rows) {
        if (row.empty() || row[0].is_null() || row[0].is_number()) {
            continue;
        }
        for (auto& tok : normalize_token(row[0].str())) {
            a.first_column.insert(std::move(tok));
        }
    }
    return a;
}

std::int64_t shared(const std::set<std::string>& a, const std::set<std::string>& b)
{
    std::int64_t n = 0;
    for (const auto& t : a) {
        n += static_cast<std::int64_t>(b.count(t));
    }
    return n;
}

OverlapMatrix overlap(const Axes& i, const Axes& t)
{
    OverlapMatrix m;
    m << shared(i.header, t.header), shared(i.header, t.first_column), shared(i.first_column, t.header),
        shared(i.first_column, t.first_column);
    return m;
}

bool same_value(const Cell& a, const Cell& b) { return normalize_value(a.str()) == normalize_value(b.str()); }

}  // namespace

IntegratedTable IntegratedTable::from_table(const EvidenceTable& t)
{
    IntegratedTable out;
    out.headers = t.headers;
    out.rows = t.rows;
    for (const auto& row : t.rows) {
        std::vector<std::string> prov;
        prov.reserve(row.size());
        for (const auto& c : row) {
            prov.push_back(c.is_null() ? std::string{} : t.id);
        }
        out.provenance.push_back(std::move(prov));
    }
    out.sources.push_back(t.id);
    return out;
}

std::size_t IntegratedTable::null_count() const
{
    std::size_t n = 0;
    for (const auto& row : rows) {
        n += static_cast<std::size_t>(std::count_if(row.begin(), row.end(), [](const Cell& c) { return c.is_null(); }));
    }
    return n;
}

OverlapMatrix overlap_matrix(const IntegratedTable& integrated, const EvidenceTable& t)
{
    return overlap(axes_of(integrated.headers, integrated.rows), axes_of(t.headers, t.rows));
}

OverlapMatrix overlap_matrix(const EvidenceTable& a, const EvidenceTable& b)
{
    return overlap(axes_of(a.headers, a.rows), axes_of(b.headers, b.rows));
}

EvidenceTable transpose(const EvidenceTable& t)
{
    if (t.column_count() < 2) {
        throw InvalidArgument("cannot transpose table " + t.id + " with " + std::to_string(t.column_count()) +
                              " column(s)");
    }
    EvidenceTable out;
    out.id = t.id;
    out.card_ids = t.card_ids;
    out.headers.push_back(t.headers[0]);
    for (const auto& row : t.rows) {
        out.headers.push_back(row[0].str());
    }
    for (std::size_t j = 1; j < t.column_count(); ++j) {
        std::vector<Cell> row;
        row.reserve(t.row_count() + 1);
        row.push_back(Cell::parse(t.headers[j]));
        for (const auto& r : t.rows) {
            row.push_back(r[j]);
        }
        out.rows.push_back(std::move(row));
    }
    return out;
}

IntegratedTable integrate_pair(const IntegratedTable& integrated, const EvidenceTable& t, double tau)
{
    IntegratedTable out = integrated;
    const std::size_t base_cols = out.column_count();

    std::vector<ColumnProfile> left;
    for (std::size_t j = 0; j < base_cols; ++j) {
        std::vector<Cell> cells;
        for (const auto& row : out.rows) {
            cells.push_back(row[j]);
        }
        left.push_back(profile_column(out.headers[j], cells));
    }
    std::vector<ColumnProfile> right;
    for (std::size_t j = 0; j < t.column_count(); ++j) {
        right.push_back(profile_column(t, j));
    }

    constexpr std::size_t unassigned = static_cast<std::size_t>(-1);
    std::vector<std::size_t> target(right.size(), unassigned);
    std::vector<bool> left_used(left.size(), false);

    // Pass 1: equal headers, in column order.
    for (std::size_t i = 0; i < left.size(); ++i) {
        if (left[i].header.empty()) {
            continue;
        }
        for (std::size_t j = 0; j < right.size(); ++j) {
            if (target[j] == unassigned && right[j].header == left[i].header) {
                target[j] = i;
                left_used[i] = true;
                break;
            }
        }
    }
    // Pass 2: remaining pairs by value Jaccard, strongest first.
    std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < left.size(); ++i) {
        if (left_used[i]) {
            continue;
        }
        for (std::size_t j = 0; j < right.size(); ++j) {
            if (target[j] != unassigned) {
                continue;
            }
            if (auto s = alignment_strength(left[i], right[j], tau)) {
                pairs.emplace_back(*s, i, j);
            }
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
        if (std::get<0>(a) != std::get<0>(b)) {
            return std::get<0>(a) > std::get<0>(b);
        }
        return std::tie(std::get<1>(a), std::get<2>(a)) < std::tie(std::get<1>(b), std::get<2>(b));
    });
    for (const auto& [s, i, j] : pairs) {
        if (!left_used[i] && target[j] == unassigned) {
            target[j] = i;
            left_used[i] = true;
        }
    }

    // Unaligned incoming columns become new columns.
    for (std::size_t j = 0; j < right.size(); ++j) {
        if (target[j] == unassigned) {
            target[j] = out.headers.size();
            out.headers.push_back(t.headers[j]);
        }
    }
    const std::size_t width = out.headers.size();
    for (std::size_t r = 0; r < out.rows.size(); ++r) {
        out.rows[r].resize(width);
        out.provenance[r].resize(width);
    }

    for (const auto& src : t.rows) {
        std::vector<Cell> row(width);
        std::vector<std::string> prov(width);
        for (std::size_t j = 0; j < src.size(); ++j) {
            row[target[j]] = src[j];
            if (!src[j].is_null()) {
                prov[target[j]] = t.id;
            }
        }

        const auto key = row[0].is_null() ? std::string{} : normalize_value(row[0].str());
        std::size_t merge_into = out.rows.size();
        if (!key.empty()) {
            std::size_t first_compatible = out.rows.size();
            for (std::size_t r = 0; r < out.rows.size(); ++r) {
                const auto& existing = out.rows[r];
                if (existing[0].is_null() || normalize_value(existing[0].str()) != key) {
                    continue;
                }
                bool conflict = false;
                bool adds = false;
                for (std::size_t c = 0; c < width; ++c) {
                    if (row[c].is_null()) {
                        continue;
                    }
                    if (existing[c].is_null()) {
                        adds = true;
                    } else if (!same_value(existing[c], row[c])) {
                        conflict = true;
                        break;
                    }
                }
                if (conflict) {
                    continue;
                }
                if (!adds) {
                    merge_into = r;
                    break;
                }
                if (first_compatible == out.rows.size()) {
                    first_compatible = r;
                }
            }
            if (merge_into == out.rows.size()) {
                merge_into = first_compatible;
            }
        }

        if (merge_into < out.rows.size()) {
            auto& existing = out.rows[merge_into];
            for (std::size_t c = 0; c < width; ++c) {
                if (existing[c].is_null() && !row[c].is_null()) {
                    existing[c] = row[c];
                    out.provenance[merge_into][c] = prov[c];
                }
            }
        } else {
            out.rows.push_back(std::move(row));
            out.provenance.push_back(std::move(prov));
        }
    }
    out.sources.push_back(t.id);
    return out;
}

IntegratedTable integrate_all(const EvidenceTable& query_table, std::span<const EvidenceTable> retrieved, double tau)
{
    if (query_table.column_count() == 0) {
        throw InvalidArgument("query table " + query_table.id + " is empty");
    }
    auto integrated = IntegratedTable::from_table(query_table);
    for (const auto& t : retrieved) {
        if (detect_transpose(overlap_matrix(integrated, t)) && t.column_count() >= 2) {
            integrated = integrate_pair(integrated, transpose(t), tau);
            integrated.transposed.push_back(t.id);
        } else {
            integrated = integrate_pair(integrated, t, tau);
        }
    }
    return integrated;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

std::string csv_field(const std::string& s)
{
    bool quote = s.find_first_of(",\"\r\n") != std::string::npos ||
                 (!s.empty() && (s.front() == ' ' || s.back() == ' '));
    if (!quote) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += "\"\"";
        } else {
            out.push_back(c);
        }
    }
    out.push_back('"');
    return out;
}

std::string md_field(const std::string& s)
{
    std::string out;
    for (char c : s) {
        if (c == '|') {
            out += "\\|";
        } else if (c == '\n' || c == '\r') {
            out.push_back(' ');
        } else {
            out.push_back(c);
        }
    }
    return out;
}

}  // namespace

std::string to_csv(const IntegratedTable& t)
{
    std::string out;
    for (std::size_t j = 0; j < t.headers.size(); ++j) {
        out += (j ? "," : "") + csv_field(t.headers[j]);
    }
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            out += (j ? "," : "") + csv_field(row[j].str());
        }
        out += '\n';
    }
    return out;
}

std::string to_markdown(const IntegratedTable& t)
{
    std::string out = "|";
    for (const auto& h : t.headers) {
        out += " " + md_field(h) + " |";
    }
    out += "\n|";
    for (std::size_t j = 0; j < t.headers.size(); ++j) {
        out += " --- |";
    }
    out += '\n';
    for (const auto& row : t.rows) {
        out += "|";
        for (const auto& c : row) {
            out += c.is_null() ? std::string("  |") : " " + md_field(c.str()) + " |";
        }
        out += '\n';
    }
    return out;
}

json to_json(const IntegratedTable& t)
{
    json rows = json::array();
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < t.rows[r].size(); ++c) {
            const auto& cell = t.rows[r][c];
            row.push_back({{"value", to_json(cell)},
                           {"source", cell.is_null() ? json(nullptr) : json(t.provenance[r][c])}});
        }
        rows.push_back(std::move(row));
    }
    return json{{"headers", t.headers},
                {"rows", std::move(rows)},
                {"sources", t.sources},
                {"transposed", t.transposed},
                {"column_count", t.column_count()},
                {"null_count", t.null_count()}};
}

}  // namespace modelsearch
