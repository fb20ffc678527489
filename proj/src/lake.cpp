#include "modelsearch/lake.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "modelsearch/error.hpp"

namespace modelsearch {

namespace {

std::string_view trim(std::string_view s)
{
    constexpr std::string_view ws = " \t\r\n\v\f";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) {
        return {};
    }
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::vector<std::string> string_list(const json& j, const char* field)
{
    std::vector<std::string> out;
    if (!j.contains(field) || j.at(field).is_null()) {
        return out;
    }
    for (const auto& v : j.at(field)) {
        out.push_back(v.get<std::string>());
    }
    return out;
}

}  // namespace

std::optional<double> parse_numeric(std::string_view raw)
{
    auto s = trim(raw);
    std::size_t i = 0;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
        ++i;
    }
    auto int_begin = i;
    while (i < s.size() && is_digit(s[i])) {
        ++i;
    }
    if (i == int_begin) {
        return std::nullopt;
    }
    if (i < s.size() && s[i] == '.') {
        auto frac_begin = ++i;
        while (i < s.size() && is_digit(s[i])) {
            ++i;
        }
        if (i == frac_begin) {
            return std::nullopt;
        }
    }
    auto number_end = i;
    if (i < s.size() && s[i] == '%') {
        ++i;
    }
    if (i != s.size()) {
        return std::nullopt;
    }
    // from_chars rejects a leading '+'.
    auto digits = s.substr(0, number_end);
    if (digits.front() == '+') {
        digits.remove_prefix(1);
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc{}) {
        return std::nullopt;
    }
    return value;
}

Cell Cell::text(std::string s)
{
    Cell c;
    c.kind_ = Kind::text;
    c.text_ = std::move(s);
    return c;
}

Cell Cell::number(double value, std::string text)
{
    Cell c;
    c.kind_ = Kind::number;
    c.text_ = std::move(text);
    c.value_ = value;
    return c;
}

Cell Cell::parse(std::string_view raw)
{
    auto s = trim(raw);
    if (s.empty()) {
        return null();
    }
    if (auto v = parse_numeric(s)) {
        return number(*v, std::string(s));
    }
    return text(std::string(s));
}

std::vector<Cell> EvidenceTable::column(std::size_t j) const
{
    std::vector<Cell> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        out.push_back(row.at(j));
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON records

json to_json(const Cell& cell)
{
    if (cell.is_null()) {
        return nullptr;
    }
    if (cell.is_number()) {
        json as_number = cell.value();
        if (as_number.dump() == cell.str()) {
            return as_number;
        }
    }
    return cell.str();
}

Cell cell_from_json(const json& j)
{
    if (j.is_null()) {
        return Cell::null();
    }
    if (j.is_string()) {
        return Cell::parse(j.get<std::string>());
    }
    if (j.is_number()) {
        return Cell::number(j.get<double>(), j.dump());
    }
    throw IngestError("cell must be string, number or null, got " + j.dump());
}

json to_json(const ModelCard& card)
{
    return json{{"id", card.id}, {"text", card.text}, {"tags", card.tags}, {"table_ids", card.table_ids}};
}

json to_json(const EvidenceTable& table)
{
    json rows = json::array();
    for (const auto& row : table.rows) {
        json r = json::array();
        for (const auto& c : row) {
            r.push_back(to_json(c));
        }
        rows.push_back(std::move(r));
    }
    return json{{"id", table.id}, {"headers", table.headers}, {"rows", std::move(rows)}, {"card_ids", table.card_ids}};
}

ModelCard card_from_json(const json& j)
{
    ModelCard card;
    card.id = j.at("id").get<std::string>();
    card.text = j.value("text", std::string{});
    card.tags = string_list(j, "tags");
    card.table_ids = string_list(j, "table_ids");
    if (card.id.empty()) {
        throw IngestError("card id must be non-empty");
    }
    return card;
}

EvidenceTable table_from_json(const json& j)
{
    EvidenceTable t;
    t.id = j.at("id").get<std::string>();
    if (t.id.empty()) {
        throw IngestError("table id must be non-empty");
    }
    t.headers = string_list(j, "headers");
    if (t.headers.empty()) {
        throw IngestError("table " + t.id + ": at least one header required");
    }
    for (const auto& r : j.at("rows")) {
        if (r.size() != t.headers.size()) {
            throw IngestError("table " + t.id + ": ragged row with " + std::to_string(r.size()) + " cells under " +
                              std::to_string(t.headers.size()) + " headers");
        }
        std::vector<Cell> row;
        row.reserve(r.size());
        for (const auto& c : r) {
            row.push_back(cell_from_json(c));
        }
        t.rows.push_back(std::move(row));
    }
    t.card_ids = string_list(j, "card_ids");
    if (t.card_ids.empty()) {
        throw IngestError("table " + t.id + ": card_ids must be non-empty");
    }
    return t;
}

std::vector<ModelCard> read_cards(std::istream& in)
{
    std::vector<ModelCard> cards;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) {
            continue;
        }
        ModelCard card;
        try {
            card = card_from_json(json::parse(line));
        } catch (const std::exception& e) {
            throw IngestError("card file line " + std::to_string(lineno) + ": malformed record: " + e.what());
        }
        if (!seen.insert(card.id).second) {
            throw IngestError("duplicate card id '" + card.id + "' at line " + std::to_string(lineno));
        }
        cards.push_back(std::move(card));
    }
    return cards;
}

std::vector<EvidenceTable> read_tables(std::istream& in)
{
    std::vector<EvidenceTable> tables;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) {
            continue;
        }
        json j;
        try {
            j = json::parse(line);
        } catch (const std::exception& e) {
            throw IngestError("table file line " + std::to_string(lineno) + ": malformed record: " + e.what());
        }
        EvidenceTable t;
        try {
            t = table_from_json(j);
        } catch (const IngestError&) {
            throw;
        } catch (const std::exception& e) {
            throw IngestError("table file line " + std::to_string(lineno) + ": malformed record: " + e.what());
        }
        if (!seen.insert(t.id).second) {
            throw IngestError("duplicate table id '" + t.id + "' at line " + std::to_string(lineno));
        }
        tables.push_back(std::move(t));
    }
    return tables;
}

std::vector<ModelCard> ingest_cards(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IngestError("cannot open card file " + path.string());
    }
    return read_cards(in);
}

std::vector<EvidenceTable> ingest_tables(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IngestError("cannot open table file " + path.string());
    }
    return read_tables(in);
}

void write_cards(std::ostream& out, std::span<const ModelCard> cards)
{
    for (const auto& c : cards) {
        out << to_json(c).dump() << '\n';
    }
}

void write_tables(std::ostream& out, std::span<const EvidenceTable> tables)
{
    for (const auto& t : tables) {
        out << to_json(t).dump() << '\n';
    }
}

// ---------------------------------------------------------------------------
// Lake assembly

ModelLake ModelLake::assemble(std::vector<ModelCard> cards, std::vector<EvidenceTable> tables,
                              std::vector<std::string>* warnings)
{
    auto warn = [&](std::string msg) {
        if (warnings) {
            warnings->push_back(std::move(msg));
        }
    };

    ModelLake lake;
    for (std::size_t i = 0; i < cards.size(); ++i) {
        if (cards[i].id.empty()) {
            throw IngestError("card id must be non-empty");
        }
        if (!lake.card_pos_.emplace(cards[i].id, i).second) {
            throw IngestError("duplicate card id '" + cards[i].id + "'");
        }
    }

    std::unordered_set<std::string> table_ids;
    for (const auto& t : tables) {
        if (!table_ids.insert(t.id).second) {
            throw IngestError("duplicate table id '" + t.id + "'");
        }
    }

    for (auto& t : tables) {
        std::vector<std::string> kept;
        for (auto& cid : t.card_ids) {
            if (lake.card_pos_.count(cid)) {
                kept.push_back(std::move(cid));
            } else {
                warn("table " + t.id + ": dropped link to unknown card " + cid);
            }
        }
        t.card_ids = std::move(kept);
        if (t.card_ids.empty()) {
            warn("table " + t.id + ": dropped, no card links remain");
            continue;
        }
        lake.table_pos_.emplace(t.id, lake.tables_.size());
        lake.tables_.push_back(std::move(t));
    }

    for (auto& c : cards) {
        std::vector<std::string> kept;
        for (auto& tid : c.table_ids) {
            if (lake.table_pos_.count(tid)) {
                kept.push_back(std::move(tid));
            } else {
                warn("card " + c.id + ": dropped dangling link to table " + tid);
            }
        }
        c.table_ids = std::move(kept);
    }
    lake.cards_ = std::move(cards);
    return lake;
}

const ModelCard* ModelLake::find_card(std::string_view id) const
{
    auto it = card_pos_.find(std::string(id));
    return it == card_pos_.end() ? nullptr : &cards_[it->second];
}

const EvidenceTable* ModelLake::find_table(std::string_view id) const
{
    auto it = table_pos_.find(std::string(id));
    return it == table_pos_.end() ? nullptr : &tables_[it->second];
}

const ModelCard& ModelLake::card(std::string_view id) const
{
    if (auto* c = find_card(id)) {
        return *c;
    }
    throw NotFound("unknown card '" + std::string(id) + "'");
}

const EvidenceTable& ModelLake::table(std::string_view id) const
{
    if (auto* t = find_table(id)) {
        return *t;
    }
    throw NotFound("unknown table '" + std::string(id) + "'");
}

std::size_t ModelLake::card_index(std::string_view id) const
{
    auto it = card_pos_.find(std::string(id));
    if (it == card_pos_.end()) {
        throw NotFound("unknown card '" + std::string(id) + "'");
    }
    return it->second;
}

std::vector<const EvidenceTable*> ModelLake::tables_of(const ModelCard& card) const
{
    std::vector<const EvidenceTable*> out;
    for (const auto& tid : card.table_ids) {
        if (auto* t = find_table(tid)) {
            out.push_back(t);
        }
    }
    return out;
}

std::vector<EvidenceTable> filter_compact(std::span<const EvidenceTable> lake)
{
    std::vector<EvidenceTable> out;
    std::copy_if(lake.begin(), lake.end(), std::back_inserter(out), [](const EvidenceTable& t) {
        return t.row_count() < kCompactRowLimit && t.column_count() < kCompactColumnLimit;
    });
    return out;
}

// ---------------------------------------------------------------------------
// Markdown pipe tables

namespace {

std::vector<std::string> split_pipe_row(std::string_view line)
{
    auto s = trim(line);
    if (!s.empty() && s.front() == '|') {
        s.remove_prefix(1);
    }
    if (!s.empty() && s.back() == '|' && !(s.size() >= 2 && s[s.size() - 2] == '\\')) {
        s.remove_suffix(1);
    }
    std::vector<std::string> cells;
    std::string cur;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && i + 1 < s.size() && s[i + 1] == '|') {
            cur.push_back('|');
            ++i;
        } else if (s[i] == '|') {
            cells.emplace_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(s[i]);
        }
    }
    cells.emplace_back(trim(cur));
    return cells;
}

bool is_separator_cell(std::string_view c)
{
    if (!c.empty() && c.front() == ':') {
        c.remove_prefix(1);
    }
    if (!c.empty() && c.back() == ':') {
        c.remove_suffix(1);
    }
    return !c.empty() && std::all_of(c.begin(), c.end(), [](char ch) { return ch == '-'; });
}

bool is_separator_row(std::string_view line, std::size_t columns)
{
    if (line.find('|') == std::string_view::npos && columns > 1) {
        return false;
    }
    auto cells = split_pipe_row(line);
    return cells.size() == columns && std::all_of(cells.begin(), cells.end(), is_separator_cell);
}

bool has_pipe(std::string_view line) { return line.find('|') != std::string_view::npos; }

}  // namespace

std::vector<EvidenceTable> parse_markdown_tables(std::string_view text, std::string_view card_id)
{
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            lines.push_back(text.substr(pos));
            break;
        }
        lines.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }

    std::vector<EvidenceTable> tables;
    std::size_t i = 0;
    while (i + 1 < lines.size()) {
        if (!has_pipe(lines[i])) {
            ++i;
            continue;
        }
        auto headers = split_pipe_row(lines[i]);
        if (!is_separator_row(lines[i + 1], headers.size())) {
            ++i;
            continue;
        }
        std::size_t j = i + 2;
        EvidenceTable t;
        t.headers = std::move(headers);
        while (j < lines.size() && has_pipe(lines[j]) && !trim(lines[j]).empty()) {
            auto cells = split_pipe_row(lines[j]);
            cells.resize(t.headers.size());
            std::vector<Cell> row;
            row.reserve(cells.size());
            for (auto& c : cells) {
                row.push_back(Cell::parse(c));
            }
            t.rows.push_back(std::move(row));
            ++j;
        }
        if (!t.rows.empty()) {
            t.id = std::string(card_id) + "#t" + std::to_string(tables.size());
            if (!card_id.empty()) {
                t.card_ids.emplace_back(card_id);
            }
            tables.push_back(std::move(t));
        }
        i = j;
    }
    return tables;
}

}  // namespace modelsearch
