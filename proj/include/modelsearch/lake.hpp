#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace modelsearch {

using json = nlohmann::ordered_json;

/// One table cell: null, a number (original text kept), or text.
///
/// A cell is numeric iff its trimmed text is an optional sign, digits, an
/// optional decimal part and an optional trailing percent sign. The percent
/// sign is stripped from the value but not divided out ("85.2%" -> 85.2).
class Cell {
public:
    Cell() = default;

    static Cell null() { return {}; }
    static Cell text(std::string s);
    static Cell number(double value, std::string text);
    /// Applies the typing rule to `raw`. Blank input is null.
    static Cell parse(std::string_view raw);

    bool is_null() const noexcept { return kind_ == Kind::null; }
    bool is_number() const noexcept { return kind_ == Kind::number; }
    bool is_text() const noexcept { return kind_ == Kind::text; }

    /// Display text; empty for null.
    const std::string& str() const noexcept { return text_; }
    double value() const noexcept { return value_; }

    friend bool operator==(const Cell& a, const Cell& b)
    {
        return a.kind_ == b.kind_ && a.text_ == b.text_;
    }

private:
    enum class Kind { null, number, text };

    Kind kind_ = Kind::null;
    std::string text_;
    double value_ = 0.0;
};

/// Parses `s` with the numeric typing rule; nullopt when it is not numeric.
std::optional<double> parse_numeric(std::string_view s);

struct ModelCard {
    std::string id;
    std::string text;
    std::vector<std::string> tags;
    std::vector<std::string> table_ids;

    friend bool operator==(const ModelCard&, const ModelCard&) = default;
};

struct EvidenceTable {
    std::string id;
    std::vector<std::string> headers;
    std::vector<std::vector<Cell>> rows;
    std::vector<std::string> card_ids;

    std::size_t column_count() const noexcept { return headers.size(); }
    std::size_t row_count() const noexcept { return rows.size(); }
    std::vector<Cell> column(std::size_t j) const;

    friend bool operator==(const EvidenceTable&, const EvidenceTable&) = default;
};

/// Tables are kept only when they have fewer than this many rows...
inline constexpr std::size_t kCompactRowLimit = 200;
/// ...and fewer than this many columns.
inline constexpr std::size_t kCompactColumnLimit = 100;

/// Card corpus plus table lake with resolved cross links. Immutable once built.
class ModelLake {
public:
    ModelLake() = default;

    /// Validates uniqueness, drops dangling card->table and table->card links
    /// (each reported in `warnings`), and drops tables left without any card.
    static ModelLake assemble(std::vector<ModelCard> cards, std::vector<EvidenceTable> tables,
                              std::vector<std::string>* warnings = nullptr);

    const std::vector<ModelCard>& cards() const noexcept { return cards_; }
    const std::vector<EvidenceTable>& tables() const noexcept { return tables_; }

    const ModelCard* find_card(std::string_view id) const;
    const EvidenceTable* find_table(std::string_view id) const;
    /// Throws NotFound.
    const ModelCard& card(std::string_view id) const;
    const EvidenceTable& table(std::string_view id) const;
    std::size_t card_index(std::string_view id) const;

    /// Tables attached to a card, in the card's link order.
    std::vector<const EvidenceTable*> tables_of(const ModelCard& card) const;

private:
    std::vector<ModelCard> cards_;
    std::vector<EvidenceTable> tables_;
    std::unordered_map<std::string, std::size_t> card_pos_;
    std::unordered_map<std::string, std::size_t> table_pos_;
};

// Line-delimited JSON records. Readers throw IngestError naming the line
// (cards) or the table id (ragged rows).
std::vector<ModelCard> read_cards(std::istream& in);
std::vector<EvidenceTable> read_tables(std::istream& in);
std::vector<ModelCard> ingest_cards(const std::filesystem::path& path);
std::vector<EvidenceTable> ingest_tables(const std::filesystem::path& path);
void write_cards(std::ostream& out, std::span<const ModelCard> cards);
void write_tables(std::ostream& out, std::span<const EvidenceTable> tables);

json to_json(const Cell& cell);
Cell cell_from_json(const json& j);
json to_json(const ModelCard& card);
json to_json(const EvidenceTable& table);
ModelCard card_from_json(const json& j);
EvidenceTable table_from_json(const json& j);

/// Keeps tables with fewer than 200 rows and fewer than 100 columns, in order.
std::vector<EvidenceTable> filter_compact(std::span<const EvidenceTable> lake);

/// Extracts GitHub-style pipe tables (header, dash separator, >= 1 data row)
/// from a card body. Tables get ids "<card_id>#t<n>" and link back to the card.
std::vector<EvidenceTable> parse_markdown_tables(std::string_view text, std::string_view card_id = "");

}  // namespace modelsearch
