#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "modelsearch/lake.hpp"
#include "modelsearch/llm.hpp"

namespace modelsearch {

enum class Attribute : std::size_t { model, base_model, model_variant, dataset, metric_name, metric_value };

inline constexpr std::array<Attribute, 6> kAttributes = {Attribute::model,   Attribute::base_model,
                                                         Attribute::model_variant, Attribute::dataset,
                                                         Attribute::metric_name, Attribute::metric_value};

std::string_view attribute_name(Attribute a);
Attribute parse_attribute(std::string_view s);

/// The six-attribute projection used for set-level identity. Values are
/// normalize_value'd so casing and punctuation variants collapse.
using NuggetKey = std::array<std::optional<std::string>, 6>;

/// Six attribute values (display form) plus the card they came from.
struct Nugget {
    std::array<std::optional<std::string>, 6> values;
    std::string card_id;

    const std::optional<std::string>& operator[](Attribute a) const { return values[static_cast<std::size_t>(a)]; }
    std::optional<std::string>& operator[](Attribute a) { return values[static_cast<std::size_t>(a)]; }

    NuggetKey key() const;
    bool empty() const;

    friend bool operator==(const Nugget&, const Nugget&) = default;
};

json to_json(const Nugget& n);
Nugget nugget_from_json(const json& j);

struct AttributeConstraint {
    enum class Kind { irrelevant, required_nonnull, must_contain };

    Kind kind = Kind::irrelevant;
    std::vector<std::string> terms;  ///< normalized tokens; only for must_contain

    friend bool operator==(const AttributeConstraint&, const AttributeConstraint&) = default;
};

/// Standardized query representation: what a matching nugget must carry.
struct QueryConstraint {
    std::array<AttributeConstraint, 6> attributes;
    std::string query;
    AuditRecord audit;

    const AttributeConstraint& operator[](Attribute a) const { return attributes[static_cast<std::size_t>(a)]; }
    AttributeConstraint& operator[](Attribute a) { return attributes[static_cast<std::size_t>(a)]; }

    bool any_relevant() const;
};

json to_json(const QueryConstraint& c);

/// Curated phrase -> constraint table used when no completion provider is set.
class Lexicon {
public:
    struct Entry {
        std::vector<std::vector<std::string>> phrases;  ///< token sequences
        std::map<Attribute, std::vector<std::string>> must_contain;
        std::vector<Attribute> required_nonnull;
    };

    static Lexicon from_json(const json& j);
    /// The lexicon shipped in assets/lexicon.json.
    static const Lexicon& builtin();

    const std::vector<Entry>& entries() const noexcept { return entries_; }
    const std::vector<Attribute>& vague() const noexcept { return vague_; }
    const std::string& version() const noexcept { return version_; }

private:
    std::string version_;
    std::vector<Entry> entries_;
    std::vector<Attribute> vague_;
};

/// Rule-based extraction: base-model/variant nuggets from tags, and one
/// nugget per (row, numeric metric column) of each leaderboard-style table.
std::vector<Nugget> extract_nuggets_fallback(const ModelCard& card, std::span<const EvidenceTable* const> tables);

/// Lexicon-driven mapping. Throws InvalidArgument for a query without tokens.
QueryConstraint map_query_fallback(std::string_view q, const Lexicon& lexicon = Lexicon::builtin());

/// Provider-backed operations with deterministic fallbacks. With a provider
/// configured, transport failures propagate as ProviderError.
class NuggetExtractor {
public:
    explicit NuggetExtractor(const CompletionProvider* provider = nullptr, const AuditLog* log = nullptr);

    std::vector<Nugget> extract(const ModelCard& card, std::span<const EvidenceTable* const> tables) const;
    QueryConstraint map_query(std::string_view q) const;

private:
    const CompletionProvider* provider_;
    const AuditLog* log_;
};

bool matches(const NuggetKey& n, const QueryConstraint& c);
inline bool matches(const Nugget& n, const QueryConstraint& c) { return matches(n.key(), c); }

/// Append-only per-card nugget table.
class NuggetStore {
public:
    /// Throws InvalidArgument if the card already has nuggets stored.
    void add(const std::string& card_id, std::vector<Nugget> nuggets);
    bool contains(std::string_view card_id) const;
    /// Throws NotFound naming the card.
    const std::vector<Nugget>& nuggets_of(std::string_view card_id) const;

    std::size_t card_count() const noexcept { return by_card_.size(); }
    std::size_t size() const noexcept;
    const std::vector<std::string>& card_order() const noexcept { return order_; }

    /// One record per nugget: card_id, then the six attributes in schema order.
    void write(std::ostream& out) const;
    /// Cards listed in `known_cards` but absent from the file get an empty entry.
    static NuggetStore read(std::istream& in, std::span<const std::string> known_cards = {});

private:
    std::map<std::string, std::vector<Nugget>, std::less<>> by_card_;
    std::vector<std::string> order_;
};

/// Distinct six-tuples in the union of the cards' nuggets that satisfy `c`.
std::size_t score_candidate_set(std::span<const std::string> card_ids, const QueryConstraint& c,
                                const NuggetStore& store);

/// The distinct matching tuples themselves, sorted.
std::vector<NuggetKey> matching_nuggets(std::span<const std::string> card_ids, const QueryConstraint& c,
                                        const NuggetStore& store);

}  // namespace modelsearch
