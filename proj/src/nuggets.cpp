#include "modelsearch/nuggets.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>
#include <set>

#include "modelsearch/discovery.hpp"
#include "modelsearch/error.hpp"
#include "modelsearch/tokenize.hpp"

namespace modelsearch {

namespace {

constexpr std::array<std::string_view, 6> kAttributeNames = {"model",   "base_model",  "model_variant",
                                                             "dataset", "metric_name", "metric_value"};

std::string lower_ascii(std::string_view s)
{
    std::string out(s);
    for (auto& c : out) {
        if (c >= 'A' && c <= 'Z') {
            c = static_cast<char>(c - 'A' + 'a');
        }
    }
    return out;
}

/// Trims and collapses runs of whitespace; display form of nugget values.
std::string clean(std::string_view s)
{
    std::string out;
    bool pending_space = false;
    for (char c : s) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') {
            pending_space = !out.empty();
        } else {
            if (pending_space) {
                out.push_back(' ');
                pending_space = false;
            }
            out.push_back(c);
        }
    }
    return out;
}

std::optional<std::string> clean_opt(std::string_view s)
{
    auto c = clean(s);
    if (c.empty()) {
        return std::nullopt;
    }
    return c;
}

bool contains_phrase(const std::vector<std::string>& tokens, const std::vector<std::string>& phrase)
{
    if (phrase.empty() || phrase.size() > tokens.size()) {
        return false;
    }
    return std::search(tokens.begin(), tokens.end(), phrase.begin(), phrase.end()) != tokens.end();
}

void add_terms(AttributeConstraint& ac, const std::vector<std::string>& terms)
{
    ac.kind = AttributeConstraint::Kind::must_contain;
    for (const auto& t : terms) {
        if (std::find(ac.terms.begin(), ac.terms.end(), t) == ac.terms.end()) {
            ac.terms.push_back(t);
        }
    }
}

void require(AttributeConstraint& ac)
{
    if (ac.kind == AttributeConstraint::Kind::irrelevant) {
        ac.kind = AttributeConstraint::Kind::required_nonnull;
    }
}

json attributes_json(const QueryConstraint& c)
{
    json attrs = json::object();
    for (auto a : kAttributes) {
        const auto& ac = c[a];
        switch (ac.kind) {
        case AttributeConstraint::Kind::irrelevant: attrs[std::string(attribute_name(a))] = "irrelevant"; break;
        case AttributeConstraint::Kind::required_nonnull: attrs[std::string(attribute_name(a))] = "required"; break;
        case AttributeConstraint::Kind::must_contain: attrs[std::string(attribute_name(a))] = ac.terms; break;
        }
    }
    return attrs;
}

// Tag conventions follow the hub: "base_model:<id>" or "base_model:<relation>:<id>".
struct TagInfo {
    std::vector<std::string> base_models;
    std::vector<std::string> variants;
    std::vector<std::string> bits;
};

std::optional<std::string> bits_tag(std::string_view tag)
{
    auto t = lower_ascii(tag);
    std::string digits;
    std::size_t i = 0;
    if (t.rfind("int", 0) == 0) {
        i = 3;
        while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) {
            digits.push_back(t[i++]);
        }
        if (!digits.empty() && i == t.size()) {
            return digits + "-bit";
        }
        return std::nullopt;
    }
    while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) {
        digits.push_back(t[i++]);
    }
    if (digits.empty()) {
        return std::nullopt;
    }
    auto rest = std::string_view(t).substr(i);
    if (rest == "-bit" || rest == "bit" || rest == "_bit") {
        return digits + "-bit";
    }
    return std::nullopt;
}

std::optional<std::string> variant_of_relation(std::string_view rel)
{
    if (rel == "quantized") return "quantization";
    if (rel == "finetune" || rel == "finetuned") return "finetune";
    if (rel == "adapter") return "adapter";
    if (rel == "merge") return "merge";
    return std::nullopt;
}

std::optional<std::string> variant_of_tag(std::string_view tag)
{
    static const std::set<std::string, std::less<>> quant = {"quantized", "gptq",  "awq", "gguf",
                                                             "bitsandbytes", "exl2", "quantization"};
    static const std::set<std::string, std::less<>> adapter = {"lora", "qlora", "peft", "adapter"};
    static const std::set<std::string, std::less<>> merge = {"merge", "mergekit"};
    static const std::set<std::string, std::less<>> finetune = {"finetuned", "fine-tuned", "finetune"};
    auto t = lower_ascii(tag);
    if (quant.count(t) || bits_tag(t)) return "quantization";
    if (adapter.count(t)) return "adapter";
    if (merge.count(t)) return "merge";
    if (finetune.count(t)) return "finetune";
    return std::nullopt;
}

void push_unique(std::vector<std::string>& v, std::string s)
{
    if (std::find(v.begin(), v.end(), s) == v.end()) {
        v.push_back(std::move(s));
    }
}

TagInfo read_tags(const std::vector<std::string>& tags)
{
    TagInfo info;
    constexpr std::string_view prefix = "base_model:";
    for (const auto& raw : tags) {
        auto tag = clean(raw);
        if (lower_ascii(tag).rfind(prefix, 0) == 0) {
            auto rest = std::string_view(tag).substr(prefix.size());
            auto colon = rest.find(':');
            if (colon != std::string_view::npos) {
                if (auto v = variant_of_relation(lower_ascii(rest.substr(0, colon)))) {
                    push_unique(info.variants, *v);
                }
                rest = rest.substr(colon + 1);
            }
            if (!rest.empty()) {
                push_unique(info.base_models, std::string(rest));
            }
            continue;
        }
        if (auto v = variant_of_tag(tag)) {
            push_unique(info.variants, *v);
        }
        if (auto b = bits_tag(tag)) {
            push_unique(info.bits, *b);
        }
    }
    return info;
}

bool is_placeholder(const Cell& c)
{
    static const std::set<std::string, std::less<>> marks = {"-", "--", "\xE2\x80\x94", "n/a", "na", "none", "?"};
    return c.is_text() && marks.count(lower_ascii(c.str()));
}

bool is_metric_header(std::string_view h)
{
    auto n = normalize_value(h);
    return n == "metric" || n == "metrics" || n == "metric name" || n == "measure";
}

void table_nuggets(const ModelCard& card, const EvidenceTable& t, std::vector<Nugget>& out)
{
    if (t.column_count() < 2 || t.row_count() == 0) {
        return;
    }
    if (profile_column(t, 0).numeric_only) {
        return;
    }
    std::optional<std::size_t> metric_col;
    for (std::size_t j = 1; j < t.column_count(); ++j) {
        if (is_metric_header(t.headers[j])) {
            metric_col = j;
            break;
        }
    }
    std::vector<std::size_t> value_cols;
    for (std::size_t j = 1; j < t.column_count(); ++j) {
        if (metric_col && j == *metric_col) {
            continue;
        }
        bool any = false;
        bool ok = true;
        for (const auto& row : t.rows) {
            const auto& c = row[j];
            if (c.is_null() || is_placeholder(c)) {
                continue;
            }
            any = any || c.is_number();
            ok = ok && c.is_number();
        }
        if (any && ok) {
            value_cols.push_back(j);
        }
    }
    for (const auto& row : t.rows) {
        if (row[0].is_null()) {
            continue;
        }
        for (auto j : value_cols) {
            if (!row[j].is_number()) {
                continue;
            }
            Nugget n;
            n.card_id = card.id;
            n[Attribute::model] = clean_opt(card.id);
            n[Attribute::dataset] = clean_opt(row[0].str());
            if (metric_col && !row[*metric_col].is_null()) {
                n[Attribute::metric_name] = clean_opt(row[*metric_col].str());
            } else {
                n[Attribute::metric_name] = clean_opt(t.headers[j]);
            }
            n[Attribute::metric_value] = clean_opt(row[j].str());
            out.push_back(std::move(n));
        }
    }
}

void dedupe(std::vector<Nugget>& v)
{
    std::vector<Nugget> out;
    for (auto& n : v) {
        if (!n.empty() && std::find(out.begin(), out.end(), n) == out.end()) {
            out.push_back(std::move(n));
        }
    }
    v = std::move(out);
}

}  // namespace

std::string_view attribute_name(Attribute a) { return kAttributeNames[static_cast<std::size_t>(a)]; }

Attribute parse_attribute(std::string_view s)
{
    for (auto a : kAttributes) {
        if (attribute_name(a) == s) {
            return a;
        }
    }
    throw InvalidArgument("unknown nugget attribute '" + std::string(s) + "'");
}

NuggetKey Nugget::key() const
{
    NuggetKey k;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i]) {
            k[i] = normalize_value(*values[i]);
        }
    }
    return k;
}

bool Nugget::empty() const
{
    return std::none_of(values.begin(), values.end(), [](const auto& v) { return v.has_value(); });
}

json to_json(const Nugget& n)
{
    json j{{"card_id", n.card_id}};
    for (auto a : kAttributes) {
        const auto& v = n[a];
        j[std::string(attribute_name(a))] = v ? json(*v) : json(nullptr);
    }
    return j;
}

Nugget nugget_from_json(const json& j)
{
    Nugget n;
    n.card_id = j.value("card_id", std::string{});
    for (auto a : kAttributes) {
        auto name = std::string(attribute_name(a));
        if (j.contains(name) && !j.at(name).is_null()) {
            const auto& v = j.at(name);
            n[a] = clean_opt(v.is_string() ? v.get<std::string>() : v.dump());
        }
    }
    return n;
}

bool QueryConstraint::any_relevant() const
{
    return std::any_of(attributes.begin(), attributes.end(),
                       [](const auto& a) { return a.kind != AttributeConstraint::Kind::irrelevant; });
}

json to_json(const QueryConstraint& c)
{
    return json{{"query", c.query}, {"attributes", attributes_json(c)}, {"audit", to_json(c.audit)}};
}

// ---------------------------------------------------------------------------
// Lexicon

Lexicon Lexicon::from_json(const json& j)
{
    Lexicon lex;
    lex.version_ = j.value("version", std::string("unversioned"));
    for (const auto& e : j.at("entries")) {
        Entry entry;
        for (const auto& p : e.at("match")) {
            auto toks = normalize_token(p.get<std::string>());
            if (!toks.empty()) {
                entry.phrases.push_back(std::move(toks));
            }
        }
        if (e.contains("must_contain")) {
            for (const auto& [attr, terms] : e.at("must_contain").items()) {
                std::vector<std::string> flat;
                for (const auto& t : terms) {
                    for (auto& tok : normalize_token(t.get<std::string>())) {
                        flat.push_back(std::move(tok));
                    }
                }
                entry.must_contain[parse_attribute(attr)] = std::move(flat);
            }
        }
        if (e.contains("required_nonnull")) {
            for (const auto& a : e.at("required_nonnull")) {
                entry.required_nonnull.push_back(parse_attribute(a.get<std::string>()));
            }
        }
        lex.entries_.push_back(std::move(entry));
    }
    if (j.contains("vague")) {
        for (const auto& a : j.at("vague").at("required_nonnull")) {
            lex.vague_.push_back(parse_attribute(a.get<std::string>()));
        }
    }
    return lex;
}

const Lexicon& Lexicon::builtin()
{
    static const Lexicon lex = from_json(json::parse(asset("lexicon.json")));
    return lex;
}

// ---------------------------------------------------------------------------
// Extraction and mapping

std::vector<Nugget> extract_nuggets_fallback(const ModelCard& card, std::span<const EvidenceTable* const> tables)
{
    std::vector<Nugget> out;
    auto model = clean_opt(card.id);
    auto tags = read_tags(card.tags);
    for (const auto& base : tags.base_models) {
        Nugget n;
        n.card_id = card.id;
        n[Attribute::model] = model;
        n[Attribute::base_model] = base;
        out.push_back(std::move(n));
    }
    for (const auto& variant : tags.variants) {
        Nugget n;
        n.card_id = card.id;
        n[Attribute::model] = model;
        n[Attribute::model_variant] = variant;
        out.push_back(std::move(n));
    }
    for (const auto& bits : tags.bits) {
        Nugget n;
        n.card_id = card.id;
        n[Attribute::model] = model;
        n[Attribute::model_variant] = "quantization";
        n[Attribute::metric_name] = "quantization bits";
        n[Attribute::metric_value] = bits;
        out.push_back(std::move(n));
    }
    for (const auto* t : tables) {
        table_nuggets(card, *t, out);
    }
    dedupe(out);
    return out;
}

QueryConstraint map_query_fallback(std::string_view q, const Lexicon& lexicon)
{
    auto tokens = normalize_token(q);
    if (tokens.empty()) {
        throw InvalidArgument("query has no tokens; no nugget attribute can be derived");
    }
    QueryConstraint c;
    c.query = std::string(q);
    json hits = json::array();
    for (const auto& e : lexicon.entries()) {
        for (const auto& phrase : e.phrases) {
            if (!contains_phrase(tokens, phrase)) {
                continue;
            }
            std::string joined;
            for (const auto& t : phrase) {
                joined += (joined.empty() ? "" : " ") + t;
            }
            hits.push_back(joined);
            for (const auto& [attr, terms] : e.must_contain) {
                add_terms(c[attr], terms);
            }
            for (auto attr : e.required_nonnull) {
                require(c[attr]);
            }
            break;
        }
    }
    if (!c.any_relevant()) {
        for (auto attr : lexicon.vague()) {
            require(c[attr]);
        }
    }
    if (!c.any_relevant()) {
        throw InvalidArgument("query maps to no nugget attribute");
    }
    c.audit.task = "map_query";
    c.audit.provider = "fallback:" + lexicon.version();
    c.audit.prompt_input = render_prompt(asset("prompts/map_query.v1.txt"), {{"query", c.query}});
    c.audit.provider_output = json{{"lexicon_hits", std::move(hits)}}.dump();
    c.audit.post_processed = attributes_json(c).dump();
    c.audit.id = audit_id(c.audit.task, c.audit.provider, c.audit.prompt_input);
    return c;
}

NuggetExtractor::NuggetExtractor(const CompletionProvider* provider, const AuditLog* log)
    : provider_(provider), log_(log)
{
}

std::vector<Nugget> NuggetExtractor::extract(const ModelCard& card, std::span<const EvidenceTable* const> tables) const
{
    if (!provider_) {
        return extract_nuggets_fallback(card, tables);
    }
    json tables_json = json::array();
    for (const auto* t : tables) {
        tables_json.push_back(to_json(*t));
    }
    AuditRecord audit;
    audit.task = "extract_nuggets";
    audit.provider = provider_->name();
    audit.prompt_input = render_prompt(asset("prompts/extract_nuggets.v1.txt"),
                                       {{"card_id", card.id}, {"card_text", card.text}, {"tables", tables_json.dump()}});
    audit.provider_output = provider_->complete(audit.prompt_input);
    auto payload = parse_json_payload(audit.provider_output);
    if (!payload.is_array()) {
        throw ProviderError("nugget extractor must return a JSON array");
    }
    std::vector<Nugget> out;
    for (const auto& item : payload) {
        if (!item.is_object()) {
            throw ProviderError("nugget extractor returned a non-object element");
        }
        auto n = nugget_from_json(item);
        n.card_id = card.id;
        out.push_back(std::move(n));
    }
    dedupe(out);
    json post = json::array();
    for (const auto& n : out) {
        post.push_back(to_json(n));
    }
    audit.post_processed = post.dump();
    audit.id = audit_id(audit.task, audit.provider, audit.prompt_input);
    if (log_) {
        log_->append(audit);
    }
    return out;
}

QueryConstraint NuggetExtractor::map_query(std::string_view q) const
{
    if (!provider_) {
        auto c = map_query_fallback(q);
        if (log_) {
            log_->append(c.audit);
        }
        return c;
    }
    if (normalize_token(q).empty()) {
        throw InvalidArgument("query has no tokens; no nugget attribute can be derived");
    }
    QueryConstraint c;
    c.query = std::string(q);
    c.audit.task = "map_query";
    c.audit.provider = provider_->name();
    c.audit.prompt_input = render_prompt(asset("prompts/map_query.v1.txt"), {{"query", c.query}});
    c.audit.provider_output = provider_->complete(c.audit.prompt_input);
    auto payload = parse_json_payload(c.audit.provider_output);
    if (!payload.is_object()) {
        throw ProviderError("query mapper must return a JSON object");
    }
    for (const auto& [name, v] : payload.items()) {
        auto attr = parse_attribute(name);
        if (v.is_string() && (v == "required" || v == "required_nonnull")) {
            require(c[attr]);
        } else if (v.is_array()) {
            std::vector<std::string> terms;
            for (const auto& t : v) {
                for (auto& tok : normalize_token(t.is_string() ? t.get<std::string>() : t.dump())) {
                    terms.push_back(std::move(tok));
                }
            }
            if (terms.empty()) {
                require(c[attr]);
            } else {
                add_terms(c[attr], terms);
            }
        }
    }
    if (!c.any_relevant()) {
        throw ProviderError("query mapper returned no relevant attribute");
    }
    c.audit.post_processed = attributes_json(c).dump();
    c.audit.id = audit_id(c.audit.task, c.audit.provider, c.audit.prompt_input);
    if (log_) {
        log_->append(c.audit);
    }
    return c;
}

// ---------------------------------------------------------------------------
// Matching and scoring

bool matches(const NuggetKey& n, const QueryConstraint& c)
{
    for (auto a : kAttributes) {
        const auto& ac = c[a];
        const auto& v = n[static_cast<std::size_t>(a)];
        switch (ac.kind) {
        case AttributeConstraint::Kind::irrelevant: break;
        case AttributeConstraint::Kind::required_nonnull:
            if (!v) {
                return false;
            }
            break;
        case AttributeConstraint::Kind::must_contain: {
            if (!v) {
                return false;
            }
            auto toks = normalize_token(*v);
            for (const auto& term : ac.terms) {
                if (std::find(toks.begin(), toks.end(), term) == toks.end()) {
                    return false;
                }
            }
            break;
        }
        }
    }
    return true;
}

void NuggetStore::add(const std::string& card_id, std::vector<Nugget> nuggets)
{
    if (by_card_.count(card_id)) {
        throw InvalidArgument("nuggets for card '" + card_id + "' are already stored");
    }
    for (auto& n : nuggets) {
        n.card_id = card_id;
    }
    by_card_.emplace(card_id, std::move(nuggets));
    order_.push_back(card_id);
}

bool NuggetStore::contains(std::string_view card_id) const { return by_card_.find(card_id) != by_card_.end(); }

const std::vector<Nugget>& NuggetStore::nuggets_of(std::string_view card_id) const
{
    auto it = by_card_.find(card_id);
    if (it == by_card_.end()) {
        throw NotFound("card '" + std::string(card_id) + "' missing from nugget store");
    }
    return it->second;
}

std::size_t NuggetStore::size() const noexcept
{
    std::size_t n = 0;
    for (const auto& [_, v] : by_card_) {
        n += v.size();
    }
    return n;
}

void NuggetStore::write(std::ostream& out) const
{
    for (const auto& id : order_) {
        for (const auto& n : by_card_.at(id)) {
            out << to_json(n).dump() << '\n';
        }
    }
}

NuggetStore NuggetStore::read(std::istream& in, std::span<const std::string> known_cards)
{
    std::map<std::string, std::vector<Nugget>, std::less<>> grouped;
    std::vector<std::string> order;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        Nugget n;
        try {
            n = nugget_from_json(json::parse(line));
        } catch (const std::exception& e) {
            throw IngestError("nugget file line " + std::to_string(lineno) + ": " + e.what());
        }
        if (n.card_id.empty()) {
            throw IngestError("nugget file line " + std::to_string(lineno) + ": missing card_id");
        }
        auto [it, fresh] = grouped.try_emplace(n.card_id);
        if (fresh) {
            order.push_back(n.card_id);
        }
        it->second.push_back(std::move(n));
    }
    for (const auto& id : known_cards) {
        if (grouped.try_emplace(id).second) {
            order.push_back(id);
        }
    }
    NuggetStore store;
    for (const auto& id : order) {
        store.add(id, std::move(grouped[id]));
    }
    return store;
}

std::vector<NuggetKey> matching_nuggets(std::span<const std::string> card_ids, const QueryConstraint& c,
                                        const NuggetStore& store)
{
    std::set<NuggetKey> pooled;
    for (const auto& id : card_ids) {
        for (const auto& n : store.nuggets_of(id)) {
            pooled.insert(n.key());
        }
    }
    std::vector<NuggetKey> out;
    for (const auto& k : pooled) {
        if (matches(k, c)) {
            out.push_back(k);
        }
    }
    return out;
}

std::size_t score_candidate_set(std::span<const std::string> card_ids, const QueryConstraint& c,
                                const NuggetStore& store)
{
    return matching_nuggets(card_ids, c, store).size();
}

}  // namespace modelsearch
