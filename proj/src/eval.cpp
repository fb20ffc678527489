#include "modelsearch/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>

#include "modelsearch/error.hpp"
#include "modelsearch/tokenize.hpp"

namespace modelsearch {

namespace {

constexpr std::array<std::string_view, 6> kIntentNames = {"evidence-based", "comparison",  "experience",
                                                          "reason",         "instruction", "debate"};

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }

std::string lower_ascii(std::string_view s)
{
    std::string out(s);
    for (auto& c : out) {
        if (is_upper(c)) {
            c = static_cast<char>(c - 'A' + 'a');
        }
    }
    return out;
}

std::string match_case(std::string_view original, const std::string& replacement)
{
    std::string out = replacement;
    const bool all_upper =
        original.size() > 1 && std::all_of(original.begin(), original.end(), [](char c) { return is_upper(c); });
    if (all_upper) {
        for (auto& c : out) {
            if (c >= 'a' && c <= 'z') {
                c = static_cast<char>(c - 'a' + 'A');
            }
        }
    } else if (!original.empty() && is_upper(original.front()) && !out.empty() && out.front() >= 'a' &&
               out.front() <= 'z') {
        out.front() = static_cast<char>(out.front() - 'a' + 'A');
    }
    return out;
}

const std::map<std::string, std::string>& rewrite_map()
{
    static const auto map = [] {
        std::map<std::string, std::string> m;
        const auto j = json::parse(asset("rewrite_map.json"));
        for (const auto& [from, to] : j.at("substitutions").items()) {
            m.emplace(lower_ascii(from), to.get<std::string>());
        }
        return m;
    }();
    return map;
}

struct IntentRule {
    Intent label;
    std::vector<std::vector<std::string>> phrases;
};

struct IntentRules {
    Intent fallback = Intent::evidence_based;
    std::vector<IntentRule> rules;
};

const IntentRules& intent_rules()
{
    static const auto rules = [] {
        IntentRules r;
        auto j = json::parse(asset("intent_rules.json"));
        r.fallback = parse_intent(j.value("default", std::string("evidence-based")));
        for (const auto& rule : j.at("rules")) {
            IntentRule ir{parse_intent(rule.at("label").get<std::string>()), {}};
            for (const auto& p : rule.at("match")) {
                ir.phrases.push_back(normalize_token(p.get<std::string>()));
            }
            r.rules.push_back(std::move(ir));
        }
        return r;
    }();
    return rules;
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\r\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        out += c == '"' ? std::string("\"\"") : std::string(1, c);
    }
    return out + "\"";
}

std::string fixed6(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string strip_quotes(std::string s)
{
    auto b = s.find_first_not_of(" \t\r\n\"'");
    auto e = s.find_last_not_of(" \t\r\n\"'");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

}  // namespace

std::string_view to_string(Intent i) { return kIntentNames[static_cast<std::size_t>(i)]; }

Intent parse_intent(std::string_view s)
{
    for (auto i : kIntents) {
        if (to_string(i) == s) {
            return i;
        }
    }
    throw InvalidArgument("unknown intent label '" + std::string(s) + "'");
}

std::vector<BenchmarkQuery> read_queries(std::istream& in)
{
    std::vector<BenchmarkQuery> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            auto j = json::parse(line);
            BenchmarkQuery q;
            q.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
            q.original = j.at("text").get<std::string>();
            out.push_back(std::move(q));
        } catch (const std::exception& e) {
            throw IngestError("query file line " + std::to_string(lineno) + ": malformed record: " + e.what());
        }
    }
    return out;
}

std::string rewrite_query_fallback(std::string_view text)
{
    const auto& map = rewrite_map();
    std::string out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!is_alpha(text[i])) {
            out.push_back(text[i++]);
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && is_alpha(text[j])) {
            ++j;
        }
        auto word = text.substr(i, j - i);
        // Words glued to digits or non-ASCII bytes are not whole words.
        const bool glued = (i > 0 && !is_alpha(text[i - 1]) && (std::isalnum(static_cast<unsigned char>(text[i - 1])) ||
                                                                static_cast<unsigned char>(text[i - 1]) >= 0x80)) ||
                           (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) ||
                                                static_cast<unsigned char>(text[j]) >= 0x80));
        auto it = glued ? map.end() : map.find(lower_ascii(word));
        if (it != map.end()) {
            out += match_case(word, it->second);
        } else {
            out.append(word);
        }
        i = j;
    }
    return out;
}

Intent classify_query_fallback(std::string_view text)
{
    auto tokens = normalize_token(text);
    const auto& rules = intent_rules();
    for (const auto& rule : rules.rules) {
        for (const auto& p : rule.phrases) {
            if (!p.empty() && std::search(tokens.begin(), tokens.end(), p.begin(), p.end()) != tokens.end()) {
                return rule.label;
            }
        }
    }
    return rules.fallback;
}

QueryPreparer::QueryPreparer(const CompletionProvider* provider, const AuditLog* log) : provider_(provider), log_(log) {}

std::string QueryPreparer::rewrite(std::string_view text) const
{
    if (!provider_) {
        return rewrite_query_fallback(text);
    }
    AuditRecord a;
    a.task = "rewrite_query";
    a.provider = provider_->name();
    a.prompt_input = render_prompt(asset("prompts/rewrite_query.v1.txt"), {{"query", std::string(text)}});
    a.provider_output = provider_->complete(a.prompt_input);
    a.post_processed = strip_quotes(a.provider_output);
    if (a.post_processed.empty()) {
        throw ProviderError("rewrite provider returned an empty query");
    }
    a.id = audit_id(a.task, a.provider, a.prompt_input);
    if (log_) {
        log_->append(a);
    }
    return a.post_processed;
}

Intent QueryPreparer::classify(std::string_view text) const
{
    if (!provider_) {
        return classify_query_fallback(text);
    }
    AuditRecord a;
    a.task = "classify_query";
    a.provider = provider_->name();
    a.prompt_input = render_prompt(asset("prompts/classify_query.v1.txt"), {{"query", std::string(text)}});
    a.provider_output = provider_->complete(a.prompt_input);
    auto answer = lower_ascii(strip_quotes(a.provider_output));
    std::optional<Intent> label;
    for (auto i : kIntents) {
        if (answer.find(to_string(i)) != std::string::npos) {
            label = i;
            break;
        }
    }
    if (!label) {
        throw ProviderError("classifier returned no known intent label: " + a.provider_output);
    }
    a.post_processed = std::string(to_string(*label));
    a.id = audit_id(a.task, a.provider, a.prompt_input);
    if (log_) {
        log_->append(a);
    }
    return *label;
}

BenchmarkQuery QueryPreparer::prepare(std::string id, std::string_view text) const
{
    BenchmarkQuery q;
    q.id = std::move(id);
    q.original = std::string(text);
    q.rewritten = rewrite(text);
    q.intent = classify(q.rewritten);
    return q;
}

// ---------------------------------------------------------------------------

std::vector<MethodSpec> default_methods(SemanticMethod structured_semantic)
{
    std::vector<MethodSpec> out;
    for (auto m : {SemanticMethod::dense, SemanticMethod::sparse, SemanticMethod::hybrid}) {
        out.push_back({to_string(m), false, m, Operator::unionable});
    }
    for (auto op : {Operator::keyword, Operator::joinable, Operator::unionable}) {
        out.push_back({to_string(op), true, structured_semantic, op});
    }
    return out;
}

MethodSpec method_spec(std::string_view name, SemanticMethod structured_semantic)
{
    for (auto& m : default_methods(structured_semantic)) {
        if (m.name == name) {
            return m;
        }
    }
    throw InvalidArgument("unknown method '" + std::string(name) + "'");
}

void assign_ranks(std::vector<BenchmarkRow>& rows)
{
    std::size_t i = 0;
    while (i < rows.size()) {
        std::size_t j = i;
        while (j < rows.size() && rows[j].query_id == rows[i].query_id && rows[j].k == rows[i].k) {
            ++j;
        }
        for (std::size_t a = i; a < j; ++a) {
            std::size_t better = 0;
            for (std::size_t b = i; b < j; ++b) {
                better += rows[b].score > rows[a].score ? 1 : 0;
            }
            rows[a].rank = better + 1;
        }
        i = j;
    }
}

Benchmark::Benchmark(const Pipeline& pipeline, const NuggetStore& store, const NuggetExtractor& extractor,
                     std::size_t discovery_k)
    : pipeline_(&pipeline), store_(&store), extractor_(&extractor), discovery_k_(discovery_k)
{
}

RetrievalResult Benchmark::retrieve(const MethodSpec& m, std::string_view q, std::size_t k) const
{
    if (!m.structured) {
        return pipeline_->run_unstructured(q, m.semantic, k);
    }
    PipelineConfig cfg;
    cfg.semantic_method = m.semantic;
    cfg.op = m.op;
    cfg.k = k;
    cfg.discovery_k = std::max(discovery_k_, k);
    return pipeline_->run_structured(q, cfg);
}

std::vector<BenchmarkRow> Benchmark::run(const std::vector<BenchmarkQuery>& queries,
                                         const std::vector<MethodSpec>& methods,
                                         const std::vector<std::size_t>& budgets) const
{
    std::vector<BenchmarkRow> rows;
    for (const auto& q : queries) {
        const auto& text = q.rewritten.empty() ? q.original : q.rewritten;
        std::optional<QueryConstraint> constraint;
        std::string constraint_error;
        try {
            constraint = extractor_->map_query(text);
        } catch (const Error& e) {
            constraint_error = e.what();
        }
        for (auto k : budgets) {
            for (const auto& m : methods) {
                BenchmarkRow row{q.id, m.name, k, 0, 1, false, {}};
                try {
                    if (!constraint) {
                        throw InvalidArgument(constraint_error);
                    }
                    auto ids = retrieve(m, text, k).card_ids();
                    row.score = score_candidate_set(ids, *constraint, *store_);
                } catch (const Error& e) {
                    row.failed = true;
                    row.score = 0;
                    row.error = e.what();
                }
                rows.push_back(std::move(row));
            }
        }
    }
    assign_ranks(rows);
    return rows;
}

std::vector<SummaryRow> aggregate(const std::vector<BenchmarkRow>& rows)
{
    if (rows.empty()) {
        throw InvalidArgument("aggregate needs at least one row");
    }
    std::vector<std::string> methods;
    std::vector<std::size_t> budgets;
    for (const auto& r : rows) {
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) {
            methods.push_back(r.method);
        }
        if (std::find(budgets.begin(), budgets.end(), r.k) == budgets.end()) {
            budgets.push_back(r.k);
        }
    }
    std::vector<SummaryRow> out;
    for (const auto& m : methods) {
        for (auto k : budgets) {
            SummaryRow s;
            s.method = m;
            s.k = k;
            s.rank_share.assign(methods.size(), 0.0);
            std::vector<double> scores;
            for (const auto& r : rows) {
                if (r.method != m || r.k != k) {
                    continue;
                }
                scores.push_back(static_cast<double>(r.score));
                s.rank_share.at(r.rank - 1) += 1.0;
                s.failed += r.failed ? 1 : 0;
            }
            if (scores.empty()) {
                continue;
            }
            s.queries = scores.size();
            double sum = 0.0;
            for (auto v : scores) {
                sum += v;
            }
            s.mean = sum / static_cast<double>(scores.size());
            std::sort(scores.begin(), scores.end());
            const auto n = scores.size();
            s.median = n % 2 ? scores[n / 2] : (scores[n / 2 - 1] + scores[n / 2]) / 2.0;
            for (auto& share : s.rank_share) {
                share /= static_cast<double>(n);
            }
            out.push_back(std::move(s));
        }
    }
    return out;
}

void write_report_csv(std::ostream& out, const std::vector<BenchmarkRow>& rows)
{
    out << "query_id,method,k,score,rank\n";
    for (const auto& r : rows) {
        out << csv_field(r.query_id) << ',' << csv_field(r.method) << ',' << r.k << ',' << r.score << ',' << r.rank
            << '\n';
    }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& summary)
{
    std::size_t ranks = summary.empty() ? 0 : summary.front().rank_share.size();
    out << "method,k,queries,failed,mean,median";
    for (std::size_t r = 1; r <= ranks; ++r) {
        out << ",rank_" << r;
    }
    out << '\n';
    for (const auto& s : summary) {
        out << csv_field(s.method) << ',' << s.k << ',' << s.queries << ',' << s.failed << ',' << fixed6(s.mean) << ','
            << fixed6(s.median);
        for (auto share : s.rank_share) {
            out << ',' << fixed6(share);
        }
        out << '\n';
    }
}

void write_queries_csv(std::ostream& out, const std::vector<BenchmarkQuery>& queries)
{
    out << "query_id,intent,original,rewritten\n";
    for (const auto& q : queries) {
        out << csv_field(q.id) << ',' << to_string(q.intent) << ',' << csv_field(q.original) << ','
            << csv_field(q.rewritten) << '\n';
    }
}

void write_failures_csv(std::ostream& out, const std::vector<BenchmarkRow>& rows)
{
    out << "query_id,method,k,error\n";
    for (const auto& r : rows) {
        if (r.failed) {
            out << csv_field(r.query_id) << ',' << csv_field(r.method) << ',' << r.k << ',' << csv_field(r.error)
                << '\n';
        }
    }
}

}  // namespace modelsearch
