#include "modelsearch/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>
#include <set>

namespace modelsearch::synthetic {

namespace {

const std::vector<std::string> kHeaders = {"model",  "dataset", "metric", "score", "accuracy", "F1",   "task",
                                           "split",  "language", "size",  "params", "notes",   "Model", "Dataset"};

const std::vector<std::string> kTextValues = {
    "llama 7b",  "Llama-7B", "mistral",   "gsm8k",   "GSM-8K", "mmlu",    "hellaswag", "en",   "de",
    "fr",        "test",     "dev",       "train",   "qwen",   "phi 2",   "gemma",     "bert", "t5 base",
    "accuracy",  "f1",       "bleu",      "rouge l", "exact match", "squad", "glue", "ok", "n/a"};

const std::vector<std::string> kNumbers = {"1", "2", "3", "0.5", "0.537", "85.2%", "-1", "+4", "10", "42.0", "7"};

const std::vector<std::string> kCardWords = {
    "llama",   "mistral", "qwen",      "phi",       "gemma",     "bert",   "model",      "instruct", "chat",
    "base",    "quantized", "4-bit",   "lora",      "adapter",   "merge",  "finetuned",  "gsm8k",    "mmlu",
    "hellaswag", "code",  "math",      "reasoning", "multilingual", "german", "french",   "vision",   "speech",
    "summarization", "translation", "benchmark", "evaluation", "accuracy", "results", "small", "large", "7b"};

const std::vector<std::string> kOrientHeaders = {"alpha", "beta score", "gamma", "delta rate", "epsilon",
                                                 "zeta",  "eta metric", "theta", "iota", "kappa index"};
const std::vector<std::string> kOrientKeys = {"run one", "run two", "red", "green", "blue", "north", "south",
                                              "east",    "west",    "apple", "pear", "plum", "fig", "kiwi"};

Cell cell_of(const std::string& s) { return Cell::parse(s); }

std::vector<std::string> sample_distinct(Rng& rng, const std::vector<std::string>& pool, std::size_t n)
{
    std::vector<std::string> rest = pool;
    std::vector<std::string> out;
    while (out.size() < n && !rest.empty()) {
        auto i = rng.below(rest.size());
        out.push_back(rest[i]);
        rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i));
    }
    return out;
}

EvidenceTable make_table(std::string id, std::vector<std::string> headers,
                         const std::vector<std::vector<std::string>>& rows, std::vector<std::string> cards)
{
    EvidenceTable t;
    t.id = std::move(id);
    t.headers = std::move(headers);
    for (const auto& r : rows) {
        std::vector<Cell> cells;
        for (const auto& v : r) {
            cells.push_back(cell_of(v));
        }
        t.rows.push_back(std::move(cells));
    }
    t.card_ids = std::move(cards);
    return t;
}

void link(std::vector<ModelCard>& cards, std::vector<EvidenceTable>& tables)
{
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < cards.size(); ++i) {
        pos[cards[i].id] = i;
        cards[i].table_ids.clear();
    }
    for (const auto& t : tables) {
        for (const auto& c : t.card_ids) {
            cards[pos.at(c)].table_ids.push_back(t.id);
        }
    }
}

}  // namespace

std::uint64_t Rng::below(std::uint64_t n)
{
    const auto max = std::numeric_limits<std::uint64_t>::max();
    const auto limit = max - max % n;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

std::size_t Rng::between(std::size_t lo, std::size_t hi) { return lo + below(hi - lo + 1); }

std::vector<EvidenceTable> random_tables(Rng& rng, const TableShape& shape)
{
    std::vector<EvidenceTable> out;
    const auto count = rng.between(1, shape.max_tables);
    for (std::size_t t = 0; t < count; ++t) {
        EvidenceTable table;
        table.id = "t" + std::to_string(t);
        const auto cols = rng.between(1, shape.max_columns);
        const auto rows = rng.between(0, shape.max_rows);
        for (std::size_t j = 0; j < cols; ++j) {
            table.headers.push_back(rng.chance(1, 20) ? std::string{} : rng.pick(kHeaders));
        }
        // 0 text, 1 numeric, 2 mixed
        std::vector<int> kind(cols);
        for (std::size_t j = 0; j < cols; ++j) {
            kind[j] = static_cast<int>(rng.below(j == 0 ? 6 : 3));
            if (j == 0) {
                kind[j] = kind[j] == 5 ? 1 : 0;
            }
        }
        for (std::size_t i = 0; i < rows; ++i) {
            std::vector<Cell> row;
            for (std::size_t j = 0; j < cols; ++j) {
                if (rng.chance(1, 10)) {
                    row.push_back(Cell::null());
                    continue;
                }
                bool numeric = kind[j] == 1 || (kind[j] == 2 && rng.chance(1, 2));
                row.push_back(cell_of(numeric ? rng.pick(kNumbers) : rng.pick(kTextValues)));
            }
            table.rows.push_back(std::move(row));
        }
        table.card_ids = {"c0"};
        out.push_back(std::move(table));
    }
    return out;
}

Lake random_lake(Rng& rng, std::size_t max_cards, std::size_t max_tables)
{
    Lake lake;
    const auto n_cards = rng.between(1, max_cards);
    for (std::size_t i = 0; i < n_cards; ++i) {
        ModelCard c;
        c.id = "org" + std::to_string(i % 4) + "/model-" + std::to_string(i);
        const auto words = rng.between(1, 12);
        for (std::size_t w = 0; w < words; ++w) {
            if (w) {
                c.text += ' ';
            }
            c.text += rng.pick(kCardWords);
        }
        if (rng.chance(1, 3)) {
            c.tags.push_back(rng.pick(kCardWords));
        }
        lake.cards.push_back(std::move(c));
    }
    lake.tables = random_tables(rng, {max_tables, 8, 6});
    for (auto& t : lake.tables) {
        t.card_ids = {lake.cards[rng.below(n_cards)].id};
        if (rng.chance(1, 5)) {
            const auto& other = lake.cards[rng.below(n_cards)].id;
            if (other != t.card_ids.front()) {
                t.card_ids.push_back(other);
            }
        }
    }
    link(lake.cards, lake.tables);
    return lake;
}

std::string random_query(Rng& rng)
{
    std::string q;
    const auto words = rng.between(1, 4);
    for (std::size_t w = 0; w < words; ++w) {
        if (w) {
            q += ' ';
        }
        q += rng.pick(kCardWords);
    }
    return q;
}

EvidenceTable random_orientable_table(Rng& rng)
{
    const auto cols = rng.between(2, 6);
    const auto rows = rng.between(1, 8);
    std::vector<std::string> headers = {rng.chance(1, 2) ? "model" : "name"};
    for (auto& h : sample_distinct(rng, kOrientHeaders, cols - 1)) {
        headers.push_back(h);
    }
    auto keys = sample_distinct(rng, kOrientKeys, rows);
    std::vector<std::vector<std::string>> cells;
    for (const auto& key : keys) {
        std::vector<std::string> r = {key};
        for (std::size_t j = 1; j < cols; ++j) {
            r.push_back(rng.chance(1, 6) ? std::string{} : rng.pick(kNumbers));
        }
        cells.push_back(std::move(r));
    }
    return make_table("q", std::move(headers), cells, {"c"});
}

Lake ingest_fixture()
{
    Rng rng(20);
    Lake lake;
    for (std::size_t i = 0; i < 20; ++i) {
        ModelCard c;
        c.id = "fixture/model-" + std::to_string(i);
        c.text = "Model " + std::to_string(i) + " card. " + random_query(rng);
        c.tags = {"synthetic"};
        lake.cards.push_back(std::move(c));
    }
    auto tables = random_tables(rng, {100, 6, 5});
    while (tables.size() < 100) {
        auto more = random_tables(rng, {100 - tables.size(), 6, 5});
        for (auto& t : more) {
            tables.push_back(std::move(t));
        }
    }
    for (std::size_t i = 0; i < tables.size(); ++i) {
        auto& t = tables[i];
        t.id = "fixture/table-" + std::to_string(i);
        t.card_ids = {lake.cards[i % 20].id};
        if (i % 7 == 0) {
            t.card_ids.push_back(lake.cards[(i + 3) % 20].id);
        }
    }
    lake.tables = std::move(tables);
    link(lake.cards, lake.tables);
    return lake;
}

Lake kimi_fixture()
{
    Lake lake;
    ModelCard c;
    c.id = "luisra/Kimi-K2-Instruct-4bit";
    c.text =
        "# Kimi-K2-Instruct-4bit\n\nThis model was converted to MLX format from moonshotai/Kimi-K2-Instruct "
        "using 4-bit quantization (group size 64).\n\n## Evaluation\n\n| Benchmark | Metric | "
        "Kimi-K2-Instruct-4bit |\n|---|---|---|\n| LiveCodeBench v6 | Pass@1 | 0.537 |\n";
    c.tags = {"mlx", "text-generation", "base_model:moonshotai/Kimi-K2-Instruct",
              "base_model:quantized:moonshotai/Kimi-K2-Instruct", "4-bit"};
    lake.cards.push_back(c);
    lake.tables.push_back(make_table("luisra/Kimi-K2-Instruct-4bit#t1", {"Benchmark", "Metric", "Kimi-K2-Instruct-4bit"},
                                     {{"LiveCodeBench v6", "Pass@1", "0.537"}}, {c.id}));
    link(lake.cards, lake.tables);
    return lake;
}

namespace {

struct Family {
    std::string slug;
    std::string key_header;
    std::string metric_header;
    std::vector<std::string> benchmarks;
    std::string query;
    std::string anchor_text;
    std::string decoy_text;
};

const std::vector<Family>& families()
{
    static const std::vector<Family> f = {
        {"coder", "Coding benchmark", "Pass@1", {"LiveCodeBench v6", "HumanEval", "MBPP"},
         "Which models report LiveCodeBench results?",
         "Code model. Reports LiveCodeBench results and other coding benchmark results.",
         "Which models report LiveCodeBench results? A discussion of LiveCodeBench reporting."},
        {"mathstral", "Math benchmark", "Accuracy", {"GSM8K", "MATH", "AIME 2024"},
         "Models evaluated on GSM8K grade school math",
         "Math model evaluated on GSM8K grade school math word problems.",
         "Models evaluated on GSM8K grade school math: a reading list."},
        {"scholar", "Knowledge eval", "5-shot", {"MMLU", "MMLU-Pro", "GPQA"},
         "Strong MMLU knowledge models",
         "Knowledge model with strong MMLU knowledge scores.",
         "Strong MMLU knowledge models are popular; this note covers MMLU knowledge."},
        {"sense", "Commonsense task", "Acc norm", {"HellaSwag", "WinoGrande", "PIQA"},
         "HellaSwag commonsense leaderboard models",
         "Commonsense model on the HellaSwag commonsense leaderboard.",
         "HellaSwag commonsense leaderboard models: collected commentary."},
        {"honest", "Safety eval", "MC2", {"TruthfulQA", "ToxiGen", "BBQ"},
         "TruthfulQA truthful chat models",
         "Truthful chat model measured on TruthfulQA.",
         "TruthfulQA truthful chat models, an overview of TruthfulQA."},
    };
    return f;
}

const std::vector<std::string> kEvidenceBlurbs = {
    "General purpose assistant trained on curated web data with a long context window.",
    "Compact open weights release intended for on device deployment and low latency serving.",
    "Research checkpoint released with training recipe, tokenizer files and license terms.",
};

}  // namespace

Lake separation_lake()
{
    Rng rng(5);
    Lake lake;
    for (const auto& fam : families()) {
        auto leaderboard = [&](const std::string& card_id, const std::string& tid) {
            std::vector<std::vector<std::string>> rows;
            for (const auto& b : fam.benchmarks) {
                rows.push_back({b, std::to_string(30 + rng.below(60)) + "." + std::to_string(rng.below(10))});
            }
            return make_table(tid, {fam.key_header, fam.metric_header}, rows, {card_id});
        };

        ModelCard anchor{fam.slug + "-lab/" + fam.slug + "-anchor", fam.anchor_text, {"evaluation"}, {}};
        lake.tables.push_back(leaderboard(anchor.id, anchor.id + "#scores"));
        lake.cards.push_back(anchor);

        for (std::size_t e = 0; e < kEvidenceBlurbs.size(); ++e) {
            ModelCard card{"vendor" + std::to_string(e) + "/" + fam.slug + "-" + std::to_string(e),
                           kEvidenceBlurbs[e], {"text-generation"}, {}};
            lake.tables.push_back(leaderboard(card.id, card.id + "#scores"));
            lake.tables.push_back(make_table(card.id + "#config", {"Hyperparameter", "Value"},
                                             {{"learning rate", "2e-5"}, {"optimizer", "AdamW"}, {"schedule", "cosine"}},
                                             {card.id}));
            lake.cards.push_back(std::move(card));
        }
        lake.cards.push_back(ModelCard{"notes/" + fam.slug + "-reading-list", fam.decoy_text, {}, {}});
    }
    for (std::size_t i = 0; i < families().size(); ++i) {
        const auto& owner = lake.cards[i * (kEvidenceBlurbs.size() + 2) + 1].id;
        lake.tables.push_back(make_table(owner + "#size", {"Component", "Parameters"},
                                         {{"embedding", "0.3B"}, {"transformer", "6.7B"}}, {owner}));
    }
    link(lake.cards, lake.tables);
    return lake;
}

std::vector<BenchmarkQuery> separation_queries()
{
    std::vector<BenchmarkQuery> out;
    for (const auto& fam : families()) {
        out.push_back({"sep-" + fam.slug, fam.query, fam.query, classify_query_fallback(fam.query)});
    }
    return out;
}

std::vector<BenchmarkQuery> benchmark_queries()
{
    const std::vector<std::string> texts = {
        "Could you recommend papers that evaluate code generation on LiveCodeBench?",
        "Which models report LiveCodeBench results?",
        "Models evaluated on GSM8K grade school math",
        "Strong MMLU knowledge models",
        "HellaSwag commonsense leaderboard models",
        "TruthfulQA truthful chat models",
        "Compare studies of math reasoning versus code generation",
        "How do I find a 4-bit quantized model for chat?",
        "Why do quantized models lose accuracy on GSM8K?",
        "Are there publications on LoRA adapters for multilingual chat?",
        "Has anyone tried merged models in practice?",
        "Pros and cons of distilled checkpoints",
        "Papers reporting Pass@1 on HumanEval",
        "Literature on commonsense reasoning benchmarks",
        "Articles about safety evaluation with TruthfulQA",
        "Which is better for knowledge tasks, MMLU-tuned or base models?",
        "Recommend studies with exact match results on SQuAD",
        "Models derived from a base model with MBPP scores",
        "Works well on legal documents",
        "Fine-tuned models for German translation",
        "What causes low WinoGrande accuracy?",
        "Guide to choosing an instruction tuned model",
        "Publications comparing HellaSwag and PIQA performance",
        "Open models evaluated on AIME 2024",
        "Research on long context assistants",
    };
    std::vector<BenchmarkQuery> out;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        char id[8];
        std::snprintf(id, sizeof id, "q%02zu", i + 1);
        BenchmarkQuery q;
        q.id = id;
        q.original = texts[i];
        q.rewritten = rewrite_query_fallback(texts[i]);
        q.intent = classify_query_fallback(q.rewritten);
        out.push_back(std::move(q));
    }
    return out;
}

}  // namespace modelsearch::synthetic
