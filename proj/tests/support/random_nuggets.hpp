// Random nugget stores and constraints for score-semantics checks.
#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "modelsearch/nuggets.hpp"
#include "modelsearch/synthetic.hpp"
#include "modelsearch/tokenize.hpp"

namespace oracle {

using namespace modelsearch;

struct NuggetCase {
    std::vector<std::string> cards;
    std::map<std::string, std::vector<Nugget>> nuggets;
    QueryConstraint constraint;
    std::vector<std::string> retrieved;  ///< may repeat ids
};

inline NuggetCase random_nugget_case(synthetic::Rng& rng)
{
    static const std::vector<std::vector<std::string>> pools = {
        {"org/a", "org/b", "Org/A"},
        {"meta/llama", "qwen/qwen2", "Meta/Llama"},
        {"quantization", "finetune", "adapter", "Quantization"},
        {"LiveCodeBench v6", "livecodebench", "GSM8K", "MMLU", "gsm8k"},
        {"Pass@1", "accuracy", "quantization bits", "Accuracy"},
        {"0.537", "4-bit", "80", "80.0", "4 bit"},
    };
    NuggetCase c;
    const auto n_cards = rng.between(1, 5);
    for (std::size_t i = 0; i < n_cards; ++i) {
        auto id = "card" + std::to_string(i);
        c.cards.push_back(id);
        auto& list = c.nuggets[id];
        const auto n = rng.between(0, 6);
        for (std::size_t k = 0; k < n; ++k) {
            Nugget nug;
            nug.card_id = id;
            for (std::size_t a = 0; a < 6; ++a) {
                if (rng.chance(3, 5)) {
                    nug.values[a] = rng.pick(pools[a]);
                }
            }
            if (nug.empty()) {
                nug.values[3] = "MMLU";
            }
            if (std::find(list.begin(), list.end(), nug) == list.end()) {
                list.push_back(nug);
            }
        }
    }
    for (std::size_t a = 0; a < 6; ++a) {
        auto roll = rng.below(4);
        if (roll == 1) {
            c.constraint.attributes[a].kind = AttributeConstraint::Kind::required_nonnull;
        } else if (roll == 2) {
            c.constraint.attributes[a].kind = AttributeConstraint::Kind::must_contain;
            auto toks = normalize_token(rng.pick(pools[a]));
            c.constraint.attributes[a].terms.push_back(toks[rng.below(toks.size())]);
        }
    }
    const auto r = rng.between(0, 6);
    for (std::size_t i = 0; i < r; ++i) {
        c.retrieved.push_back(rng.pick(c.cards));
    }
    return c;
}

inline NuggetStore store_of(const NuggetCase& c)
{
    NuggetStore s;
    for (const auto& id : c.cards) {
        s.add(id, c.nuggets.at(id));
    }
    return s;
}

}  // namespace oracle
