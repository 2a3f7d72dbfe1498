#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "litscreen/corpus.hpp"

namespace litscreen::synthetic {

/// Knobs of the planted-signal corpus used by the acceptance tests.
struct Options {
    std::size_t n_documents = 10000;
    /// Relevant documents = round(n_documents * relevant_share); 1/11 gives 10:1.
    double relevant_share = 1.0 / 11.0;
    std::size_t n_planted = 100;
    std::size_t noise_vocabulary = 3000;
    /// Per-document inclusion probability of each planted token.
    double planted_rate_relevant = 0.05;
    double planted_rate_irrelevant = 0.015;
    std::size_t min_length = 60;
    std::size_t max_length = 140;
    std::uint64_t seed = 1;
};

struct Generated {
    corpus::Corpus corpus;
    /// Surface forms of the planted discriminative tokens.
    std::vector<std::string> planted;
    std::vector<std::string> noise;
};

/// Documents mix concept mentions (sex work, HIV, violence; some forms the
/// keyword query sees, some only the clusters see), planted tokens with
/// class-dependent rates, and Zipf-distributed noise words. Irrelevant
/// documents include HIV-only, violence-only and sex-work-without-outcome
/// studies so the keyword query is imperfect. Deterministic per seed.
Generated generate(const Options& options);

}  // namespace litscreen::synthetic
