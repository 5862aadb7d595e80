#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>

namespace xling::toy {

/// Synthetic multilingual world: one concept space seen through three
/// resource-rich "languages" (rotated, noisy, differently sized copies), an
/// endangered language known only through a dictionary and a small treebank,
/// and sentiment data driven by a hidden polarity direction.
struct ToyWorldOptions {
    std::uint64_t seed = 2024;
    std::size_t concepts = 240;
    std::size_t base_dim = 24;
    std::size_t seed_pairs = 80;
    std::size_t dictionary_entries = 120;
    std::size_t treebank_sentences = 180;
    std::size_t train_sentences = 300;
    double noise = 0.02;
};

/// Writes eng/fin/rus embeddings, seed lexicons, the myv dictionary,
/// treebank, sentiment sidecar, English training corpus and a pipeline
/// config.json into `dir`.
void write_toy_world(const std::filesystem::path& dir, const ToyWorldOptions& options = {});

}  // namespace xling::toy
