#include "xling/skipgram.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "xling/error.hpp"
#include "xling/random.hpp"

namespace xling {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log(s(x)), stable for large |x|.
double log_sigmoid(double x) {
    return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

void check_lengths(std::span<const double> center, std::span<const double> context,
                   const std::vector<std::span<const double>>& negatives) {
    if (context.size() != center.size())
        throw ShapeError("center and context vectors differ in length");
    for (auto n : negatives)
        if (n.size() != center.size()) throw ShapeError("negative vector has the wrong length");
}

}  // namespace

double sgns_loss(std::span<const double> center, std::span<const double> context,
                 const std::vector<std::span<const double>>& negatives) {
    check_lengths(center, context, negatives);
    double loss = -log_sigmoid(dot(center, context));
    for (auto n : negatives) loss -= log_sigmoid(-dot(center, n));
    return loss;
}

SgnsGradient sgns_gradient(std::span<const double> center, std::span<const double> context,
                           const std::vector<std::span<const double>>& negatives) {
    check_lengths(center, context, negatives);
    const std::size_t d = center.size();
    SgnsGradient g;
    g.center.assign(d, 0.0);
    g.context.assign(d, 0.0);

    double pos = dot(center, context);
    double coef = sigmoid(pos) - 1.0;
    g.loss = -log_sigmoid(pos);
    for (std::size_t i = 0; i < d; ++i) {
        g.center[i] += coef * context[i];
        g.context[i] = coef * center[i];
    }
    for (auto n : negatives) {
        double s = dot(center, n);
        double c = sigmoid(s);
        g.loss -= log_sigmoid(-s);
        std::vector<double> gn(d);
        for (std::size_t i = 0; i < d; ++i) {
            g.center[i] += c * n[i];
            gn[i] = c * center[i];
        }
        g.negatives.push_back(std::move(gn));
    }
    return g;
}

UnigramSampler::UnigramSampler(const std::vector<std::size_t>& counts, double power) {
    cumulative_.reserve(counts.size());
    double total = 0.0;
    for (std::size_t c : counts) {
        total += c > 0 ? std::pow(static_cast<double>(c), power) : 0.0;
        cumulative_.push_back(total);
    }
    if (total <= 0.0) throw InputError("negative sampling needs at least one counted token");
}

std::size_t UnigramSampler::sample(double uniform01) const {
    double target = uniform01 * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    if (it == cumulative_.end()) --it;
    return static_cast<std::size_t>(it - cumulative_.begin());
}

double UnigramSampler::probability(std::size_t id) const {
    double lo = id == 0 ? 0.0 : cumulative_[id - 1];
    return (cumulative_[id] - lo) / cumulative_.back();
}

FinetuneResult skipgram_finetune(const WordEmbeddings& embeddings,
                                 const std::vector<LemmaSentence>& corpus,
                                 const SkipGramConfig& config) {
    if (corpus.empty()) throw InputError("fine-tuning corpus is empty");
    if (embeddings.dim() == 0) throw InputError("embeddings have dimension 0");
    if (config.window == 0) throw ConfigError("skip-gram window must be at least 1");
    if (!(config.initial_learning_rate >= 0.0) || !(config.final_learning_rate >= 0.0))
        throw ConfigError("learning rates must be non-negative");

    const std::size_t dim = embeddings.dim();
    Rng rng(config.rng_seed);

    // Vocabulary: input lemmas by rank, then admitted OOV lemmas by first appearance.
    std::vector<std::string> vocab = embeddings.lemmas();
    std::map<std::string, std::size_t, std::less<>> ids;
    for (std::size_t i = 0; i < vocab.size(); ++i) ids.emplace(vocab[i], i);

    std::vector<std::string> oov_order;
    std::map<std::string, std::size_t, std::less<>> oov_counts;
    for (const auto& s : corpus)
        for (const auto& l : s.lemmas) {
            if (ids.count(l)) continue;
            if (oov_counts[l]++ == 0) oov_order.push_back(l);
        }

    std::vector<double> in(vocab.size() * dim);
    for (std::size_t r = 0; r < vocab.size(); ++r) {
        Eigen::VectorXd m = embeddings.mean_vector(r);
        std::copy(m.data(), m.data() + dim, in.begin() + static_cast<std::ptrdiff_t>(r * dim));
    }

    FinetuneResult result;
    if (config.admit_oov) {
        for (const auto& l : oov_order) {
            if (oov_counts[l] < config.min_count) continue;
            ids.emplace(l, vocab.size());
            vocab.push_back(l);
            for (std::size_t j = 0; j < dim; ++j)
                in.push_back((rng.uniform01() - 0.5) / static_cast<double>(dim));
            ++result.admitted_oov;
        }
    }
    std::vector<double> out(in.size(), 0.0);

    // Token stream restricted to the vocabulary.
    std::vector<std::vector<std::size_t>> stream;
    std::vector<std::size_t> counts(vocab.size(), 0);
    std::size_t total_tokens = 0;
    for (const auto& s : corpus) {
        std::vector<std::size_t> ids_in_sentence;
        for (const auto& l : s.lemmas)
            if (auto it = ids.find(l); it != ids.end()) {
                ids_in_sentence.push_back(it->second);
                ++counts[it->second];
            }
        total_tokens += ids_in_sentence.size();
        stream.push_back(std::move(ids_in_sentence));
    }

    auto span_of = [dim](std::vector<double>& table, std::size_t id) {
        return std::span<double>(table.data() + id * dim, dim);
    };

    if (config.epochs > 0 && total_tokens > 0) {
        UnigramSampler sampler(counts, config.unigram_power);
        const double lr0 = config.initial_learning_rate;
        const double lr_end = std::min(config.final_learning_rate, lr0);
        const double total_steps = static_cast<double>(config.epochs * total_tokens);
        std::size_t processed = 0;

        std::vector<std::size_t> order(stream.size());
        for (std::size_t e = 0; e < config.epochs; ++e) {
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
            if (config.shuffle) rng.shuffle(order);
            double epoch_loss = 0.0;
            std::size_t tuples = 0;
            for (std::size_t si : order) {
                const auto& tokens = stream[si];
                for (std::size_t i = 0; i < tokens.size(); ++i) {
                    double lr = lr0 + (lr_end - lr0) * static_cast<double>(processed) / total_steps;
                    ++processed;
                    std::size_t lo = i >= config.window ? i - config.window : 0;
                    std::size_t hi = std::min(tokens.size() - 1, i + config.window);
                    for (std::size_t j = lo; j <= hi; ++j) {
                        if (j == i) continue;
                        std::size_t center = tokens[i];
                        std::size_t context = tokens[j];
                        std::vector<std::size_t> negs;
                        for (std::size_t k = 0; k < config.negative_samples; ++k) {
                            std::size_t n = sampler.sample(rng.uniform01());
                            if (n != context) negs.push_back(n);
                        }
                        std::vector<std::span<const double>> neg_vecs;
                        for (std::size_t n : negs) neg_vecs.push_back(span_of(out, n));
                        SgnsGradient g =
                            sgns_gradient(span_of(in, center), span_of(out, context), neg_vecs);
                        epoch_loss += g.loss;
                        ++tuples;
                        if (lr == 0.0) continue;
                        auto u = span_of(in, center);
                        auto v = span_of(out, context);
                        for (std::size_t c = 0; c < dim; ++c) {
                            u[c] -= lr * g.center[c];
                            v[c] -= lr * g.context[c];
                        }
                        for (std::size_t k = 0; k < negs.size(); ++k) {
                            auto nv = span_of(out, negs[k]);
                            for (std::size_t c = 0; c < dim; ++c) nv[c] -= lr * g.negatives[k][c];
                        }
                    }
                }
            }
            result.epoch_loss.push_back(tuples ? epoch_loss / static_cast<double>(tuples) : 0.0);
        }
    }

    EmbeddingsBuilder builder(embeddings.language(), dim);
    for (std::size_t id = 0; id < vocab.size(); ++id)
        builder.add(vocab[id], std::span<const double>(in.data() + id * dim, dim));
    result.embeddings = std::move(builder).build();
    return result;
}

}  // namespace xling
