#include "xling/sentiment.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "xling/error.hpp"
#include "xling/random.hpp"
#include "xling/text.hpp"

namespace xling {

SentimentModel::SentimentModel(std::size_t dim, std::size_t buckets)
    : dim_(dim), buckets_(buckets), weights_(RowMatrix::Zero(2, static_cast<Eigen::Index>(dim))) {
    if (dim == 0) throw InputError("sentiment model dimension must be positive");
    if (buckets == 0 || !std::has_single_bit(buckets))
        throw ConfigError("bigram bucket count must be a power of two");
}

Eigen::VectorXd SentimentModel::bigram_row(std::uint64_t bucket) const {
    auto it = bigrams_.find(bucket);
    if (it == bigrams_.end()) return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_));
    return it->second;
}

Eigen::VectorXd& SentimentModel::bigram_row_mut(std::uint64_t bucket) {
    auto [it, fresh] = bigrams_.try_emplace(bucket);
    if (fresh) it->second = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_));
    return it->second;
}

std::uint64_t bigram_bucket(std::string_view first, std::string_view second, std::size_t buckets) {
    std::string key;
    key.reserve(first.size() + second.size() + 1);
    key.append(first);
    key.push_back('\x01');
    key.append(second);
    return fnv1a64(key) & (static_cast<std::uint64_t>(buckets) - 1);
}

std::optional<TransferMode> parse_transfer_mode(std::string_view name) {
    if (name == "direct") return TransferMode::direct;
    if (name == "substitute") return TransferMode::substitute;
    if (name == "boost") return TransferMode::boost;
    return std::nullopt;
}

std::string_view to_string(TransferMode mode) {
    switch (mode) {
        case TransferMode::direct: return "direct";
        case TransferMode::substitute: return "substitute";
        case TransferMode::boost: return "boost";
    }
    return "direct";
}

// ---------------------------------------------------------------------------

VectorResolver::VectorResolver(const WordEmbeddings& source, TransferOptions options)
    : source_(&source), options_(std::move(options)) {
    if (options_.mode == TransferMode::direct) return;
    if (!options_.anchor)
        throw ConfigError(std::string(to_string(options_.mode)) + " mode needs an anchor space");
    if (options_.anchor->dim() != source.dim())
        throw ConfigError("anchor and source spaces differ in dimension");
    unit_anchor_ = unit_rows(options_.anchor->matrix());
    if (options_.mode == TransferMode::boost) {
        if (!options_.dictionary) throw ConfigError("boost mode needs a translation dictionary");
        for (std::size_t i = 0; i < options_.dictionary->lexemes.size(); ++i)
            lexemes_by_lemma_[options_.dictionary->lexemes[i].lemma].push_back(i);
    }
}

std::optional<std::size_t> VectorResolver::substitute_row(const std::string& lemma) const {
    if (!options_.anchor) return std::nullopt;
    auto rank = source_->rank_of(lemma);
    if (!rank) return std::nullopt;
    Eigen::VectorXd q = source_->mean_vector(*rank);
    double n = q.norm();
    if (n == 0.0) return std::nullopt;
    Eigen::VectorXd sims = unit_anchor_ * (q / n);
    const auto& anchor = *options_.anchor;
    std::optional<std::size_t> best;
    double best_score = -std::numeric_limits<double>::infinity();
    // Lemmas in rank order, rows in registration order: the first maximum wins.
    for (std::size_t r = 0; r < anchor.lemma_count(); ++r)
        for (std::size_t row : anchor.rows_of(r)) {
            double s = sims(static_cast<Eigen::Index>(row));
            if (s > best_score) {
                best_score = s;
                best = row;
            }
        }
    return best;
}

std::optional<Eigen::VectorXd> VectorResolver::dictionary_centroid(const std::string& lemma) const {
    auto it = lexemes_by_lemma_.find(lemma);
    if (it == lexemes_by_lemma_.end()) return std::nullopt;
    Lexeme merged;
    merged.lemma = lemma;
    for (std::size_t i : it->second) {
        const auto& groups = options_.dictionary->lexemes[i].meaning_groups;
        merged.meaning_groups.insert(merged.meaning_groups.end(), groups.begin(), groups.end());
    }
    return project_lexeme(merged, options_.resource_spaces);
}

std::optional<Eigen::VectorXd> VectorResolver::vector(const std::string& lemma) const {
    switch (options_.mode) {
        case TransferMode::direct: {
            auto rank = source_->rank_of(lemma);
            if (!rank) return std::nullopt;
            return source_->mean_vector(*rank);
        }
        case TransferMode::substitute: {
            auto row = substitute_row(lemma);
            if (!row) return std::nullopt;
            return Eigen::VectorXd(options_.anchor->matrix().row(static_cast<Eigen::Index>(*row)).transpose());
        }
        case TransferMode::boost: {
            std::optional<Eigen::VectorXd> sub;
            if (auto row = substitute_row(lemma))
                sub = options_.anchor->matrix().row(static_cast<Eigen::Index>(*row)).transpose();
            auto centroid = dictionary_centroid(lemma);
            if (sub && centroid) return Eigen::VectorXd((*sub + *centroid) / 2.0);
            if (sub) return sub;
            return centroid;
        }
    }
    return std::nullopt;
}

std::string VectorResolver::bigram_key(const std::string& lemma) const {
    if (options_.bigrams_from_anchor && options_.mode != TransferMode::direct)
        if (auto row = substitute_row(lemma))
            return options_.anchor->lemma(options_.anchor->owner_of_row(*row));
    return lemma;
}

// ---------------------------------------------------------------------------

SentenceUnits sentence_units(const std::vector<std::string>& lemmas, const VectorResolver& resolver,
                             std::size_t buckets) {
    if (lemmas.empty()) throw InputError("cannot featurize an empty sentence");
    SentenceUnits units;
    std::vector<std::string> keys;
    keys.reserve(lemmas.size());
    for (const auto& l : lemmas) {
        if (auto v = resolver.vector(l)) units.words.push_back(std::move(*v));
        keys.push_back(resolver.bigram_key(l));
    }
    for (std::size_t i = 0; i + 1 < keys.size(); ++i)
        units.buckets.push_back(bigram_bucket(keys[i], keys[i + 1], buckets));
    return units;
}

Eigen::VectorXd features(const SentenceUnits& units, const SentimentModel& model) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.dim()));
    if (units.count() == 0) return f;
    for (const auto& w : units.words) {
        if (static_cast<std::size_t>(w.size()) != model.dim())
            throw ShapeError("word vector length does not match the model");
        f += w;
    }
    for (auto b : units.buckets) {
        auto it = model.bigram_rows().find(b);
        if (it != model.bigram_rows().end()) f += it->second;
    }
    return f / static_cast<double>(units.count());
}

Eigen::VectorXd featurize(const std::vector<std::string>& lemmas, const WordEmbeddings& embeddings,
                          const SentimentModel& model) {
    VectorResolver direct(embeddings, {});
    return features(sentence_units(lemmas, direct, model.buckets()), model);
}

std::array<double, 2> class_probabilities(const SentimentModel& model, const Eigen::VectorXd& f) {
    std::array<double, 2> z{};
    for (int c = 0; c < 2; ++c) z[c] = model.weights().row(c).dot(f.transpose()) + model.bias()(c);
    double m = std::max(z[0], z[1]);
    double e0 = std::exp(z[0] - m);
    double e1 = std::exp(z[1] - m);
    double sum = e0 + e1;
    return {e0 / sum, e1 / sum};
}

double example_loss(const SentimentModel& model, const SentenceUnits& units, Sentiment label) {
    Eigen::VectorXd f = features(units, model);
    std::array<double, 2> z{};
    for (int c = 0; c < 2; ++c) z[c] = model.weights().row(c).dot(f.transpose()) + model.bias()(c);
    double m = std::max(z[0], z[1]);
    double lse = m + std::log(std::exp(z[0] - m) + std::exp(z[1] - m));
    return lse - z[static_cast<int>(label)];
}

ExampleGradient example_gradient(const SentimentModel& model, const SentenceUnits& units,
                                 Sentiment label) {
    Eigen::VectorXd f = features(units, model);
    auto p = class_probabilities(model, f);
    int y = static_cast<int>(label);
    ExampleGradient g;
    g.loss = -std::log(std::max(p[y], std::numeric_limits<double>::min()));
    double dz0 = p[0] - (y == 0 ? 1.0 : 0.0);
    double dz1 = p[1] - (y == 1 ? 1.0 : 0.0);
    g.weights.resize(2, f.size());
    g.weights.row(0) = dz0 * f.transpose();
    g.weights.row(1) = dz1 * f.transpose();
    g.bias = Eigen::Vector2d(dz0, dz1);
    if (!units.buckets.empty()) {
        const double inv = 1.0 / static_cast<double>(units.count());
        Eigen::VectorXd df(f.size());
        for (Eigen::Index j = 0; j < f.size(); ++j)
            df(j) = (model.weights()(0, j) * dz0 + model.weights()(1, j) * dz1) * inv;
        for (auto b : units.buckets) {
            auto [it, fresh] = g.bigrams.try_emplace(b, Eigen::VectorXd::Zero(f.size()));
            it->second += df;
        }
    }
    return g;
}

// ---------------------------------------------------------------------------

std::vector<LabeledSentence> read_labeled_corpus(std::istream& in) {
    std::vector<LabeledSentence> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view body = chomp(line);
        if (trim(body).empty()) continue;
        auto tab = body.find('\t');
        if (tab == std::string_view::npos)
            throw FormatError("expected '<label>\\t<lemmas>'", line_no);
        auto label = parse_sentiment(trim(body.substr(0, tab)));
        if (!label) continue;
        LabeledSentence s;
        s.label = *label;
        for (auto tok : split_ws(body.substr(tab + 1))) s.lemmas.emplace_back(tok);
        if (s.lemmas.empty()) throw FormatError("sentence has no lemmas", line_no);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<LabeledSentence> load_labeled_corpus(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open corpus " + path.string());
    try {
        return read_labeled_corpus(in);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

namespace {

Prediction predict_units(const SentenceUnits& units, const SentimentModel& model) {
    Prediction p;
    p.probabilities = class_probabilities(model, features(units, model));
    p.positive_probability = p.probabilities[1];
    p.label = p.probabilities[1] > p.probabilities[0] ? Sentiment::positive : Sentiment::negative;
    return p;
}

}  // namespace

TrainResult train(const std::vector<LabeledSentence>& corpus, const WordEmbeddings& embeddings,
                  const SentimentTrainConfig& config) {
    bool seen[2] = {false, false};
    for (const auto& s : corpus) seen[static_cast<int>(s.label)] = true;
    if (!seen[0] || !seen[1])
        throw TrainingError("training corpus must contain both positive and negative sentences");

    TrainResult result;
    result.model = SentimentModel(embeddings.dim(), config.buckets);
    SentimentModel& model = result.model;

    VectorResolver direct(embeddings, {});
    std::vector<SentenceUnits> units;
    units.reserve(corpus.size());
    for (const auto& s : corpus) units.push_back(sentence_units(s.lemmas, direct, config.buckets));

    Rng rng(config.rng_seed);
    std::vector<std::size_t> order(corpus.size());
    const double total = static_cast<double>(config.epochs * corpus.size());
    std::size_t step = 0;
    for (std::size_t e = 0; e < config.epochs; ++e) {
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        if (config.shuffle) rng.shuffle(order);
        for (std::size_t i : order) {
            double lr = config.learning_rate * (1.0 - static_cast<double>(step) / total);
            ++step;
            ExampleGradient g = example_gradient(model, units[i], corpus[i].label);
            model.weights() -= lr * g.weights;
            model.bias() -= lr * g.bias;
            for (const auto& [b, grad] : g.bigrams) model.bigram_row_mut(b) -= lr * grad;
        }
        std::size_t correct = 0;
        for (std::size_t i = 0; i < corpus.size(); ++i)
            if (predict_units(units[i], model).label == corpus[i].label) ++correct;
        result.accuracy_trace.push_back(static_cast<double>(correct) /
                                        static_cast<double>(corpus.size()));
    }
    model.set_trained_epochs(config.epochs);
    return result;
}

Prediction predict(const std::vector<std::string>& lemmas, const SentimentModel& model,
                   const VectorResolver& resolver) {
    return predict_units(sentence_units(lemmas, resolver, model.buckets()), model);
}

Prediction predict(const std::vector<std::string>& lemmas, const SentimentModel& model,
                   const WordEmbeddings& source, const TransferOptions& options) {
    VectorResolver resolver(source, options);
    return predict(lemmas, model, resolver);
}

std::string Evaluation::to_text() const {
    std::ostringstream out;
    char acc[32];
    std::snprintf(acc, sizeof(acc), "%.4f", accuracy);
    out << "total: " << total << '\n'
        << "correct: " << correct << '\n'
        << "accuracy: " << acc << '\n'
        << "confusion.negative.negative: " << confusion[0][0] << '\n'
        << "confusion.negative.positive: " << confusion[0][1] << '\n'
        << "confusion.positive.negative: " << confusion[1][0] << '\n'
        << "confusion.positive.positive: " << confusion[1][1] << '\n';
    return out.str();
}

Evaluation evaluate(const std::vector<LabeledSentence>& test, const SentimentModel& model,
                    const VectorResolver& resolver) {
    if (test.empty()) throw InputError("evaluation set is empty");
    Evaluation ev;
    for (const auto& s : test) {
        Prediction p = predict(s.lemmas, model, resolver);
        int gold = static_cast<int>(s.label);
        int got = static_cast<int>(p.label);
        ++ev.confusion[gold][got];
        ++ev.total;
        if (gold == got) ++ev.correct;
    }
    ev.accuracy = static_cast<double>(ev.correct) / static_cast<double>(ev.total);
    return ev;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                 static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    out.write(b, 4);
}

void put_f32(std::string& buf, double v) {
    std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw FormatError("truncated model header");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void get_f32s(std::istream& in, std::vector<double>& dst, std::size_t n) {
    std::string raw(n * 4, '\0');
    if (!in.read(raw.data(), static_cast<std::streamsize>(raw.size())))
        throw FormatError("truncated model body");
    dst.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t bits = 0;
        for (int k = 0; k < 4; ++k)
            bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(raw[i * 4 + k])) << (8 * k);
        dst[i] = std::bit_cast<float>(bits);
    }
}

}  // namespace

void write_model(const SentimentModel& model, std::ostream& out) {
    out.write("XLSM", 4);
    put_u32(out, kModelFormatVersion);
    put_u32(out, static_cast<std::uint32_t>(model.dim()));
    put_u32(out, static_cast<std::uint32_t>(model.buckets()));
    std::string buf;
    for (Eigen::Index c = 0; c < 2; ++c)
        for (Eigen::Index j = 0; j < model.weights().cols(); ++j) put_f32(buf, model.weights()(c, j));
    put_f32(buf, model.bias()(0));
    put_f32(buf, model.bias()(1));
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));

    const std::string zero_row(model.dim() * 4, '\0');
    for (std::uint64_t b = 0; b < model.buckets(); ++b) {
        auto it = model.bigram_rows().find(b);
        if (it == model.bigram_rows().end()) {
            out.write(zero_row.data(), static_cast<std::streamsize>(zero_row.size()));
            continue;
        }
        buf.clear();
        for (Eigen::Index j = 0; j < it->second.size(); ++j) put_f32(buf, it->second(j));
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    }
}

SentimentModel read_model(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::string_view(magic, 4) != "XLSM")
        throw FormatError("not a sentiment model (bad magic)");
    std::uint32_t version = get_u32(in);
    if (version != kModelFormatVersion)
        throw FormatError("unsupported model format version " + std::to_string(version));
    std::uint32_t dim = get_u32(in);
    std::uint32_t buckets = get_u32(in);
    if (dim == 0 || buckets == 0 || !std::has_single_bit(buckets))
        throw FormatError("invalid model header");

    SentimentModel model(dim, buckets);
    std::vector<double> vals;
    get_f32s(in, vals, 2 * static_cast<std::size_t>(dim) + 2);
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t j = 0; j < dim; ++j)
            model.weights()(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j)) = vals[c * dim + j];
    model.bias() = Eigen::Vector2d(vals[2 * dim], vals[2 * dim + 1]);
    for (std::uint64_t b = 0; b < buckets; ++b) {
        get_f32s(in, vals, dim);
        if (std::all_of(vals.begin(), vals.end(), [](double v) { return v == 0.0; })) continue;
        model.bigram_row_mut(b) = Eigen::Map<Eigen::VectorXd>(vals.data(), dim);
    }
    return model;
}

void save_model(const SentimentModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    write_model(model, out);
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

SentimentModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model " + path.string());
    try {
        return read_model(in);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

}  // namespace xling
