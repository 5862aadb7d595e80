#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "xling/align.hpp"
#include "xling/conllu.hpp"
#include "xling/dictionary.hpp"
#include "xling/error.hpp"
#include "xling/reduce.hpp"
#include "xling/skipgram.hpp"
#include "xling/text.hpp"

#ifndef XLING_VERSION
#define XLING_VERSION "0.0.0"
#endif

namespace xling::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::ostream* g_log = &std::cerr;

void log(std::string_view stage, const std::string& message) {
    if (g_log) *g_log << "[" << stage << "] " << message << '\n';
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void require_file(const fs::path& p, const std::string& what) {
    if (!fs::is_regular_file(p)) throw ConfigError(what + " not found: " + p.string());
}

fs::path artifact(const PipelineConfig& c, std::string_view stage, const std::string& name) {
    return c.output_dir / stage / name;
}

// An earlier stage's output; missing means that stage has not run.
fs::path prior(const PipelineConfig& c, std::string_view stage, const std::string& name,
               std::string_view command) {
    fs::path p = artifact(c, stage, name);
    if (!fs::is_regular_file(p))
        throw ConfigError("missing " + p.string() + "; run `xling " + std::string(command) + "` first");
    return p;
}

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open " + p.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_bytes(const fs::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + p.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("write failed for " + p.string());
}

// Buffers a stage's artifacts and metrics, then publishes them together.
class StageWriter {
public:
    StageWriter(const PipelineConfig& config, std::string stage) : config_(config), stage_(std::move(stage)) {}

    void add(const std::string& name, std::string bytes) { files_[name] = std::move(bytes); }

    void add_embeddings(const std::string& name, const WordEmbeddings& e) {
        std::ostringstream s;
        write_word2vec_text(e, s);
        add(name, s.str());
    }

    void add_matrix(const std::string& name, const RowMatrix& m) {
        std::ostringstream s;
        write_matrix_text(m, s);
        add(name, s.str());
    }

    void metric(ojson record) {
        ojson line;
        line["stage"] = stage_;
        for (auto& [k, v] : record.items()) line[k] = v;
        metrics_.push_back(line.dump());
    }

    void commit() {
        const fs::path root = config_.output_dir;
        const fs::path dir = root / stage_;
        fs::create_directories(root);
        fs::remove_all(dir);
        fs::create_directories(dir);
        nlohmann::json files = nlohmann::json::object();
        for (const auto& [name, bytes] : files_) {
            write_bytes(dir / name, bytes);
            files[name] = hex64(fnv1a64(bytes));
        }

        nlohmann::json manifest = nlohmann::json::object();
        if (fs::is_regular_file(root / "manifest.json")) {
            try {
                manifest = nlohmann::json::parse(read_bytes(root / "manifest.json"));
            } catch (const nlohmann::json::exception&) {
                manifest = nlohmann::json::object();
            }
            if (!manifest.is_object()) manifest = nlohmann::json::object();
        }
        manifest["version"] = XLING_VERSION;
        manifest["config_hash"] = config_.hash();
        manifest["seed"] = config_.seed;
        manifest["stages"][stage_] = {{"files", files}};
        write_bytes(root / "manifest.json", manifest.dump(2) + "\n");

        std::string kept;
        if (fs::is_regular_file(root / "metrics.jsonl")) {
            std::istringstream in(read_bytes(root / "metrics.jsonl"));
            std::string line;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                auto j = nlohmann::json::parse(line, nullptr, false);
                if (!j.is_discarded() && j.is_object() && j.value("stage", "") == stage_) continue;
                kept += line + "\n";
            }
        }
        for (const auto& m : metrics_) kept += m + "\n";
        write_bytes(root / "metrics.jsonl", kept);
        log(stage_, "wrote " + std::to_string(files_.size()) + " files to " + dir.string());
    }

private:
    const PipelineConfig& config_;
    std::string stage_;
    std::map<std::string, std::string> files_;
    std::vector<std::string> metrics_;
};

SeedLexicon normalized_seed(const SeedLexicon& raw, const NormalizationPolicy& src,
                            const NormalizationPolicy& tgt) {
    SeedLexicon out{raw.source_language, raw.target_language, {}};
    for (const auto& [s, t] : raw.pairs) out.add(normalize_lemma(s, src), normalize_lemma(t, tgt));
    return out;
}

WordEmbeddings load_aligned(const PipelineConfig& c, const LanguageConfig& l) {
    return load_word2vec_text(prior(c, "aligned", l.code + ".vec", "align"), l.code);
}

TargetSpaces aligned_spaces(const PipelineConfig& c, std::map<std::string, WordEmbeddings>& storage) {
    TargetSpaces spaces;
    for (const auto& l : c.languages) {
        if (l.role == Role::endangered) continue;
        storage[l.code] = load_aligned(c, l);
    }
    for (const auto& l : c.languages)
        if (l.role != Role::endangered) spaces[l.code] = TargetSpace{&storage.at(l.code), l.normalization};
    return spaces;
}

ojson alignment_metrics(const AlignmentResult& r) {
    return {{"seed_pairs_used", r.seed_pairs_used},
            {"seed_pairs_dropped", r.seed_pairs_dropped},
            {"iterations", r.iterations_run},
            {"induced_lexicon_sizes", r.induced_lexicon_size_per_iteration},
            {"orthogonality_error", orthogonality_error(r.mapping)}};
}

}  // namespace

void set_log_stream(std::ostream* stream) { g_log = stream; }

PipelineConfig load_config(const fs::path& path, std::optional<std::uint64_t> seed, std::optional<fs::path> out) {
    PipelineConfig c = load_pipeline_config(path);
    if (seed) c.seed = *seed;
    if (out) c.output_dir = *out;
    return c;
}

void cmd_reduce(const PipelineConfig& config) {
    for (const auto& l : config.languages)
        if (l.embeddings) require_file(*l.embeddings, l.code + " embeddings");

    StageWriter writer(config, "reduced");
    for (const auto& l : config.languages) {
        if (!l.embeddings) continue;
        WordEmbeddings e = load_word2vec_text(*l.embeddings, l.code);
        const std::size_t input_dim = e.dim();
        if (!l.normalization.is_identity()) e = normalize_vocab(e, l.normalization);
        if (e.dim() == config.reduction.target_dim) {
            log("reduce", l.code + ": already at " + std::to_string(e.dim()) + " dimensions");
        } else {
            log("reduce", l.code + ": " + std::to_string(e.dim()) + " -> " +
                              std::to_string(config.reduction.target_dim));
            e = reduce(e, config.reduction);
        }
        writer.add_embeddings(l.code + ".vec", e);
        writer.metric({{"language", l.code},
                       {"input_dim", input_dim},
                       {"output_dim", e.dim()},
                       {"lemmas", e.lemma_count()},
                       {"vectors", e.vector_count()}});
    }
    writer.commit();
}

void cmd_align(const PipelineConfig& config) {
    const LanguageConfig& anchor = config.anchor();
    for (const auto* l : config.with_role(Role::resource_rich)) {
        require_file(*l->seed_lexicon, l->code + " seed lexicon");
        prior(config, "reduced", l->code + ".vec", "reduce");
    }
    WordEmbeddings target =
        load_word2vec_text(prior(config, "reduced", anchor.code + ".vec", "reduce"), anchor.code);

    StageWriter writer(config, "aligned");
    writer.add_embeddings(anchor.code + ".vec", target);
    for (const auto* l : config.with_role(Role::resource_rich)) {
        WordEmbeddings source = load_word2vec_text(prior(config, "reduced", l->code + ".vec", "reduce"), l->code);
        SeedLexicon seed = normalized_seed(load_seed_lexicon(*l->seed_lexicon, l->code, anchor.code),
                                           l->normalization, anchor.normalization);
        log("align", l->code + " -> " + anchor.code + ": " + std::to_string(seed.size()) + " seed pairs, " +
                         std::to_string(config.alignment.iterations) + " refinement iterations");
        AlignmentResult r = align_supervised(source, target, seed, config.alignment);
        writer.add_embeddings(l->code + ".vec", apply_alignment(source, r));
        writer.add_matrix(l->code + "-" + anchor.code + ".matrix", r.mapping);
        ojson m = {{"language", l->code}, {"target", anchor.code}};
        m.update(alignment_metrics(r));
        writer.metric(m);
    }
    writer.commit();
}

void cmd_project(const PipelineConfig& config) {
    for (const auto* l : config.with_role(Role::endangered)) require_file(*l->dictionary, l->code + " dictionary");
    std::map<std::string, WordEmbeddings> storage;
    TargetSpaces spaces = aligned_spaces(config, storage);

    StageWriter writer(config, "projected");
    for (const auto* l : config.with_role(Role::endangered)) {
        TranslationDictionary dict = parse_dictionary_xml(*l->dictionary);
        if (dict.source_language != l->code)
            throw SchemaError(l->dictionary->string() + ": dictionary source is " + dict.source_language +
                              ", expected " + l->code);
        ProjectionResult p = build_endangered_embeddings(dict, spaces, l->code);
        log("project", l->code + ": " + std::to_string(p.coverage.projected) + " of " +
                           std::to_string(p.coverage.lexeme_count) + " lexemes projected");
        writer.add_embeddings(l->code + ".vec", p.embeddings);
        writer.add(l->code + ".coverage.txt", p.coverage.to_text());
        writer.add(l->code + ".coverage.jsonl", p.coverage.to_json_line());

        DictionaryStats stats = dictionary_stats(dict);
        ojson s = {{"source_language", stats.source_language},
                   {"lexemes", stats.lexeme_count},
                   {"translations", stats.total_translations},
                   {"targets", ojson::array()}};
        for (const auto& t : stats.targets)
            s["targets"].push_back({{"language", t.target_language},
                                    {"meaning_groups", t.meaning_group_count},
                                    {"translations", t.translation_count},
                                    {"share", t.translation_share}});
        writer.add(l->code + ".stats.json", s.dump(2) + "\n");
        writer.metric({{"language", l->code},
                       {"lexemes", p.coverage.lexeme_count},
                       {"projected", p.coverage.projected},
                       {"skipped", p.coverage.skipped}});
    }
    writer.commit();
}

std::vector<std::pair<std::string, std::string>> dictionary_pairs(const TranslationDictionary& dictionary,
                                                                  const std::string& language,
                                                                  const NormalizationPolicy& policy) {
    std::vector<std::pair<std::string, std::string>> out;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& lex : dictionary.lexemes)
        for (const auto& g : lex.meaning_groups)
            for (const auto& t : g.translations) {
                if (t.language != language) continue;
                std::pair<std::string, std::string> p{lex.lemma, normalize_lemma(t.lemma, policy)};
                if (seen.insert(p).second) out.push_back(std::move(p));
            }
    return out;
}

double top1_retrieval(const WordEmbeddings& source, const WordEmbeddings& target,
                      const std::vector<std::pair<std::string, std::string>>& pairs) {
    std::map<std::string, std::set<std::string>> gold;
    for (const auto& [s, t] : pairs)
        if (source.contains(s) && target.contains(t)) gold[s].insert(t);
    if (gold.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& [s, ts] : gold) {
        auto nn = lemma_neighbors(source, target, s, 1, Metric::cosine, 1);
        if (!nn.empty() && ts.count(nn.front().lemma)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(gold.size());
}

void cmd_finetune(const PipelineConfig& config) {
    const bool train = config.finetune.epochs > 0;
    const bool realign = config.realignment.iterations > 0;
    for (const auto* l : config.with_role(Role::endangered)) {
        prior(config, "projected", l->code + ".vec", "project");
        if (train) {
            if (!l->treebank) throw ConfigError(l->code + ": fine-tuning needs a treebank");
            require_file(*l->treebank, l->code + " treebank");
        }
        if (realign) {
            require_file(*l->dictionary, l->code + " dictionary");
            prior(config, "aligned", *l->realign_to + ".vec", "align");
        }
    }

    StageWriter writer(config, "final");
    for (const auto* l : config.with_role(Role::endangered)) {
        WordEmbeddings projected =
            load_word2vec_text(prior(config, "projected", l->code + ".vec", "project"), l->code);
        ojson m = {{"language", l->code}};

        WordEmbeddings tuned = projected;
        if (train) {
            auto corpus = parse_conllu(*l->treebank);
            SkipGramConfig sg = config.finetune;
            sg.rng_seed = config.seed;
            FinetuneResult f = skipgram_finetune(projected, corpus, sg);
            log("finetune", l->code + ": " + std::to_string(config.finetune.epochs) + " epochs on " +
                                std::to_string(corpus.size()) + " sentences, " +
                                std::to_string(f.admitted_oov) + " new lemmas");
            m["epoch_loss"] = f.epoch_loss;
            m["admitted_oov"] = f.admitted_oov;
            tuned = std::move(f.embeddings);
        } else {
            log("finetune", l->code + ": skipped (0 epochs)");
        }

        WordEmbeddings final_space = tuned;
        if (realign) {
            const LanguageConfig& tl = *config.find(*l->realign_to);
            WordEmbeddings target = load_aligned(config, tl);
            TranslationDictionary dict = parse_dictionary_xml(*l->dictionary);
            SeedLexicon seed{l->code, tl.code, {}};
            for (auto& [s, t] : dictionary_pairs(dict, tl.code, tl.normalization)) seed.add(s, t);
            m["retrieval_before"] = top1_retrieval(projected, target, seed.pairs);
            AlignmentResult r = align_supervised(tuned, target, seed, config.realignment);
            final_space = apply_alignment(tuned, r);
            m["retrieval_after"] = top1_retrieval(final_space, target, seed.pairs);
            m.update(alignment_metrics(r));
            writer.add_matrix(l->code + "-" + tl.code + ".matrix", r.mapping);
            log("finetune", l->code + " realigned to " + tl.code + " with " +
                                std::to_string(r.seed_pairs_used) + " dictionary pairs");
        } else {
            log("finetune", l->code + ": re-alignment skipped (0 iterations)");
        }
        writer.add_embeddings(l->code + ".vec", final_space);
        m["lemmas"] = final_space.lemma_count();
        writer.metric(m);
    }
    writer.commit();
}

std::vector<Neighbor> lemma_neighbors(const WordEmbeddings& from, const WordEmbeddings& to, std::string_view lemma,
                                      std::size_t k, Metric metric, std::size_t csls_k) {
    auto rank = from.rank_of(lemma);
    if (!rank) throw InputError("out of vocabulary: \"" + std::string(lemma) + "\" is not in the " +
                                from.language() + " space");
    if (from.dim() != to.dim())
        throw ShapeError("spaces differ in dimension (" + std::to_string(from.dim()) + " vs " +
                         std::to_string(to.dim()) + ")");
    NeighborOptions opt;
    opt.metric = metric;
    opt.csls_k = csls_k;
    opt.query_space = &from;

    std::map<std::string, Neighbor> best;
    for (std::size_t r : from.rows_of(*rank))
        for (auto& n : nearest_neighbors(to, from.row(r), k, opt)) {
            auto it = best.find(n.lemma);
            if (it == best.end() || n.score > it->second.score) best[n.lemma] = n;
        }
    std::vector<Neighbor> out;
    for (auto& [_, n] : best) out.push_back(n);
    std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.rank != b.rank) return a.rank < b.rank;
        return a.lemma < b.lemma;
    });
    if (out.size() > k) out.resize(k);
    return out;
}

std::string cmd_nn(const PipelineConfig* config, const NnQuery& q) {
    if (q.k == 0) throw ConfigError("k must be at least 1");
    auto space_path = [&](const std::string& code, const std::optional<fs::path>& override) -> fs::path {
        if (override) {
            require_file(*override, code + " embeddings");
            return *override;
        }
        if (!config) throw ConfigError("give --config or explicit embedding files");
        const LanguageConfig* l = config->find(code);
        if (!l) throw ConfigError("language " + code + " is not configured");
        return l->role == Role::endangered ? prior(*config, "final", code + ".vec", "finetune")
                                           : prior(*config, "aligned", code + ".vec", "align");
    };
    fs::path from_path = space_path(q.from, q.from_vectors);
    fs::path to_path = q.to == q.from && !q.to_vectors ? from_path : space_path(q.to, q.to_vectors);
    WordEmbeddings from = load_word2vec_text(from_path, q.from);
    WordEmbeddings to = from_path == to_path ? from : load_word2vec_text(to_path, q.to);

    std::string lemma = q.query;
    if (!from.contains(lemma) && config)
        if (const LanguageConfig* l = config->find(q.from)) lemma = normalize_lemma(lemma, l->normalization);
    auto neighbors = lemma_neighbors(from, to, lemma, q.k, q.metric, q.csls_k);

    std::ostringstream out;
    out << "rank\tlemma\tscore\n";
    char buf[32];
    for (std::size_t i = 0; i < neighbors.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.4f", neighbors[i].score);
        out << i + 1 << '\t' << neighbors[i].lemma << '\t' << buf << '\n';
    }
    return out.str();
}

void cmd_sentiment_train(const PipelineConfig& config) {
    const auto& s = config.sentiment;
    if (!s.train) throw ConfigError("sentiment.train is not configured");
    require_file(*s.train, "sentiment training corpus");
    const LanguageConfig& anchor = config.anchor();
    WordEmbeddings space = load_aligned(config, anchor);
    auto corpus = load_labeled_corpus(*s.train);

    SentimentTrainConfig tc;
    tc.epochs = s.epochs;
    tc.learning_rate = s.learning_rate;
    tc.buckets = s.buckets;
    tc.rng_seed = config.seed;
    tc.shuffle = s.shuffle;
    TrainResult r = train(corpus, space, tc);
    log("sentiment-train", std::to_string(corpus.size()) + " sentences, " + std::to_string(s.epochs) +
                               " epochs, final training accuracy " +
                               (r.accuracy_trace.empty() ? std::string("n/a")
                                                         : format_real(r.accuracy_trace.back())));

    StageWriter writer(config, "sentiment");
    std::ostringstream model;
    write_model(r.model, model);
    writer.add("model.xlsm", model.str());
    writer.metric({{"language", anchor.code}, {"sentences", corpus.size()}, {"accuracy_trace", r.accuracy_trace}});
    writer.commit();
}

std::vector<EvaluationReport> cmd_sentiment_eval(const PipelineConfig& config) {
    const auto& s = config.sentiment;
    if (s.evaluations.empty()) throw ConfigError("sentiment.evaluations is empty");
    fs::path model_path = prior(config, "sentiment", "model.xlsm", "sentiment-train");
    for (const auto& e : s.evaluations) {
        if (e.corpus) require_file(*e.corpus, e.language + " test corpus");
        if (e.treebank) require_file(*e.treebank, e.language + " test treebank");
        if (e.labels) require_file(*e.labels, e.language + " sentiment labels");
        const LanguageConfig* l = config.find(e.language);
        if (l->role == Role::endangered) prior(config, "final", l->code + ".vec", "finetune");
        if (l->dictionary) require_file(*l->dictionary, l->code + " dictionary");
    }
    SentimentModel model = load_model(model_path);

    std::map<std::string, WordEmbeddings> storage;
    TargetSpaces spaces = aligned_spaces(config, storage);
    const WordEmbeddings& anchor = storage.at(config.anchor().code);

    std::vector<EvaluationReport> reports;
    std::string text;
    for (const auto& e : s.evaluations) {
        const LanguageConfig& l = *config.find(e.language);
        WordEmbeddings endangered;
        const WordEmbeddings* source = nullptr;
        if (l.role == Role::endangered) {
            endangered = load_word2vec_text(prior(config, "final", l.code + ".vec", "finetune"), l.code);
            source = &endangered;
        } else {
            source = &storage.at(l.code);
        }

        std::vector<LabeledSentence> test;
        if (e.corpus) {
            test = load_labeled_corpus(*e.corpus);
        } else {
            auto sentences = parse_conllu(*e.treebank);
            attach_sentiment_labels(sentences, load_sentiment_labels(*e.labels));
            for (auto& sent : sentences)
                if (sent.sentiment_label) test.push_back({std::move(sent.lemmas), *sent.sentiment_label});
        }

        std::optional<TranslationDictionary> dict;
        if (l.dictionary) dict = parse_dictionary_xml(*l.dictionary);
        TransferOptions opt;
        opt.mode = e.mode;
        opt.anchor = &anchor;
        opt.dictionary = dict ? &*dict : nullptr;
        opt.resource_spaces = spaces;
        opt.bigrams_from_anchor = s.bigrams_from_anchor;
        VectorResolver resolver(*source, opt);
        Evaluation ev = evaluate(test, model, resolver);
        log("sentiment-eval", l.code + " (" + std::string(to_string(e.mode)) + "): " +
                                  std::to_string(ev.correct) + "/" + std::to_string(ev.total));
        text += "[" + l.code + " " + std::string(to_string(e.mode)) + "]\n" + ev.to_text() + "\n";
        reports.push_back({l.code, e.mode, ev});
    }

    StageWriter writer(config, "evaluation");
    writer.add("report.txt", text);
    for (const auto& r : reports)
        writer.metric({{"language", r.language},
                       {"mode", std::string(to_string(r.mode))},
                       {"total", r.evaluation.total},
                       {"correct", r.evaluation.correct},
                       {"accuracy", r.evaluation.accuracy},
                       {"confusion", {{r.evaluation.confusion[0][0], r.evaluation.confusion[0][1]},
                                      {r.evaluation.confusion[1][0], r.evaluation.confusion[1][1]}}}});
    writer.commit();
    return reports;
}

void cmd_run(const PipelineConfig& config) {
    cmd_reduce(config);
    cmd_align(config);
    if (!config.with_role(Role::endangered).empty()) {
        cmd_project(config);
        cmd_finetune(config);
    }
    if (config.sentiment.train) {
        cmd_sentiment_train(config);
        if (!config.sentiment.evaluations.empty()) cmd_sentiment_eval(config);
    }
}

}  // namespace xling::cli
