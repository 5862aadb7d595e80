// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "testing.hpp"
#include "toyworld.hpp"
#include "xling/align.hpp"
#include "xling/dictionary.hpp"
#include "xling/error.hpp"
#include "xling/reduce.hpp"
#include "xling/sentiment.hpp"
#include "xling/skipgram.hpp"

using namespace xling;
using namespace xling::testing;
namespace fs = std::filesystem;

namespace {

const fs::path kToy = XLING_TOY_DIR;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
    void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.3g", v);
    return b;
}

// ---------------------------------------------------------------------------

Outcome procrustes_recovery() {
    Outcome o;
    Rng rng(101);
    const std::size_t n = 500, d = 100;
    RowMatrix x = gaussian_matrix(rng, n, d);
    RowMatrix q = random_orthogonal(rng, d);
    auto src = make_space("src", x, "w");
    auto tgt = make_space("tgt", x * q, "w");
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    rng.shuffle(idx);
    SeedLexicon seed{"src", "tgt", {}};
    for (std::size_t i = 0; i < 50; ++i) seed.add(word("w", idx[i]), word("w", idx[i]));

    for (std::size_t iters : {std::size_t{0}, std::size_t{5}}) {
        auto r = align_supervised(src, tgt, seed, {iters, 10, 20000});
        double err = (r.mapping - q).norm();
        double orth = orthogonality_error(r.mapping);
        std::string tag = std::to_string(iters) + " iterations: |W-Q|_F=" + fmt(err) + " orth=" + fmt(orth);
        o.require(err < 1e-6 && orth < 1e-6, tag);
        if (err < 1e-6 && orth < 1e-6) o.note(tag);
    }
    return o;
}

Outcome csls_oracle() {
    Outcome o;
    Rng rng(202);
    std::size_t mismatched = 0, pairs = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t ns = 1 + rng.below(50), nt = 1 + rng.below(50), d = 2 + rng.below(15);
        std::size_t k = 1 + rng.below(12), limit = 1 + rng.below(60);
        auto src = make_space("src", gaussian_matrix(rng, ns, d), "s");
        auto tgt = make_space("tgt", gaussian_matrix(rng, nt, d), "t");
        auto got = induce_lexicon(src, tgt, {1, k, limit});
        auto want = oracle::mutual_csls_pairs(src, tgt, k, limit);
        pairs += want.size();
        if (got.pairs != want) ++mismatched;
    }
    o.require(mismatched == 0, std::to_string(mismatched) + " of 200 instances differ");
    o.note(std::to_string(pairs) + " oracle pairs matched");
    return o;
}

Outcome centroid_projection() {
    Outcome o;
    NormalizationPolicy fp, rp;
    fp.strip_compound_marker = true;
    rp.strip_pos_suffix = true;
    auto fin = normalize_vocab(load_word2vec_text(kToy / "fin.vec", "fin"), fp);
    auto rus = normalize_vocab(load_word2vec_text(kToy / "rus.vec", "rus"), rp);
    auto eng = load_word2vec_text(kToy / "eng.vec", "eng");
    TargetSpaces spaces{{"fin", {&fin, fp}}, {"rus", {&rus, rp}}, {"eng", {&eng, {}}}};
    auto dict = parse_dictionary_xml(kToy / "myv_toy.xml");
    o.require(dict.lexemes.size() >= 12, "toy dictionary has fewer than 12 lexemes");
    auto r = build_endangered_embeddings(dict, spaces, "myv");

    std::map<std::string, const WordEmbeddings*> by_lang{{"fin", &fin}, {"rus", &rus}, {"eng", &eng}};
    std::map<std::string, NormalizationPolicy> policy{{"fin", fp}, {"rus", rp}, {"eng", {}}};
    std::map<std::string, std::size_t> seen;
    std::set<std::string> languages;
    double worst = 0.0;
    std::size_t projected = 0;
    for (const auto& lex : dict.lexemes) {
        std::vector<double> sum(4, 0.0);
        std::size_t count = 0;
        for (const auto& g : lex.meaning_groups)
            for (const auto& t : g.translations) {
                languages.insert(t.language);
                const WordEmbeddings* s = by_lang.at(t.language);
                auto rank = s->rank_of(normalize_lemma(t.lemma, policy.at(t.language)));
                if (!rank) continue;
                for (std::size_t row : s->rows_of(*rank)) {
                    for (std::size_t c = 0; c < 4; ++c) sum[c] += s->row(row)[c];
                    ++count;
                }
            }
        if (count == 0) continue;
        ++projected;
        auto rank = r.embeddings.rank_of(lex.lemma);
        if (!rank) {
            o.require(false, lex.lemma + " missing");
            continue;
        }
        std::size_t row = r.embeddings.rows_of(*rank).at(seen[lex.lemma]++);
        for (std::size_t c = 0; c < 4; ++c)
            worst = std::max(worst, std::abs(r.embeddings.row(row)[c] - sum[c] / static_cast<double>(count)));
    }
    o.require(languages.size() >= 3, "fewer than 3 target languages");
    o.require(worst <= 1e-12, "max deviation " + fmt(worst));
    o.require(r.coverage.projected == projected, "projected count differs from oracle");
    o.require(r.coverage.projected + r.coverage.skipped == r.coverage.lexeme_count, "coverage does not balance");
    o.note(std::to_string(r.coverage.projected) + " projected, " + std::to_string(r.coverage.skipped) +
           " skipped, max deviation " + fmt(worst));
    return o;
}

Outcome reduction_contract() {
    Outcome o;
    Rng rng(404);
    const std::size_t n = 10000;
    RowMatrix x = gaussian_matrix(rng, n, 300);
    for (Eigen::Index j = 0; j < 300; ++j) x.col(j) *= 1.0 + 3.0 / (1.0 + static_cast<double>(j));
    auto r = reduce(make_space("syn", x), {100, 7});
    o.require(r.dim() == 100 && r.vector_count() == n, "reduced shape is not 10000 x 100");

    Eigen::VectorXd var;
    pca_project(x, 100, &var);
    bool ordered = true;
    for (Eigen::Index c = 1; c < var.size(); ++c) ordered &= var(c) <= var(c - 1);
    o.require(ordered, "component variances increase");

    // Data on a random 100-dim subspace of R^300.
    RowMatrix coords = gaussian_matrix(rng, n, 100);
    RowMatrix basis = random_orthogonal(rng, 300).topRows(100);
    RowMatrix sub = coords * basis;
    auto rs = reduce(make_space("syn", sub), {100, 0});
    double worst = 0.0;
    for (int t = 0; t < 20000; ++t) {
        auto i = static_cast<Eigen::Index>(rng.below(n)), j = static_cast<Eigen::Index>(rng.below(n));
        double before = (sub.row(i) - sub.row(j)).norm();
        double after = (rs.matrix().row(i) - rs.matrix().row(j)).norm();
        worst = std::max(worst, std::abs(before - after));
    }
    o.require(worst < 1e-6, "distance drift " + fmt(worst));
    o.note("max pairwise distance drift " + fmt(worst));
    return o;
}

Outcome skipgram_gradient() {
    Outcome o;
    Rng rng(505);
    const std::size_t d = 10, k = 5;
    auto loss = [&](const std::vector<double>& p) {
        std::span<const double> all(p);
        std::vector<std::span<const double>> negs;
        for (std::size_t i = 0; i < k; ++i) negs.push_back(all.subspan((2 + i) * d, d));
        return sgns_loss(all.subspan(0, d), all.subspan(d, d), negs);
    };
    double worst = 0.0;
    for (int point = 0; point < 10; ++point) {
        std::vector<double> p(d * (2 + k));
        for (auto& v : p) v = 0.5 * gaussian(rng);
        std::span<const double> all(p);
        std::vector<std::span<const double>> negs;
        for (std::size_t i = 0; i < k; ++i) negs.push_back(all.subspan((2 + i) * d, d));
        auto g = sgns_gradient(all.subspan(0, d), all.subspan(d, d), negs);
        std::vector<double> a(g.center);
        a.insert(a.end(), g.context.begin(), g.context.end());
        for (const auto& gn : g.negatives) a.insert(a.end(), gn.begin(), gn.end());
        for (std::size_t i = 0; i < p.size(); ++i) {
            auto plus = p, minus = p;
            plus[i] += 1e-6;
            minus[i] -= 1e-6;
            double num = (loss(plus) - loss(minus)) / 2e-6;
            worst = std::max(worst, std::abs(num - a[i]) / std::max({std::abs(num), std::abs(a[i]), 1e-8}));
        }
    }
    o.require(worst < 1e-5, "relative error " + fmt(worst));
    o.note("max relative error " + fmt(worst));

    auto e = make_space("myv", gaussian_matrix(rng, 50, 16, 0.3));
    std::vector<LemmaSentence> corpus;
    for (int s = 0; s < 40; ++s) {
        LemmaSentence ls;
        for (std::size_t t = 3 + rng.below(6); t > 0; --t) ls.lemmas.push_back(word("w", rng.below(50)));
        corpus.push_back(ls);
    }
    SkipGramConfig zero_epochs;
    zero_epochs.epochs = 0;
    o.require(skipgram_finetune(e, corpus, zero_epochs).embeddings.matrix() == e.matrix(),
              "0-epoch run changed vectors");
    SkipGramConfig zero_rate;
    zero_rate.initial_learning_rate = 0.0;
    zero_rate.final_learning_rate = 0.0;
    o.require(skipgram_finetune(e, corpus, zero_rate).embeddings.matrix() == e.matrix(),
              "0-learning-rate run changed vectors");
    return o;
}

struct Separable {
    WordEmbeddings space;
    std::vector<LabeledSentence> corpus;
};

Separable separable_corpus(std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t n = 200, dim = 100;
    RowMatrix proto = gaussian_matrix(rng, 2, dim);
    RowMatrix words(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    Separable s;
    for (std::size_t i = 0; i < n; ++i) {
        Sentiment label = rng.below(2) ? Sentiment::positive : Sentiment::negative;
        words.row(static_cast<Eigen::Index>(i)) =
            proto.row(static_cast<int>(label)) + gaussian_matrix(rng, 1, dim, 0.3);
        s.corpus.push_back({{word("w", i)}, label});
    }
    s.space = make_space("eng", words);
    return s;
}

Outcome sentiment_trainability() {
    Outcome o;
    auto s = separable_corpus(606);
    SentimentTrainConfig c;
    c.epochs = 30;
    c.buckets = 1u << 12;
    c.rng_seed = 6;
    auto r = train(s.corpus, s.space, c);
    double best = 0.0;
    for (double a : r.accuracy_trace) best = std::max(best, a);
    o.require(best == 1.0, "best training accuracy " + fmt(best));
    o.note("training accuracy reached 1.0 after epoch " +
           std::to_string(std::find(r.accuracy_trace.begin(), r.accuracy_trace.end(), 1.0) -
                          r.accuracy_trace.begin() + 1));

    auto swapped = s.corpus;
    for (auto& x : swapped) x.label = x.label == Sentiment::positive ? Sentiment::negative : Sentiment::positive;
    auto flipped = train(swapped, s.space, c).model;
    VectorResolver direct(s.space, {});
    Rng rng(607);
    std::size_t broken = 0;
    for (int i = 0; i < 500; ++i) {
        std::vector<std::string> l;
        for (std::size_t t = 1 + rng.below(4); t > 0; --t) l.push_back(word("w", rng.below(200)));
        auto a = predict(l, r.model, direct), b = predict(l, flipped, direct);
        if (a.label == b.label || a.probabilities[0] != b.probabilities[1]) ++broken;
    }
    o.require(broken == 0, std::to_string(broken) + " predictions not flipped");
    return o;
}

Outcome zero_shot_transfer() {
    Outcome o;
    Rng rng(707);
    const std::size_t n = 300, d = 40;
    RowMatrix base = gaussian_matrix(rng, n, d);
    Eigen::VectorXd polarity = gaussian_matrix(rng, d, 1).col(0);
    RowMatrix qa = random_orthogonal(rng, d), qb = random_orthogonal(rng, d);
    auto lang_a = make_space("eng", base * qa, "a");
    auto lang_b = make_space("myv", base * qb, "b");

    // Sentences of 3-6 words; the label follows the summed polarity of the concepts.
    std::vector<LabeledSentence> train_a, test_a, test_b;
    for (int s = 0; s < 600; ++s) {
        std::vector<std::size_t> ids;
        for (std::size_t t = 3 + rng.below(4); t > 0; --t) ids.push_back(rng.below(n));
        double score = 0.0;
        for (auto i : ids) score += base.row(static_cast<Eigen::Index>(i)).dot(polarity);
        Sentiment label = score > 0 ? Sentiment::positive : Sentiment::negative;
        LabeledSentence a{{}, label}, b{{}, label};
        for (auto i : ids) {
            a.lemmas.push_back(word("a", i));
            b.lemmas.push_back(word("b", i));
        }
        if (s < 400) {
            train_a.push_back(a);
        } else {
            test_a.push_back(a);
            test_b.push_back(b);
        }
    }
    SentimentTrainConfig c;
    c.epochs = 30;
    c.buckets = 1u << 14;
    auto model = train(train_a, lang_a, c).model;

    SeedLexicon seed{"myv", "eng", {}};
    for (std::size_t i = 0; i < 100; ++i) seed.add(word("b", i * 3), word("a", i * 3));
    auto alignment = align_supervised(lang_b, lang_a, seed, {5, 10, 20000});
    auto aligned_b = apply_alignment(lang_b, alignment);

    VectorResolver direct(lang_a, {});
    TransferOptions sub;
    sub.mode = TransferMode::substitute;
    sub.anchor = &lang_a;
    sub.bigrams_from_anchor = true;
    VectorResolver resolver(aligned_b, sub);
    auto ev_a = evaluate(test_a, model, direct);
    auto ev_b = evaluate(test_b, model, resolver);
    o.require(ev_a.correct == ev_b.correct, "accuracy A " + fmt(ev_a.accuracy) + " vs B " + fmt(ev_b.accuracy));
    o.note("accuracy A = B = " + std::to_string(ev_a.correct) + "/" + std::to_string(ev_a.total));
    return o;
}

Outcome dictionary_statistics() {
    Outcome o;
    for (const std::string code : {"myv", "mdf"}) {
        std::ifstream in(kToy / (code + "_toy.manifest.json"));
        auto m = nlohmann::json::parse(in);
        auto s = dictionary_stats(parse_dictionary_xml(kToy / (code + "_toy.xml")));
        bool ok = s.lexeme_count == m["lexemes"] && s.total_translations == m["total_translations"] &&
                  s.targets.size() == m["targets"].size();
        for (const auto& t : s.targets) {
            if (!m["targets"].contains(t.target_language)) {
                ok = false;
                continue;
            }
            const auto& w = m["targets"][t.target_language];
            ok &= t.meaning_group_count == w["meaning_groups"] && t.translation_count == w["translations"] &&
                  t.translation_share == w["share"].get<double>();
        }
        o.require(ok, code + " statistics differ from the manifest");
    }
    o.note("toy manifests reproduced");

    // Optional check against a user-supplied Erzya dictionary in the canonical schema.
    if (const char* giella = std::getenv("XLING_ERZYA_XML")) {
        auto s = dictionary_stats(parse_dictionary_xml(giella));
        bool found = false;
        for (const auto& t : s.targets)
            if (t.target_language == "fin") {
                found = true;
                o.require(t.meaning_group_count == 8388 && t.translation_count == 14344 &&
                              std::abs(t.translation_share - 59.89) < 1e-9,
                          "Erzya fin row: " + std::to_string(t.meaning_group_count) + " / " +
                              std::to_string(t.translation_count) + " / " + fmt(t.translation_share));
            }
        o.require(found, "Erzya dictionary has no Finnish translations");
        if (found) o.note("Erzya fin row checked");
    } else {
        o.note("XLING_ERZYA_XML not set, real-data row skipped");
    }
    return o;
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(XLING_BIN) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> tree_bytes(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
    return out;
}

Outcome determinism() {
    Outcome o;
    TempDir dir;
    toy::write_toy_world(dir.path());
    const std::string cfg = "run -q --config " + (dir / "config.json").string();
    int a = run_cli(cfg + " --out " + (dir / "a").string());
    int b = run_cli(cfg + " --out " + (dir / "b").string());
    o.require(a == 0 && b == 0, "pipeline exit codes " + std::to_string(a) + ", " + std::to_string(b));
    if (!o.pass) return o;
    auto ta = tree_bytes(dir / "a"), tb = tree_bytes(dir / "b");
    std::size_t differ = 0;
    for (const auto& [name, bytes] : ta)
        if (!tb.count(name) || tb.at(name) != bytes) ++differ;
    o.require(ta.size() == tb.size() && differ == 0, std::to_string(differ) + " artifacts differ");
    o.note(std::to_string(ta.size()) + " artifacts byte-identical");
    return o;
}

struct Criterion {
    int id;
    const char* name;
    double limit_seconds;
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "Procrustes recovery", 10, procrustes_recovery},
        {2, "CSLS oracle equivalence", 30, csls_oracle},
        {3, "Centroid projection oracle", 1, centroid_projection},
        {4, "Dimensionality reduction contract", 30, reduction_contract},
        {5, "Skip-gram gradient check", 5, skipgram_gradient},
        {6, "Sentiment trainability", 10, sentiment_trainability},
        {7, "Zero-shot transfer sanity", 30, zero_shot_transfer},
        {8, "Dictionary statistics on toy data", 1, dictionary_statistics},
        {9, "Determinism", 60, determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs >= c.limit_seconds) o.require(false, "runtime " + fmt(secs) + " s over " + fmt(c.limit_seconds) + " s");
        if (!o.pass) ++failed;
        std::printf("%s %d %s (%.2f s / %.0f s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                    c.limit_seconds, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
