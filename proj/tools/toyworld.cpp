#include "toyworld.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/QR>
#include <nlohmann/json.hpp>

#include "xling/embeddings.hpp"
#include "xling/error.hpp"
#include "xling/random.hpp"

namespace xling::toy {

namespace {

double gaussian(Rng& rng) {
    double u1 = 1.0 - rng.uniform01();
    double u2 = rng.uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

RowMatrix random_orthogonal(Rng& rng, std::size_t n) {
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index i = 0; i < g.rows(); ++i)
        for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = gaussian(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < q.cols(); ++j)
        if (r(j, j) < 0) q.col(j) = -q.col(j);
    return q;
}

// Word i spelled as three base-12 digits over a language's syllables.
std::string spell(const std::vector<std::string>& syllables, std::size_t i) {
    const std::size_t base = syllables.size();
    return syllables[(i / (base * base)) % base] + syllables[(i / base) % base] + syllables[i % base];
}

const std::vector<std::string> kEng = {"ba", "de", "fi", "go", "hu", "ka",
                                       "le", "mo", "nu", "pa", "ri", "so"};
const std::vector<std::string> kFin = {"ka", "lo", "ti", "su", "va", "ne",
                                       "hi", "mä", "ry", "jo", "pe", "ku"};
const std::vector<std::string> kRus = {"ка", "ло", "ми", "ру", "да", "не",
                                       "во", "пи", "са", "ту", "же", "бы"};
const std::vector<std::string> kMyv = {"ке", "ня", "ра", "шка", "ва", "ле",
                                       "мо", "ти", "зя", "ро", "вий", "лу"};

std::string eng_word(std::size_t i) { return spell(kEng, i); }
std::string fin_word(std::size_t i) { return spell(kFin, i); }
// Surface token in the fin vector file: every 7th word carries a compound marker.
std::string fin_token(std::size_t i) {
    std::string w = fin_word(i);
    if (i % 7 == 0) {
        std::string head = kFin[(i / 144) % 12] + kFin[(i / 12) % 12];
        w = head + "#" + kFin[i % 12];
    }
    return w;
}
std::string rus_word(std::size_t i) { return spell(kRus, i); }
std::string myv_word(std::size_t i) { return spell(kMyv, i); }

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + p.string());
    return out;
}

void write_space(const std::filesystem::path& path, const std::vector<std::string>& tokens,
                 const RowMatrix& m) {
    auto out = open_out(path);
    out << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out << tokens[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < m.cols(); ++j) out << ' ' << format_real(m(i, j));
        out << '\n';
    }
}

}  // namespace

void write_toy_world(const std::filesystem::path& dir, const ToyWorldOptions& o) {
    std::filesystem::create_directories(dir);
    Rng rng(o.seed);
    const std::size_t n = o.concepts;
    const std::size_t d = o.base_dim;

    // Concept space with a decaying spectrum, so leading principal axes are well separated.
    RowMatrix concepts(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
            concepts(i, j) = gaussian(rng) / (1.0 + 0.25 * static_cast<double>(j));

    auto noisy = [&](const RowMatrix& m) {
        RowMatrix out = m;
        for (Eigen::Index i = 0; i < out.rows(); ++i)
            for (Eigen::Index j = 0; j < out.cols(); ++j) out(i, j) += o.noise * gaussian(rng);
        return out;
    };

    // English: the concept space itself.
    std::vector<std::string> eng_tokens, fin_tokens, rus_tokens;
    for (std::size_t i = 0; i < n; ++i) {
        eng_tokens.push_back(eng_word(i));
        fin_tokens.push_back(fin_token(i));
    }
    write_space(dir / "eng.vec", eng_tokens, concepts);

    // Finnish: rotated copy with noise.
    RowMatrix fin = noisy(concepts * random_orthogonal(rng, d));
    write_space(dir / "fin.vec", fin_tokens, fin);

    // Russian: padded with 4 weak dimensions, rotated; POS-tagged tokens and
    // an extra VERB reading for every 9th word.
    const std::size_t rd = d + 4;
    RowMatrix padded = RowMatrix::Zero(n, rd);
    padded.leftCols(d) = concepts;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = d; j < rd; ++j) padded(i, j) = 0.05 * gaussian(rng);
    RowMatrix rus_base = noisy(padded * random_orthogonal(rng, rd));
    std::vector<Eigen::RowVectorXd> rus_rows;
    for (std::size_t i = 0; i < n; ++i) {
        rus_tokens.push_back(rus_word(i) + "_NOUN");
        rus_rows.push_back(rus_base.row(i));
        if (i % 9 == 0) {
            rus_tokens.push_back(rus_word(i) + "_VERB");
            Eigen::RowVectorXd v = rus_base.row(i);
            for (Eigen::Index j = 0; j < v.size(); ++j) v(j) += 0.05 * gaussian(rng);
            rus_rows.push_back(v);
        }
    }
    RowMatrix rus(static_cast<Eigen::Index>(rus_rows.size()), static_cast<Eigen::Index>(rd));
    for (std::size_t i = 0; i < rus_rows.size(); ++i) rus.row(i) = rus_rows[i];
    write_space(dir / "rus.vec", rus_tokens, rus);

    // Seed lexicons (normalized forms) over a shuffled subset of concepts.
    std::vector<std::size_t> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = i;
    rng.shuffle(ids);
    {
        auto f = open_out(dir / "fin-eng.seed");
        auto r = open_out(dir / "rus-eng.seed");
        f << "# fin eng\n";
        r << "# rus eng\n";
        for (std::size_t k = 0; k < o.seed_pairs && k < n; ++k) {
            f << fin_word(ids[k]) << ' ' << eng_word(ids[k]) << '\n';
            r << rus_word(ids[k]) << '\t' << eng_word(ids[k]) << '\n';
        }
        f << "unknownword " << eng_word(0) << '\n';
    }

    // myv dictionary: entry i describes concept i. Every 10th entry only
    // translates into words that exist in no space.
    {
        auto x = open_out(dir / "myv.xml");
        x << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<dictionary src=\"myv\">\n";
        for (std::size_t i = 0; i < o.dictionary_entries && i < n; ++i) {
            x << "  <e><l pos=\"N\">" << myv_word(i) << "</l>";
            if (i % 10 == 9) {
                x << "<mg><t lang=\"fin\">" << "tuntematon" << i << "</t></mg>";
            } else {
                x << "<mg><t lang=\"fin\">" << fin_word(i) << "</t>";
                if (i % 3 == 0) x << "<t lang=\"rus\">" << rus_word(i) << "</t>";
                x << "</mg>";
                if (i % 4 == 0) x << "<mg><t lang=\"eng\">" << eng_word(i) << "</t></mg>";
            }
            x << "</e>\n";
        }
        x << "</dictionary>\n";
    }

    // Treebank: topical sentences drawn from a concept's neighborhood, plus
    // two function words unknown to the dictionary.
    RowMatrix unit = unit_rows(concepts);
    const std::size_t vocab = std::min(o.dictionary_entries, n);
    RowMatrix sims = unit.topRows(vocab) * unit.topRows(vocab).transpose();
    Eigen::RowVectorXd polarity(d);
    for (std::size_t j = 0; j < d; ++j) polarity(j) = gaussian(rng);
    polarity.normalize();
    Eigen::VectorXd score = concepts * polarity.transpose();

    {
        auto c = open_out(dir / "myv.conllu");
        auto lab = open_out(dir / "myv.labels");
        for (std::size_t s = 0; s < o.treebank_sentences; ++s) {
            std::size_t topic = rng.below(vocab);
            std::vector<std::size_t> order(vocab);
            for (std::size_t i = 0; i < vocab; ++i) order[i] = i;
            std::partial_sort(order.begin(), order.begin() + 10, order.end(),
                              [&](std::size_t a, std::size_t b) {
                                  return sims(topic, a) > sims(topic, b);
                              });
            std::size_t len = 4 + rng.below(4);
            std::vector<std::string> lemmas;
            double total = 0.0;
            for (std::size_t k = 0; k < len; ++k) {
                std::size_t w = order[rng.below(10)];
                lemmas.push_back(myv_word(w));
                total += score(w);
                if (k == 1) lemmas.push_back(rng.below(2) ? "ды" : "а");
            }
            std::string id = "myv-" + std::to_string(s + 1);
            c << "# sent_id = " << id << '\n' << "# text_en = sentence " << s + 1 << '\n';
            for (std::size_t k = 0; k < lemmas.size(); ++k) {
                std::string upper = lemmas[k];
                c << k + 1 << '\t' << upper << '\t' << lemmas[k] << "\tNOUN\t_\t_\t0\troot\t_\t_\n";
            }
            c << '\n';
            const char* label = total > 0.4 ? "positive" : total < -0.4 ? "negative" : "neutral";
            lab << id << '\t' << label << '\n';
        }
    }

    // English sentiment training corpus.
    std::vector<std::size_t> pos_words, neg_words;
    for (std::size_t i = 0; i < n; ++i) {
        if (score(i) > 0.3) pos_words.push_back(i);
        if (score(i) < -0.3) neg_words.push_back(i);
    }
    {
        auto t = open_out(dir / "eng_train.tsv");
        for (std::size_t s = 0; s < o.train_sentences; ++s) {
            bool positive = rng.below(2) == 1;
            const auto& pool = positive ? pos_words : neg_words;
            std::size_t len = 3 + rng.below(4);
            std::vector<std::string> lemmas;
            for (std::size_t k = 0; k < len; ++k) {
                std::size_t w = k % 2 == 0 ? pool[rng.below(pool.size())] : rng.below(n);
                lemmas.push_back(eng_word(w));
            }
            t << (positive ? "positive" : "negative") << '\t';
            for (std::size_t k = 0; k < lemmas.size(); ++k) t << (k ? " " : "") << lemmas[k];
            t << '\n';
        }
    }

    nlohmann::ordered_json cfg;
    cfg["seed"] = 7;
    cfg["output_dir"] = "run";
    cfg["reduction"] = {{"target_dim", 16}, {"ppa_components", 1}};
    cfg["alignment"] = {{"iterations", 20}, {"csls_k", 10}, {"induction_vocab_limit", 20000}};
    cfg["realignment"] = {{"iterations", 5}, {"csls_k", 10}, {"induction_vocab_limit", 20000}};
    cfg["finetune"] = {{"window", 3},     {"negative_samples", 5}, {"epochs", 3},
                       {"learning_rate", 0.01}, {"min_count", 2},  {"admit_oov", true}};
    cfg["languages"] = nlohmann::ordered_json::array(
        {{{"code", "eng"}, {"role", "anchor"}, {"embeddings", "eng.vec"}},
         {{"code", "fin"},
          {"role", "resource-rich"},
          {"embeddings", "fin.vec"},
          {"seed_lexicon", "fin-eng.seed"},
          {"normalization", {{"strip_compound_marker", true}}}},
         {{"code", "rus"},
          {"role", "resource-rich"},
          {"embeddings", "rus.vec"},
          {"seed_lexicon", "rus-eng.seed"},
          {"normalization", {{"strip_pos_suffix", true}}}},
         {{"code", "myv"},
          {"role", "endangered"},
          {"dictionary", "myv.xml"},
          {"treebank", "myv.conllu"},
          {"realign_to", "fin"}}});
    cfg["sentiment"] = {
        {"train", "eng_train.tsv"},
        {"epochs", 30},
        {"learning_rate", 0.1},
        {"buckets", 4096},
        {"evaluations",
         nlohmann::ordered_json::array(
             {{{"language", "myv"}, {"treebank", "myv.conllu"}, {"labels", "myv.labels"}, {"mode", "substitute"}},
              {{"language", "myv"}, {"treebank", "myv.conllu"}, {"labels", "myv.labels"}, {"mode", "boost"}},
              {{"language", "eng"}, {"corpus", "eng_train.tsv"}, {"mode", "direct"}}})}};
    auto out = open_out(dir / "config.json");
    out << cfg.dump(2) << '\n';
}

}  // namespace xling::toy
