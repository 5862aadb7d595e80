#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "testing.hpp"
#include "xling/dictionary.hpp"
#include "xling/error.hpp"

using namespace xling;
using namespace xling::testing;

namespace {

const std::filesystem::path kToy = XLING_TOY_DIR;

TranslationDictionary parse(const std::string& xml) {
    std::istringstream in(xml);
    return read_dictionary_xml(in);
}

nlohmann::json manifest(const std::string& name) {
    std::ifstream in(kToy / name);
    return nlohmann::json::parse(in);
}

struct ToySpaces {
    WordEmbeddings fin, rus, eng;
    TargetSpaces spaces;
    ToySpaces()
        : fin(load_word2vec_text(kToy / "fin.vec", "fin")),
          rus(load_word2vec_text(kToy / "rus.vec", "rus")),
          eng(load_word2vec_text(kToy / "eng.vec", "eng")) {
        NormalizationPolicy fp, rp;
        fp.strip_compound_marker = true;
        rp.strip_pos_suffix = true;
        fin = normalize_vocab(fin, fp);
        rus = normalize_vocab(rus, rp);
        spaces["fin"] = {&fin, fp};
        spaces["rus"] = {&rus, rp};
        spaces["eng"] = {&eng, {}};
    }
};

// Raw token -> vectors straight from the file, with the two toy surface
// conventions undone by hand ('#' inside Finnish compounds, "_TAG" on Russian).
std::multimap<std::string, std::vector<double>> raw_vectors(const std::string& file) {
    std::ifstream in(kToy / file);
    std::size_t n = 0, d = 0;
    in >> n >> d;
    std::multimap<std::string, std::vector<double>> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::string tok;
        in >> tok;
        std::vector<double> v(d);
        for (auto& x : v) in >> x;
        std::string key;
        for (char c : tok)
            if (c != '#') key += c;
        if (auto us = key.rfind('_'); us != std::string::npos) key = key.substr(0, us);
        out.emplace(key, v);
    }
    return out;
}

}  // namespace

TEST(DictionaryXml, SingleEntry) {
    auto d = parse(R"(<dictionary src="myv"><e><l pos="N">кудо</l><mg><t lang="fin">talo</t></mg></e></dictionary>)");
    EXPECT_EQ(d.source_language, "myv");
    ASSERT_EQ(d.lexemes.size(), 1u);
    EXPECT_EQ(d.lexemes[0].lemma, "кудо");
    EXPECT_EQ(d.lexemes[0].pos, "N");
    ASSERT_EQ(d.lexemes[0].meaning_groups.size(), 1u);
    EXPECT_EQ(d.lexemes[0].meaning_groups[0].translations[0].language, "fin");
    EXPECT_EQ(d.lexemes[0].meaning_groups[0].translations[0].lemma, "talo");
}

TEST(DictionaryXml, TwoGroupsInDocumentOrder) {
    auto d = parse(R"(<dictionary src="myv"><e><l>ки</l>
        <mg><t lang="fin">tie</t></mg><mg><t lang="rus">путь</t></mg></e></dictionary>)");
    auto s = dictionary_stats(d);
    ASSERT_EQ(d.lexemes[0].meaning_groups.size(), 2u);
    EXPECT_EQ(d.lexemes[0].meaning_groups[1].translations[0].lemma, "путь");
    EXPECT_EQ(s.total_translations, 2u);
    EXPECT_FALSE(d.lexemes[0].pos.has_value());
}

TEST(DictionaryXml, EntriesWithoutTranslationsAreKept) {
    auto d = parse(R"(<dictionary src="myv"><e><l>чи</l></e><e><l>ки</l><mg></mg></e></dictionary>)");
    ASSERT_EQ(d.lexemes.size(), 2u);
    EXPECT_TRUE(d.lexemes[0].meaning_groups.empty());
    EXPECT_TRUE(d.lexemes[1].meaning_groups.empty());
}

TEST(DictionaryXml, SyntaxErrorCarriesLine) {
    try {
        parse("<dictionary src=\"myv\">\n<e><l>a</l>\n<mg><t lang=fin>b</t></mg></e>\n</dictionary>");
        FAIL();
    } catch (const FormatError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(DictionaryXml, SchemaErrors) {
    EXPECT_THROW(parse(R"(<lexicon src="myv"/>)"), SchemaError);
    EXPECT_THROW(parse(R"(<dictionary/>)"), SchemaError);
    EXPECT_THROW(parse(R"(<dictionary src="myv"><e><mg><t lang="fin">a</t></mg></e></dictionary>)"), SchemaError);
    EXPECT_THROW(parse(R"(<dictionary src="myv"><e><l>a</l><mg><t>b</t></mg></e></dictionary>)"), SchemaError);
    EXPECT_THROW(parse(R"(<dictionary src="myv"><e><l>a</l><mg><t lang="Fi">b</t></mg></e></dictionary>)"),
                 SchemaError);
    EXPECT_THROW(parse_dictionary_xml("/nonexistent/dict.xml"), IoError);
}

TEST(DictionaryStats, EmptyDictionary) {
    auto s = dictionary_stats(parse(R"(<dictionary src="myv"></dictionary>)"));
    EXPECT_EQ(s.lexeme_count, 0u);
    EXPECT_EQ(s.total_translations, 0u);
    EXPECT_TRUE(s.targets.empty());
}

TEST(DictionaryStats, RepeatedLanguageInGroupCountsOnce) {
    auto s = dictionary_stats(parse(R"(<dictionary src="myv"><e><l>a</l>
        <mg><t lang="eng">x</t><t lang="eng">y</t><t lang="fin">z</t></mg></e></dictionary>)"));
    ASSERT_EQ(s.targets.size(), 2u);
    EXPECT_EQ(s.targets[0].target_language, "eng");
    EXPECT_EQ(s.targets[0].meaning_group_count, 1u);
    EXPECT_EQ(s.targets[0].translation_count, 2u);
    EXPECT_DOUBLE_EQ(s.targets[0].translation_share, 66.67);
    EXPECT_DOUBLE_EQ(s.targets[1].translation_share, 33.33);
}

class ToyDictionaryStats : public ::testing::TestWithParam<const char*> {};

TEST_P(ToyDictionaryStats, MatchesHandCountedManifest) {
    const std::string code = GetParam();
    auto m = manifest(code + "_toy.manifest.json");
    auto d = parse_dictionary_xml(kToy / (code + "_toy.xml"));
    auto s = dictionary_stats(d);
    EXPECT_EQ(s.source_language, m["source_language"]);
    EXPECT_EQ(s.lexeme_count, m["lexemes"]);
    EXPECT_EQ(s.total_translations, m["total_translations"]);
    std::size_t groups = 0, without = 0;
    for (const auto& l : d.lexemes) {
        groups += l.meaning_groups.size();
        without += l.meaning_groups.empty();
    }
    EXPECT_EQ(groups, m["meaning_groups"]);
    EXPECT_EQ(without, m["lexemes_without_groups"]);
    ASSERT_EQ(s.targets.size(), m["targets"].size());
    double share_sum = 0.0;
    for (const auto& t : s.targets) {
        const auto& want = m["targets"][t.target_language];
        EXPECT_EQ(t.meaning_group_count, want["meaning_groups"]) << t.target_language;
        EXPECT_EQ(t.translation_count, want["translations"]) << t.target_language;
        EXPECT_DOUBLE_EQ(t.translation_share, want["share"].get<double>()) << t.target_language;
        share_sum += t.translation_share;
    }
    EXPECT_NEAR(share_sum, 100.0, 0.05);
}

INSTANTIATE_TEST_SUITE_P(Toy, ToyDictionaryStats, ::testing::Values("myv", "mdf"));

TEST(DictionaryStats, SharesSumToHundredOnRandomDictionaries) {
    Rng rng(3);
    const char* langs[] = {"fin", "rus", "eng", "deu", "hun"};
    for (int trial = 0; trial < 100; ++trial) {
        TranslationDictionary d{"myv", {}};
        std::size_t n = 1 + rng.below(30);
        for (std::size_t i = 0; i < n; ++i) {
            Lexeme l{word("l", i), std::nullopt, {}};
            for (std::size_t g = rng.below(4); g > 0; --g) {
                MeaningGroup mg;
                for (std::size_t t = 1 + rng.below(3); t > 0; --t) mg.translations.push_back({langs[rng.below(5)], "x"});
                l.meaning_groups.push_back(mg);
            }
            d.lexemes.push_back(l);
        }
        auto s = dictionary_stats(d);
        if (s.total_translations == 0) continue;
        double sum = 0.0;
        for (const auto& t : s.targets) sum += t.translation_share;
        EXPECT_NEAR(sum, 100.0, 0.05);
    }
}

TEST(ProjectLexeme, SingletonCentroid) {
    auto fin = space_of("fin", 2, {{"talo", {0.25, -3}}});
    TargetSpaces spaces{{"fin", {&fin, {}}}};
    Lexeme l{"кудо", {}, {{{{"fin", "talo"}}}}};
    auto v = project_lexeme(l, spaces);
    ASSERT_TRUE(v);
    EXPECT_EQ(to_std(*v), (std::vector<double>{0.25, -3}));
}

TEST(ProjectLexeme, TwoPointMean) {
    auto fin = space_of("fin", 2, {{"a", {1, 0}}, {"b", {0, 1}}});
    TargetSpaces spaces{{"fin", {&fin, {}}}};
    Lexeme l{"x", {}, {{{{"fin", "a"}}}, {{{"fin", "b"}}}}};
    EXPECT_EQ(to_std(*project_lexeme(l, spaces)), (std::vector<double>{0.5, 0.5}));
}

TEST(ProjectLexeme, AllVectorsAcrossLanguagesAndSenses) {
    auto fin = space_of("fin", 3, {{"a", {1, 2, 3}}});
    auto rus = space_of("rus", 3, {{"b", {0, 1, 0}}, {"b", {4, 0, -1}}});
    TargetSpaces spaces{{"fin", {&fin, {}}}, {"rus", {&rus, {}}}};
    Lexeme l{"x", {}, {{{{"fin", "a"}, {"rus", "b"}, {"eng", "c"}}}}};
    auto v = project_lexeme(l, spaces);
    std::vector<double> want{(1.0 + 0 + 4) / 3, (2.0 + 1 + 0) / 3, (3.0 + 0 - 1) / 3};
    for (int i = 0; i < 3; ++i) EXPECT_NEAR((*v)(i), want[i], 1e-15);
}

TEST(ProjectLexeme, NormalizesCitationForms) {
    auto rus = space_of("rus", 2, {{"дом", {1, 1}}});
    NormalizationPolicy p;
    p.strip_pos_suffix = true;
    TargetSpaces spaces{{"rus", {&rus, p}}};
    Lexeme l{"x", {}, {{{{"rus", "дом_NOUN"}}}}};
    EXPECT_TRUE(project_lexeme(l, spaces));
}

TEST(ProjectLexeme, UnresolvedIsAbsent) {
    auto fin = space_of("fin", 2, {{"a", {1, 0}}});
    TargetSpaces spaces{{"fin", {&fin, {}}}};
    EXPECT_FALSE(project_lexeme(Lexeme{"x", {}, {{{{"fin", "zz"}}}}}, spaces));
    EXPECT_FALSE(project_lexeme(Lexeme{"x", {}, {}}, spaces));
}

TEST(ProjectLexeme, DimensionMismatchIsShapeError) {
    auto fin = space_of("fin", 2, {{"a", {1, 0}}});
    auto rus = space_of("rus", 3, {{"a", {1, 0, 0}}});
    TargetSpaces spaces{{"fin", {&fin, {}}}, {"rus", {&rus, {}}}};
    EXPECT_THROW(project_lexeme(Lexeme{"x", {}, {{{{"fin", "a"}}}}}, spaces), ShapeError);
}

TEST(BuildEndangered, TenLexemesThreeUnresolvable) {
    auto fin = make_space("fin", RowMatrix::Identity(7, 7), "t");
    TargetSpaces spaces{{"fin", {&fin, {}}}};
    TranslationDictionary d{"myv", {}};
    for (std::size_t i = 0; i < 10; ++i)
        d.lexemes.push_back({word("m", i), {}, {{{{"fin", i < 7 ? word("t", i) : word("zz", i)}}}}});
    auto r = build_endangered_embeddings(d, spaces, "myv");
    EXPECT_EQ(r.embeddings.lemma_count(), 7u);
    EXPECT_EQ(r.coverage.projected, 7u);
    EXPECT_EQ(r.coverage.skipped, 3u);
    EXPECT_EQ(r.coverage.resolved_translations.at("fin"), 7u);
    EXPECT_EQ(r.coverage.to_text(),
              "language: myv\nlexemes: 10\nprojected: 7\nskipped: 3\nresolved_translations.fin: 7\n");
    EXPECT_EQ(r.coverage.to_json_line(),
              "{\"language\":\"myv\",\"lexemes\":10,\"projected\":7,\"skipped\":3,"
              "\"resolved_translations\":{\"fin\":7}}\n");
}

TEST(BuildEndangered, EveryEntryResolvable) {
    auto fin = make_space("fin", RowMatrix::Identity(4, 4), "t");
    TargetSpaces spaces{{"fin", {&fin, {}}}};
    TranslationDictionary d{"myv", {}};
    for (std::size_t i = 0; i < 4; ++i) d.lexemes.push_back({word("m", i), {}, {{{{"fin", word("t", i)}}}}});
    auto r = build_endangered_embeddings(d, spaces, "myv");
    EXPECT_EQ(r.embeddings.lemma_count(), 4u);
    EXPECT_EQ(r.embeddings.lemmas(), (std::vector<std::string>{"m0", "m1", "m2", "m3"}));
}

TEST(BuildEndangered, NothingProjectable) {
    auto fin = space_of("fin", 2, {{"a", {1, 0}}});
    TargetSpaces spaces{{"fin", {&fin, {}}}};
    TranslationDictionary d{"myv", {{"x", {}, {{{{"fin", "zz"}}}}}}};
    EXPECT_THROW(build_endangered_embeddings(d, spaces, "myv"), ConstructionError);
    EXPECT_THROW(build_endangered_embeddings(d, {}, "myv"), ConstructionError);
}

TEST(BuildEndangered, ToyDictionaryAgainstExplicitSums) {
    ToySpaces toy;
    auto dict = parse_dictionary_xml(kToy / "myv_toy.xml");
    auto r = build_endangered_embeddings(dict, toy.spaces, "myv");
    auto m = manifest("myv_toy.manifest.json")["projection"];
    EXPECT_EQ(r.coverage.projected, m["projected"]);
    EXPECT_EQ(r.coverage.skipped, m["skipped"]);
    EXPECT_EQ(r.coverage.projected + r.coverage.skipped, dict.lexemes.size());
    EXPECT_EQ(r.embeddings.lemma_count(), m["vocabulary"]);
    for (const auto& [lang, n] : m["resolved_translations"].items())
        EXPECT_EQ(r.coverage.resolved_translations.at(lang), n.get<std::size_t>()) << lang;

    std::map<std::string, std::multimap<std::string, std::vector<double>>> raw{
        {"fin", raw_vectors("fin.vec")}, {"rus", raw_vectors("rus.vec")}, {"eng", raw_vectors("eng.vec")}};
    std::map<std::string, std::size_t> seen;
    for (const auto& lex : dict.lexemes) {
        std::vector<double> sum(4, 0.0);
        std::size_t count = 0;
        std::vector<double> lo(4, 1e300), hi(4, -1e300);
        for (const auto& g : lex.meaning_groups)
            for (const auto& t : g.translations) {
                auto [b, e] = raw[t.language].equal_range(t.lemma);
                for (auto it = b; it != e; ++it, ++count)
                    for (int c = 0; c < 4; ++c) {
                        sum[c] += it->second[c];
                        lo[c] = std::min(lo[c], it->second[c]);
                        hi[c] = std::max(hi[c], it->second[c]);
                    }
            }
        if (count == 0) continue;
        auto rank = r.embeddings.rank_of(lex.lemma);
        ASSERT_TRUE(rank) << lex.lemma;
        std::size_t row = r.embeddings.rows_of(*rank).at(seen[lex.lemma]++);
        for (int c = 0; c < 4; ++c) {
            double got = r.embeddings.row(row)[static_cast<std::size_t>(c)];
            EXPECT_NEAR(got, sum[c] / static_cast<double>(count), 1e-12) << lex.lemma;
            EXPECT_LE(lo[c], got + 1e-15);
            EXPECT_GE(hi[c], got - 1e-15);
        }
    }
    // The two "ков" senses stay separate vectors of one entry.
    EXPECT_EQ(r.embeddings.lookup("ков").size(), 2u);
}

TEST(BuildEndangered, Deterministic) {
    ToySpaces toy;
    auto dict = parse_dictionary_xml(kToy / "myv_toy.xml");
    auto a = build_endangered_embeddings(dict, toy.spaces, "myv");
    auto b = build_endangered_embeddings(dict, toy.spaces, "myv");
    EXPECT_EQ(a.embeddings.matrix(), b.embeddings.matrix());
    EXPECT_EQ(a.embeddings.lemmas(), b.embeddings.lemmas());
}
