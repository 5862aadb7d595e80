#include "xling/dictionary.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <nlohmann/json.hpp>

#include "xling/error.hpp"
#include "xling/text.hpp"

namespace xling {

namespace pt = boost::property_tree;

namespace {

std::optional<std::string> attribute(const pt::ptree& node, const char* name) {
    if (auto attrs = node.get_child_optional("<xmlattr>"))
        if (auto v = attrs->get_optional<std::string>(name)) return std::string(trim(*v));
    return std::nullopt;
}

std::string text_of(const pt::ptree& node) { return std::string(trim(node.data())); }

bool is_markup(const std::string& key) { return key == "<xmlattr>" || key == "<xmlcomment>"; }

Lexeme read_entry(const pt::ptree& entry, std::size_t ordinal) {
    Lexeme lex;
    bool have_lemma = false;
    for (const auto& [key, child] : entry) {
        if (key == "l" && !have_lemma) {
            lex.lemma = text_of(child);
            lex.pos = attribute(child, "pos");
            have_lemma = true;
        } else if (key == "mg") {
            MeaningGroup group;
            for (const auto& [tkey, t] : child) {
                if (tkey != "t") continue;
                auto lang = attribute(t, "lang");
                if (!lang)
                    throw SchemaError("entry " + std::to_string(ordinal) +
                                      ": translation without a lang attribute");
                if (!is_iso639_3(*lang))
                    throw SchemaError("entry " + std::to_string(ordinal) + ": '" + *lang +
                                      "' is not an ISO 639-3 code");
                std::string value = text_of(t);
                if (value.empty())
                    throw SchemaError("entry " + std::to_string(ordinal) + ": empty translation");
                group.translations.push_back({*lang, std::move(value)});
            }
            if (!group.translations.empty()) lex.meaning_groups.push_back(std::move(group));
        }
    }
    if (!have_lemma || lex.lemma.empty())
        throw SchemaError("entry " + std::to_string(ordinal) + " has no lemma");
    return lex;
}

}  // namespace

TranslationDictionary read_dictionary_xml(std::istream& in, const std::string& name) {
    pt::ptree tree;
    try {
        pt::read_xml(in, tree);
    } catch (const pt::xml_parser_error& e) {
        throw FormatError(name + ": XML syntax error: " + e.message(), e.line());
    }

    const pt::ptree* root = nullptr;
    std::string root_name;
    for (const auto& [key, child] : tree) {
        if (is_markup(key) || key == "<xmldecl>") continue;
        if (root) throw SchemaError(name + ": more than one root element");
        root = &child;
        root_name = key;
    }
    if (!root) throw SchemaError(name + ": no root element");
    if (root_name != "dictionary")
        throw SchemaError(name + ": unknown root element <" + root_name + ">");

    TranslationDictionary dict;
    auto src = attribute(*root, "src");
    if (!src || !is_iso639_3(*src))
        throw SchemaError(name + ": <dictionary> needs an ISO 639-3 src attribute");
    dict.source_language = *src;

    std::size_t ordinal = 0;
    for (const auto& [key, child] : *root) {
        if (key != "e") continue;
        ++ordinal;
        dict.lexemes.push_back(read_entry(child, ordinal));
    }
    return dict;
}

TranslationDictionary parse_dictionary_xml(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open dictionary " + path.string());
    return read_dictionary_xml(in, path.string());
}

DictionaryStats dictionary_stats(const TranslationDictionary& dictionary) {
    DictionaryStats stats;
    stats.source_language = dictionary.source_language;
    stats.lexeme_count = dictionary.lexemes.size();
    std::map<std::string, TargetStats> per_target;
    for (const auto& lex : dictionary.lexemes)
        for (const auto& group : lex.meaning_groups) {
            std::map<std::string, std::size_t> in_group;
            for (const auto& t : group.translations) ++in_group[t.language];
            for (const auto& [lang, n] : in_group) {
                auto& ts = per_target[lang];
                ts.target_language = lang;
                ts.meaning_group_count += 1;
                ts.translation_count += n;
                stats.total_translations += n;
            }
        }
    for (auto& [lang, ts] : per_target) {
        if (stats.total_translations > 0) {
            double share = 100.0 * static_cast<double>(ts.translation_count) /
                           static_cast<double>(stats.total_translations);
            ts.translation_share = std::round(share * 100.0) / 100.0;
        }
        stats.targets.push_back(ts);
    }
    return stats;
}

std::optional<Eigen::VectorXd> project_lexeme(const Lexeme& lexeme, const TargetSpaces& spaces) {
    std::optional<std::size_t> dim;
    for (const auto& [lang, space] : spaces) {
        if (!space.embeddings) continue;
        if (dim && *dim != space.embeddings->dim())
            throw ShapeError("target spaces differ in dimension (" + std::to_string(*dim) + " vs " +
                             std::to_string(space.embeddings->dim()) + " for " + lang + ")");
        dim = space.embeddings->dim();
    }
    if (!dim) return std::nullopt;

    Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(*dim));
    std::size_t count = 0;
    for (const auto& group : lexeme.meaning_groups)
        for (const auto& t : group.translations) {
            auto it = spaces.find(t.language);
            if (it == spaces.end() || !it->second.embeddings) continue;
            std::string key = normalize_lemma(t.lemma, it->second.policy);
            for (auto v : it->second.embeddings->lookup(key)) {
                sum += Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
                ++count;
            }
        }
    if (count == 0) return std::nullopt;
    return Eigen::VectorXd(sum / static_cast<double>(count));
}

std::string CoverageReport::to_text() const {
    std::ostringstream out;
    out << "language: " << language << '\n'
        << "lexemes: " << lexeme_count << '\n'
        << "projected: " << projected << '\n'
        << "skipped: " << skipped << '\n';
    for (const auto& [lang, n] : resolved_translations)
        out << "resolved_translations." << lang << ": " << n << '\n';
    return out.str();
}

std::string CoverageReport::to_json_line() const {
    nlohmann::ordered_json j;
    j["language"] = language;
    j["lexemes"] = lexeme_count;
    j["projected"] = projected;
    j["skipped"] = skipped;
    j["resolved_translations"] = nlohmann::ordered_json::object();
    for (const auto& [lang, n] : resolved_translations) j["resolved_translations"][lang] = n;
    return j.dump() + '\n';
}

ProjectionResult build_endangered_embeddings(const TranslationDictionary& dictionary,
                                             const TargetSpaces& spaces,
                                             const std::string& language) {
    std::optional<std::size_t> dim;
    for (const auto& [lang, space] : spaces)
        if (space.embeddings) {
            if (dim && *dim != space.embeddings->dim())
                throw ShapeError("target spaces differ in dimension");
            dim = space.embeddings->dim();
        }
    if (!dim) throw ConstructionError("no target spaces to project " + language + " into");

    CoverageReport report;
    report.language = language;
    report.lexeme_count = dictionary.lexemes.size();
    for (const auto& [lang, space] : spaces)
        if (space.embeddings) report.resolved_translations[lang] = 0;

    EmbeddingsBuilder builder(language, *dim);
    for (const auto& lex : dictionary.lexemes) {
        for (const auto& group : lex.meaning_groups)
            for (const auto& t : group.translations) {
                auto it = spaces.find(t.language);
                if (it == spaces.end() || !it->second.embeddings) continue;
                if (it->second.embeddings->contains(normalize_lemma(t.lemma, it->second.policy)))
                    ++report.resolved_translations[t.language];
            }
        auto v = project_lexeme(lex, spaces);
        if (!v) {
            ++report.skipped;
            continue;
        }
        builder.add(lex.lemma, std::span<const double>(v->data(), static_cast<std::size_t>(v->size())));
        ++report.projected;
    }
    if (report.projected == 0)
        throw ConstructionError("no lexeme of the " + language +
                                " dictionary has a translation in the given spaces");
    return {std::move(builder).build(), std::move(report)};
}

}  // namespace xling
