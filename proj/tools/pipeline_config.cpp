#include "pipeline_config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "xling/error.hpp"
#include "xling/text.hpp"

namespace xling::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* k : allowed) known = known || item.key() == k;
        if (!known) throw ConfigError(where + ": unknown key \"" + item.key() + "\"");
    }
}

template <class T>
T get(const json& obj, const char* key, const std::string& where, T fallback) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + " has the wrong type");
    }
}

bool is_count(const json& v) {
    return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

std::size_t get_count(const json& obj, const char* key, const std::string& where, std::size_t fallback) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!is_count(*it)) throw ConfigError(where + "." + key + " must be a non-negative integer");
    return it->get<std::size_t>();
}

double get_rate(const json& obj, const char* key, const std::string& where, double fallback) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_number() || it->get<double>() < 0.0)
        throw ConfigError(where + "." + key + " must be a non-negative number");
    return it->get<double>();
}

std::optional<fs::path> get_path(const json& obj, const char* key, const std::string& where,
                                 const fs::path& base) {
    auto it = obj.find(key);
    if (it == obj.end()) return std::nullopt;
    if (!it->is_string() || it->get<std::string>().empty())
        throw ConfigError(where + "." + key + " must be a non-empty path");
    fs::path p = it->get<std::string>();
    return p.is_absolute() ? p : (base / p).lexically_normal();
}

char get_char(const json& obj, const char* key, const std::string& where, char fallback) {
    auto s = get<std::string>(obj, key, where, std::string(1, fallback));
    if (s.size() != 1) throw ConfigError(where + "." + key + " must be a single ASCII character");
    return s[0];
}

RefinementConfig parse_refinement(const json& obj, const std::string& where, RefinementConfig c) {
    c.iterations = get_count(obj, "iterations", where, c.iterations);
    c.csls_k = get_count(obj, "csls_k", where, c.csls_k);
    c.induction_vocab_limit = get_count(obj, "induction_vocab_limit", where, c.induction_vocab_limit);
    if (c.csls_k == 0) throw ConfigError(where + ".csls_k must be at least 1");
    if (c.induction_vocab_limit == 0) throw ConfigError(where + ".induction_vocab_limit must be at least 1");
    return c;
}

Role parse_role(const std::string& s, const std::string& where) {
    if (s == "anchor") return Role::anchor;
    if (s == "resource-rich") return Role::resource_rich;
    if (s == "endangered") return Role::endangered;
    throw ConfigError(where + ".role must be anchor, resource-rich or endangered");
}

json path_json(const std::optional<fs::path>& p) { return p ? json(p->generic_string()) : json(nullptr); }

}  // namespace

std::string_view to_string(Role role) {
    switch (role) {
        case Role::anchor: return "anchor";
        case Role::resource_rich: return "resource-rich";
        case Role::endangered: return "endangered";
    }
    return "?";
}

const LanguageConfig& PipelineConfig::anchor() const {
    for (const auto& l : languages)
        if (l.role == Role::anchor) return l;
    throw ConfigError("no anchor language configured");
}

const LanguageConfig* PipelineConfig::find(std::string_view code) const {
    for (const auto& l : languages)
        if (l.code == code) return &l;
    return nullptr;
}

std::vector<const LanguageConfig*> PipelineConfig::with_role(Role role) const {
    std::vector<const LanguageConfig*> out;
    for (const auto& l : languages)
        if (l.role == role) out.push_back(&l);
    return out;
}

nlohmann::json PipelineConfig::to_json() const {
    json j;
    j["seed"] = seed;
    j["output_dir"] = output_dir.generic_string();
    j["reduction"] = {{"target_dim", reduction.target_dim}, {"ppa_components", reduction.ppa_components}};
    auto refinement = [](const RefinementConfig& c) {
        return json{{"iterations", c.iterations},
                    {"csls_k", c.csls_k},
                    {"induction_vocab_limit", c.induction_vocab_limit}};
    };
    j["alignment"] = refinement(alignment);
    j["realignment"] = refinement(realignment);
    j["realignment"]["use_dictionary_seed"] = realign_with_dictionary_seed;
    j["finetune"] = {{"window", finetune.window},
                     {"negative_samples", finetune.negative_samples},
                     {"epochs", finetune.epochs},
                     {"learning_rate", finetune.initial_learning_rate},
                     {"final_learning_rate", finetune.final_learning_rate},
                     {"min_count", finetune.min_count},
                     {"unigram_power", finetune.unigram_power},
                     {"admit_oov", finetune.admit_oov},
                     {"shuffle", finetune.shuffle}};
    j["languages"] = json::array();
    for (const auto& l : languages) {
        json n = {{"strip_compound_marker", l.normalization.strip_compound_marker},
                  {"compound_marker", std::string(1, l.normalization.compound_marker)},
                  {"strip_pos_suffix", l.normalization.strip_pos_suffix},
                  {"pos_separator", std::string(1, l.normalization.pos_separator)},
                  {"lowercase", l.normalization.lowercase}};
        j["languages"].push_back({{"code", l.code},
                                  {"role", std::string(to_string(l.role))},
                                  {"embeddings", path_json(l.embeddings)},
                                  {"normalization", n},
                                  {"seed_lexicon", path_json(l.seed_lexicon)},
                                  {"dictionary", path_json(l.dictionary)},
                                  {"treebank", path_json(l.treebank)},
                                  {"realign_to", l.realign_to ? json(*l.realign_to) : json(nullptr)}});
    }
    json evals = json::array();
    for (const auto& e : sentiment.evaluations)
        evals.push_back({{"language", e.language},
                         {"corpus", path_json(e.corpus)},
                         {"treebank", path_json(e.treebank)},
                         {"labels", path_json(e.labels)},
                         {"mode", std::string(to_string(e.mode))}});
    j["sentiment"] = {{"train", path_json(sentiment.train)},
                      {"epochs", sentiment.epochs},
                      {"learning_rate", sentiment.learning_rate},
                      {"buckets", sentiment.buckets},
                      {"shuffle", sentiment.shuffle},
                      {"bigrams_from_anchor", sentiment.bigrams_from_anchor},
                      {"evaluations", evals}};
    return j;
}

std::string PipelineConfig::hash() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64([&] {
                      json j = to_json();
                      j.erase("output_dir");
                      return j.dump();
                  }())));
    return buf;
}

PipelineConfig parse_pipeline_config(const nlohmann::json& doc, const std::filesystem::path& base) {
    check_keys(doc, "config",
               {"seed", "output_dir", "reduction", "alignment", "realignment", "finetune", "languages",
                "sentiment"});
    PipelineConfig c;
    auto seed = doc.find("seed");
    if (seed != doc.end()) {
        if (!is_count(*seed)) throw ConfigError("config.seed must be a non-negative integer");
        c.seed = seed->get<std::uint64_t>();
    }
    if (auto p = get_path(doc, "output_dir", "config", base)) c.output_dir = *p;
    else c.output_dir = (base / "out").lexically_normal();

    if (auto it = doc.find("reduction"); it != doc.end()) {
        check_keys(*it, "reduction", {"target_dim", "ppa_components"});
        c.reduction.target_dim = get_count(*it, "target_dim", "reduction", c.reduction.target_dim);
        c.reduction.ppa_components = get_count(*it, "ppa_components", "reduction", c.reduction.ppa_components);
    }
    if (c.reduction.target_dim == 0) throw ConfigError("reduction.target_dim must be at least 1");
    if (c.reduction.ppa_components >= c.reduction.target_dim)
        throw ConfigError("reduction.ppa_components must be smaller than target_dim");

    if (auto it = doc.find("alignment"); it != doc.end()) {
        check_keys(*it, "alignment", {"iterations", "csls_k", "induction_vocab_limit"});
        c.alignment = parse_refinement(*it, "alignment", c.alignment);
    }
    if (auto it = doc.find("realignment"); it != doc.end()) {
        check_keys(*it, "realignment", {"iterations", "csls_k", "induction_vocab_limit", "use_dictionary_seed"});
        c.realignment = parse_refinement(*it, "realignment", c.realignment);
        c.realign_with_dictionary_seed = get<bool>(*it, "use_dictionary_seed", "realignment", true);
    }
    if (!c.realign_with_dictionary_seed)
        throw ConfigError("realignment.use_dictionary_seed: only dictionary seeds are supported");

    if (auto it = doc.find("finetune"); it != doc.end()) {
        const std::string w = "finetune";
        check_keys(*it, w,
                   {"window", "negative_samples", "epochs", "learning_rate", "final_learning_rate", "min_count",
                    "unigram_power", "admit_oov", "shuffle"});
        auto& f = c.finetune;
        f.window = get_count(*it, "window", w, f.window);
        f.negative_samples = get_count(*it, "negative_samples", w, f.negative_samples);
        f.epochs = get_count(*it, "epochs", w, f.epochs);
        f.initial_learning_rate = get_rate(*it, "learning_rate", w, f.initial_learning_rate);
        f.final_learning_rate = get_rate(*it, "final_learning_rate", w, f.final_learning_rate);
        f.min_count = get_count(*it, "min_count", w, f.min_count);
        f.unigram_power = get_rate(*it, "unigram_power", w, f.unigram_power);
        f.admit_oov = get<bool>(*it, "admit_oov", w, f.admit_oov);
        f.shuffle = get<bool>(*it, "shuffle", w, f.shuffle);
    }
    if (c.finetune.window == 0) throw ConfigError("finetune.window must be at least 1");

    auto langs = doc.find("languages");
    if (langs == doc.end() || !langs->is_array() || langs->empty())
        throw ConfigError("config.languages must be a non-empty array");
    std::set<std::string> codes;
    for (std::size_t i = 0; i < langs->size(); ++i) {
        const json& l = (*langs)[i];
        const std::string w = "languages[" + std::to_string(i) + "]";
        check_keys(l, w,
                   {"code", "role", "embeddings", "normalization", "seed_lexicon", "dictionary", "treebank",
                    "realign_to"});
        LanguageConfig lc;
        lc.code = get<std::string>(l, "code", w, "");
        if (!is_iso639_3(lc.code)) throw ConfigError(w + ".code must be a three-letter ISO 639-3 code");
        if (!codes.insert(lc.code).second) throw ConfigError(w + ": duplicate language " + lc.code);
        if (!l.contains("role")) throw ConfigError(w + ".role is required");
        lc.role = parse_role(get<std::string>(l, "role", w, ""), w);
        lc.embeddings = get_path(l, "embeddings", w, base);
        lc.seed_lexicon = get_path(l, "seed_lexicon", w, base);
        lc.dictionary = get_path(l, "dictionary", w, base);
        lc.treebank = get_path(l, "treebank", w, base);
        if (l.contains("realign_to")) lc.realign_to = get<std::string>(l, "realign_to", w, "");
        if (auto n = l.find("normalization"); n != l.end()) {
            const std::string nw = w + ".normalization";
            check_keys(*n, nw,
                       {"strip_compound_marker", "compound_marker", "strip_pos_suffix", "pos_separator",
                        "lowercase"});
            auto& p = lc.normalization;
            p.strip_compound_marker = get<bool>(*n, "strip_compound_marker", nw, false);
            p.compound_marker = get_char(*n, "compound_marker", nw, '#');
            p.strip_pos_suffix = get<bool>(*n, "strip_pos_suffix", nw, false);
            p.pos_separator = get_char(*n, "pos_separator", nw, '_');
            p.lowercase = get<bool>(*n, "lowercase", nw, false);
        }

        switch (lc.role) {
            case Role::anchor:
                if (!lc.embeddings) throw ConfigError(w + ": the anchor needs embeddings");
                if (lc.seed_lexicon || lc.realign_to)
                    throw ConfigError(w + ": the anchor takes no seed_lexicon or realign_to");
                break;
            case Role::resource_rich:
                if (!lc.embeddings || !lc.seed_lexicon)
                    throw ConfigError(w + ": a resource-rich language needs embeddings and seed_lexicon");
                if (lc.realign_to) throw ConfigError(w + ": realign_to applies to endangered languages");
                break;
            case Role::endangered:
                if (lc.embeddings) throw ConfigError(w + ": endangered embeddings are built, not loaded");
                if (!lc.dictionary) throw ConfigError(w + ": an endangered language needs a dictionary");
                if (!lc.realign_to) throw ConfigError(w + ": an endangered language needs realign_to");
                break;
        }
        c.languages.push_back(std::move(lc));
    }
    if (c.with_role(Role::anchor).size() != 1) throw ConfigError("exactly one anchor language is required");
    for (const auto& l : c.languages) {
        if (!l.realign_to) continue;
        const LanguageConfig* t = c.find(*l.realign_to);
        if (!t || t->role == Role::endangered)
            throw ConfigError(l.code + ".realign_to must name a configured anchor or resource-rich language");
    }

    if (auto s = doc.find("sentiment"); s != doc.end()) {
        const std::string w = "sentiment";
        check_keys(*s, w, {"train", "epochs", "learning_rate", "buckets", "shuffle", "bigrams_from_anchor",
                           "evaluations"});
        auto& st = c.sentiment;
        st.train = get_path(*s, "train", w, base);
        st.epochs = get_count(*s, "epochs", w, st.epochs);
        st.learning_rate = get_rate(*s, "learning_rate", w, st.learning_rate);
        st.buckets = get_count(*s, "buckets", w, st.buckets);
        st.shuffle = get<bool>(*s, "shuffle", w, st.shuffle);
        st.bigrams_from_anchor = get<bool>(*s, "bigrams_from_anchor", w, st.bigrams_from_anchor);
        if (st.buckets == 0 || (st.buckets & (st.buckets - 1)) != 0)
            throw ConfigError("sentiment.buckets must be a power of two");
        if (auto ev = s->find("evaluations"); ev != s->end()) {
            if (!ev->is_array()) throw ConfigError("sentiment.evaluations must be an array");
            for (std::size_t i = 0; i < ev->size(); ++i) {
                const json& e = (*ev)[i];
                const std::string ew = "sentiment.evaluations[" + std::to_string(i) + "]";
                check_keys(e, ew, {"language", "corpus", "treebank", "labels", "mode"});
                EvaluationConfig ec;
                ec.language = get<std::string>(e, "language", ew, "");
                if (!c.find(ec.language)) throw ConfigError(ew + ".language is not configured");
                ec.corpus = get_path(e, "corpus", ew, base);
                ec.treebank = get_path(e, "treebank", ew, base);
                ec.labels = get_path(e, "labels", ew, base);
                if (ec.corpus.has_value() == (ec.treebank.has_value() || ec.labels.has_value()))
                    throw ConfigError(ew + ": give either corpus or treebank + labels");
                if (ec.treebank.has_value() != ec.labels.has_value())
                    throw ConfigError(ew + ": treebank and labels go together");
                auto mode = parse_transfer_mode(get<std::string>(e, "mode", ew, "direct"));
                if (!mode) throw ConfigError(ew + ".mode must be direct, substitute or boost");
                ec.mode = *mode;
                if (ec.mode == TransferMode::boost && !c.find(ec.language)->dictionary)
                    throw ConfigError(ew + ": boost mode needs a language with a dictionary");
                st.evaluations.push_back(std::move(ec));
            }
        }
    }
    return c;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
    return parse_pipeline_config(doc, base);
}

}  // namespace xling::cli
