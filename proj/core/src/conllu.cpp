#include "xling/conllu.hpp"

#include <fstream>
#include <istream>

#include "xling/error.hpp"
#include "xling/text.hpp"

namespace xling {

std::optional<Sentiment> parse_sentiment(std::string_view label) {
    if (label == "positive") return Sentiment::positive;
    if (label == "negative") return Sentiment::negative;
    return std::nullopt;
}

std::string_view to_string(Sentiment s) {
    return s == Sentiment::positive ? "positive" : "negative";
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    for (;;) {
        auto j = line.find('\t', i);
        if (j == std::string_view::npos) {
            out.push_back(line.substr(i));
            return out;
        }
        out.push_back(line.substr(i, j - i));
        i = j + 1;
    }
}

void read_comment(std::string_view body, LemmaSentence& sentence) {
    body.remove_prefix(1);  // '#'
    auto eq = body.find('=');
    if (eq == std::string_view::npos) return;
    std::string_view key = trim(body.substr(0, eq));
    std::string_view value = trim(body.substr(eq + 1));
    if (key == "sent_id") {
        sentence.sentence_id = std::string(value);
    } else if (key.starts_with("text_") && key.size() > 5) {
        sentence.translation_comments[std::string(key.substr(5))] = std::string(value);
    } else if (key.starts_with("text[") && key.ends_with("]") && key.size() > 6) {
        sentence.translation_comments[std::string(key.substr(5, key.size() - 6))] =
            std::string(value);
    }
}

}  // namespace

std::vector<LemmaSentence> read_conllu(std::istream& in) {
    std::vector<LemmaSentence> out;
    LemmaSentence current;
    bool open = false;
    std::size_t ordinal = 0;
    auto flush = [&] {
        if (!open) return;
        ++ordinal;
        if (!current.lemmas.empty()) {
            if (current.sentence_id.empty()) current.sentence_id = std::to_string(ordinal);
            out.push_back(std::move(current));
        }
        current = LemmaSentence{};
        open = false;
    };

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view body = chomp(line);
        if (trim(body).empty()) {
            flush();
            continue;
        }
        open = true;
        if (body.front() == '#') {
            read_comment(body, current);
            continue;
        }
        auto fields = split_tabs(body);
        if (fields.size() != 10)
            throw FormatError("token line has " + std::to_string(fields.size()) +
                                  " fields, expected 10",
                              line_no);
        std::string_view id = fields[0];
        if (id.find('-') != std::string_view::npos || id.find('.') != std::string_view::npos)
            continue;
        std::string_view lemma = fields[2];
        if (lemma == "_" && fields[1] != "_")
            current.lemmas.push_back(utf8_lower(fields[1]));
        else
            current.lemmas.emplace_back(lemma);
    }
    flush();
    return out;
}

std::vector<LemmaSentence> parse_conllu(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open treebank " + path.string());
    try {
        return read_conllu(in);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

std::map<std::string, Sentiment> read_sentiment_labels(std::istream& in) {
    std::map<std::string, Sentiment> labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view body = chomp(line);
        if (trim(body).empty()) continue;
        auto tab = body.find('\t');
        if (tab == std::string_view::npos)
            throw FormatError("expected '<sentence_id>\\t<label>'", line_no);
        std::string_view id = trim(body.substr(0, tab));
        std::string_view label = trim(body.substr(tab + 1));
        if (id.empty()) throw FormatError("empty sentence id", line_no);
        if (auto s = parse_sentiment(label)) labels[std::string(id)] = *s;
    }
    return labels;
}

std::map<std::string, Sentiment> load_sentiment_labels(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return read_sentiment_labels(in);
}

std::size_t attach_sentiment_labels(std::vector<LemmaSentence>& sentences,
                                    const std::map<std::string, Sentiment>& labels) {
    std::size_t n = 0;
    for (auto& s : sentences) {
        auto it = labels.find(s.sentence_id);
        if (it == labels.end()) continue;
        s.sentiment_label = it->second;
        ++n;
    }
    return n;
}

}  // namespace xling
