#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "xling/error.hpp"

namespace {

int exit_code(xling::ErrorClass c) {
    switch (c) {
        case xling::ErrorClass::config: return 1;
        case xling::ErrorClass::data: return 2;
        case xling::ErrorClass::numerical: return 3;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace xling::cli;

    CLI::App app{"Cross-lingual word embeddings for low-resource languages"};
    app.require_subcommand(1);
    app.set_version_flag("--version", XLING_VERSION);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    bool quiet = false;
    auto common = [&](CLI::App* sub, bool config_required) {
        auto* opt = sub->add_option("--config", config_path, "Pipeline configuration (JSON)");
        if (config_required) opt->required();
        sub->add_option("--seed", seed, "Override the configured random seed");
        sub->add_option("--out", out, "Override the configured output directory");
        sub->add_flag("-q,--quiet", quiet, "No progress messages");
    };

    auto* reduce = app.add_subcommand("reduce", "Normalize and reduce the resource-rich spaces");
    auto* align = app.add_subcommand("align", "Align resource-rich spaces with the anchor");
    auto* project = app.add_subcommand("project", "Build endangered-language spaces from dictionaries");
    auto* finetune = app.add_subcommand("finetune", "Fine-tune on treebanks and re-align");
    auto* run = app.add_subcommand("run", "Run every stage in order");
    auto* nn = app.add_subcommand("nn", "Nearest neighbors of a lemma");
    auto* strain = app.add_subcommand("sentiment-train", "Train the sentiment classifier");
    auto* seval = app.add_subcommand("sentiment-eval", "Evaluate the sentiment classifier");
    for (auto* s : {reduce, align, project, finetune, run, strain, seval}) common(s, true);
    common(nn, false);

    NnQuery q;
    std::string metric = "cosine";
    std::optional<std::string> from_vectors, to_vectors;
    nn->add_option("--query", q.query, "Query lemma")->required();
    nn->add_option("--from", q.from, "Query language")->required();
    nn->add_option("--to", q.to, "Searched language (default: --from)");
    nn->add_option("-k", q.k, "Number of neighbors")->capture_default_str();
    nn->add_option("--metric", metric, "cosine or csls")
        ->check(CLI::IsMember({"cosine", "csls"}))
        ->capture_default_str();
    nn->add_option("--csls-k", q.csls_k, "CSLS neighborhood size")->capture_default_str();
    nn->add_option("--from-vectors", from_vectors, "Query space file (word2vec text)");
    nn->add_option("--to-vectors", to_vectors, "Searched space file (word2vec text)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (quiet) set_log_stream(nullptr);
        std::optional<std::filesystem::path> out_dir;
        if (out) out_dir = *out;
        std::optional<PipelineConfig> config;
        if (!config_path.empty()) config = load_config(config_path, seed, out_dir);

        if (*nn) {
            if (q.to.empty()) q.to = q.from;
            q.metric = metric == "csls" ? xling::Metric::csls : xling::Metric::cosine;
            if (from_vectors) q.from_vectors = *from_vectors;
            if (to_vectors) q.to_vectors = *to_vectors;
            std::cout << cmd_nn(config ? &*config : nullptr, q);
        } else if (*reduce) {
            cmd_reduce(*config);
        } else if (*align) {
            cmd_align(*config);
        } else if (*project) {
            cmd_project(*config);
        } else if (*finetune) {
            cmd_finetune(*config);
        } else if (*run) {
            cmd_run(*config);
        } else if (*strain) {
            cmd_sentiment_train(*config);
        } else if (*seval) {
            for (const auto& r : cmd_sentiment_eval(*config))
                std::cout << "[" << r.language << " " << xling::to_string(r.mode) << "]\n"
                          << r.evaluation.to_text() << '\n';
        }
    } catch (const xling::Error& e) {
        std::cerr << "xling: " << e.what() << '\n';
        return exit_code(e.error_class());
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "xling: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "xling: internal error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
