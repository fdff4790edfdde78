// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

// Writes the synthetic two-domain corpus used by the tests and examples.

#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "desk_corpus.hpp"

int main(int argc, char** argv)
{
    dualtrain::fixture::DeskCorpusOptions options;
    std::string out;
    CLI::App app{"Generate the synthetic two-domain corpus", "make_desk_corpus"};
    app.add_option("--out", out, "directory receiving manifest.json and the JSON Lines files")->required();
    app.add_option("--seed", options.seed, "generator seed");
    app.add_option("--source-pairs", options.source_pairs);
    app.add_option("--target-passages", options.target_passages);
    app.add_option("--target-questions", options.target_questions);
    app.add_option("--dev", options.dev_pairs);
    app.add_option("--test", options.test_pairs);
    CLI11_PARSE(app, argc, argv);
    try {
        dualtrain::corpus::write_bundle(dualtrain::fixture::make_desk_corpus(options), out);
    } catch (const std::exception& e) {
        std::cerr << "make_desk_corpus: error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
