// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

// Test double speaking the plugin protocol. argv[1] selects the behaviour:
//   gen | ret   well-behaved generator or retriever
//   badjson     answers the handshake with invalid JSON
//   silent      never answers
//   error       answers every request after the handshake with an error

#include <cstdio>
#include <iostream>
#include <string>
#include <thread>

#include <json.hpp>

using nlohmann::json;

int main(int argc, char** argv)
{
    const std::string mode = argc > 1 ? argv[1] : "gen";
    std::string line;
    bool greeted = false;
    while (std::getline(std::cin, line)) {
        if (mode == "silent") {
            std::this_thread::sleep_for(std::chrono::seconds(30));
            return 0;
        }
        if (mode == "badjson") {
            std::cout << "{not json\n" << std::flush;
            continue;
        }
        const auto req = json::parse(line);
        const auto op = req.value("op", "");
        json resp;
        if (op == "hello") {
            greeted = true;
            if (mode == "ret") {
                resp = {{"name", "fake-ret"}, {"role", "retriever"}, {"caps", {"encode", "train"}}};
            } else {
                resp = {{"name", "fake-gen"}, {"role", "generator"}, {"caps", {"generate", "score_qg", "train"}}};
            }
        } else if (!greeted || mode == "error") {
            resp = {{"error", "fake failure for " + op}};
        } else if (op == "generate") {
            const auto passage = req.at("passage").get<std::string>();
            const auto first = passage.substr(0, passage.find(' '));
            resp = {{"question", "what is " + first + "?"}, {"loglik", -1.5}};
        } else if (op == "score_qg") {
            resp = {{"loglik", -static_cast<double>(req.at("question").get<std::string>().size()) / 10.0}};
        } else if (op == "encode") {
            const auto text = req.at("text").get<std::string>();
            json vec = json::array({0.0, 0.0, 0.0});
            for (const char c : text) {
                vec[static_cast<unsigned char>(c) % 3] = vec[static_cast<unsigned char>(c) % 3].get<double>() + 1.0;
            }
            resp = {{"vec", vec}};
        } else if (op == "train") {
            resp = {{"ok", true}};
        } else {
            resp = {{"error", "unknown op " + op}};
        }
        std::cout << resp.dump() << '\n' << std::flush;
    }
    return 0;
}
