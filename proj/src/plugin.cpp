// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#include "dualtrain/plugin.hpp"

#include <atomic>
#include <cerrno>
#include <csignal>
#include <cstring>
#include <fstream>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <spdlog/spdlog.h>

namespace dualtrain::models {

namespace {

std::string truncate(const std::string& s, std::size_t n = 200)
{
    return s.size() <= n ? s : s.substr(0, n) + "...";
}

const char* role_name(PluginRole role)
{
    return role == PluginRole::generator ? "generator" : "retriever";
}

std::filesystem::path temp_file(const char* stem)
{
    static std::atomic<unsigned> counter{0};
    return std::filesystem::temp_directory_path() /
           (std::string("dualtrain-") + stem + "-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter.fetch_add(1)) + ".jsonl");
}

// Removes the files when the request is done.
struct TempFiles {
    std::vector<std::filesystem::path> paths;
    ~TempFiles()
    {
        for (const auto& p : paths) {
            std::error_code ec;
            std::filesystem::remove(p, ec);
        }
    }
};

double require_number(const nlohmann::json& response, const char* key, const std::string& raw)
{
    auto it = response.find(key);
    if (it == response.end() || !it->is_number()) {
        throw PluginError(std::string("protocol violation: response lacks numeric \"") + key + "\"", raw);
    }
    return it->get<double>();
}

}  // namespace

PluginError::PluginError(const std::string& what, std::string payload)
    : ModelError(payload.empty() ? what : what + " (payload: " + truncate(payload) + ")"),
      payload_(std::move(payload))
{}

bool PluginInfo::has(std::string_view cap) const
{
    for (const auto& c : caps) {
        if (c == cap) {
            return true;
        }
    }
    return false;
}

PluginProcess::PluginProcess(std::string command, PluginOptions options)
    : command_(std::move(command)), options_(options)
{}

std::shared_ptr<PluginProcess> PluginProcess::spawn(const std::string& command, PluginRole role,
                                                    const PluginOptions& options)
{
    // A plugin that dies mid-request must surface as an error, not SIGPIPE.
    std::signal(SIGPIPE, SIG_IGN);

    int in_pipe[2];
    int out_pipe[2];
    if (::pipe2(in_pipe, O_CLOEXEC) != 0) {
        throw PluginError("spawn failure: pipe: " + std::string(std::strerror(errno)));
    }
    if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
        ::close(in_pipe[0]);
        ::close(in_pipe[1]);
        throw PluginError("spawn failure: pipe: " + std::string(std::strerror(errno)));
    }
    const pid_t pid = ::fork();
    if (pid < 0) {
        for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) {
            ::close(fd);
        }
        throw PluginError("spawn failure: fork: " + std::string(std::strerror(errno)));
    }
    if (pid == 0) {
        // own process group, so shutdown also reaches whatever sh spawns
        ::setpgid(0, 0);
        ::dup2(in_pipe[0], STDIN_FILENO);
        ::dup2(out_pipe[1], STDOUT_FILENO);
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::setpgid(pid, pid);
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);

    std::shared_ptr<PluginProcess> process(new PluginProcess(command, options));
    process->pid_ = pid;
    process->to_child_ = in_pipe[1];
    process->from_child_ = out_pipe[0];

    const nlohmann::json hello = {{"op", "hello"}, {"version", 1}};
    nlohmann::json reply;
    {
        std::lock_guard lock(process->mutex_);
        reply = process->exchange(hello, options.handshake_timeout);
    }
    const std::string raw = reply.dump();
    if (!reply.contains("name") || !reply["name"].is_string() || !reply.contains("role") ||
        !reply["role"].is_string() || !reply.contains("caps") || !reply["caps"].is_array()) {
        throw PluginError("protocol violation: malformed handshake", raw);
    }
    PluginInfo info;
    info.name = reply["name"].get<std::string>();
    const auto role_text = reply["role"].get<std::string>();
    if (role_text != role_name(role)) {
        throw PluginError(std::string("protocol violation: plugin role is \"") + role_text + "\", expected \"" +
                              role_name(role) + "\"",
                          raw);
    }
    info.role = role;
    for (const auto& cap : reply["caps"]) {
        if (!cap.is_string()) {
            throw PluginError("protocol violation: caps must be strings", raw);
        }
        info.caps.push_back(cap.get<std::string>());
    }
    process->info_ = std::move(info);
    spdlog::info("attached plugin \"{}\" ({}) caps={}", process->info_.name, role_text, reply["caps"].dump());
    return process;
}

PluginProcess::~PluginProcess()
{
    shutdown();
}

void PluginProcess::shutdown() noexcept
{
    if (to_child_ >= 0) {
        ::close(to_child_);
        to_child_ = -1;
    }
    if (from_child_ >= 0) {
        ::close(from_child_);
        from_child_ = -1;
    }
    if (pid_ > 0) {
        int status = 0;
        for (int i = 0; i < 50; ++i) {
            if (::waitpid(pid_, &status, WNOHANG) != 0) {
                pid_ = -1;
                return;
            }
            ::usleep(10000);
        }
        ::kill(-pid_, SIGKILL);
        ::waitpid(pid_, &status, 0);
        pid_ = -1;
    }
}

std::string PluginProcess::read_line(std::chrono::milliseconds timeout)
{
    using clock = std::chrono::steady_clock;
    const auto deadline = clock::now() + timeout;
    for (;;) {
        const auto newline = buffer_.find('\n');
        if (newline != std::string::npos) {
            std::string line = buffer_.substr(0, newline);
            buffer_.erase(0, newline + 1);
            return line;
        }
        int wait_ms = -1;
        if (timeout.count() > 0) {
            const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now());
            if (left.count() <= 0) {
                throw PluginError("timeout after " + std::to_string(timeout.count()) + " ms waiting for plugin \"" +
                                      command_ + "\"",
                                  buffer_);
            }
            wait_ms = static_cast<int>(left.count());
        }
        pollfd pfd{from_child_, POLLIN, 0};
        const int ready = ::poll(&pfd, 1, wait_ms);
        if (ready < 0) {
            if (errno == EINTR) {
                continue;
            }
            throw PluginError("poll failed: " + std::string(std::strerror(errno)));
        }
        if (ready == 0) {
            continue;
        }
        char chunk[4096];
        const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            throw PluginError("read failed: " + std::string(std::strerror(errno)));
        }
        if (n == 0) {
            int status = 0;
            std::string detail;
            if (pid_ > 0 && ::waitpid(pid_, &status, WNOHANG) == pid_) {
                pid_ = -1;
                if (WIFEXITED(status)) {
                    detail = " (exit status " + std::to_string(WEXITSTATUS(status)) + ")";
                }
            }
            throw PluginError("plugin \"" + command_ + "\" closed its output" + detail, buffer_);
        }
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

nlohmann::json PluginProcess::exchange(const nlohmann::json& message, std::chrono::milliseconds timeout)
{
    if (to_child_ < 0) {
        throw PluginError("plugin \"" + command_ + "\" is not running");
    }
    const std::string line = message.dump() + "\n";
    std::size_t written = 0;
    while (written < line.size()) {
        const ssize_t n = ::write(to_child_, line.data() + written, line.size() - written);
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            throw PluginError("spawn failure or plugin exited: write: " + std::string(std::strerror(errno)), line);
        }
        written += static_cast<std::size_t>(n);
    }
    const std::string raw = read_line(timeout);
    nlohmann::json response;
    try {
        response = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::parse_error& e) {
        throw PluginError("protocol violation: invalid JSON at byte offset " + std::to_string(e.byte), raw);
    }
    if (!response.is_object()) {
        throw PluginError("protocol violation: response is not a JSON object", raw);
    }
    if (auto it = response.find("error"); it != response.end()) {
        throw PluginError("plugin error: " + (it->is_string() ? it->get<std::string>() : it->dump()), raw);
    }
    return response;
}

nlohmann::json PluginProcess::request(const nlohmann::json& message)
{
    std::lock_guard lock(mutex_);
    return exchange(message, options_.request_timeout);
}

std::shared_ptr<PluginProcess> attach(const std::string& command, PluginRole role, const PluginOptions& options)
{
    return PluginProcess::spawn(command, role, options);
}

std::unique_ptr<GeneratorModel> attach_generator(const std::string& command, const PluginOptions& options)
{
    return std::make_unique<PluginGenerator>(attach(command, PluginRole::generator, options));
}

std::unique_ptr<RetrieverModel> attach_retriever(const std::string& command, const PluginOptions& options)
{
    return std::make_unique<PluginRetriever>(attach(command, PluginRole::retriever, options));
}

// ---------------------------------------------------------------------------

PluginGenerator::PluginGenerator(std::shared_ptr<PluginProcess> process) : process_(std::move(process)) {}

void PluginGenerator::send_train(std::span<const QgPair> pairs, const char* mode)
{
    if (pairs.empty()) {
        throw ModelError("plugin generator: empty training set");
    }
    if (!info().has("train")) {
        spdlog::warn("plugin \"{}\" has no train capability; {} skipped", info().name, mode);
        return;
    }
    TempFiles files;
    files.paths.push_back(temp_file("pairs"));
    {
        std::ofstream out(files.paths[0], std::ios::binary);
        for (const auto& p : pairs) {
            out << nlohmann::json{{"question", p.question}, {"passage", p.passage}}.dump() << '\n';
        }
    }
    process_->request({{"op", "train"}, {"mode", mode}, {"pairs_path", files.paths[0].string()}, {"negatives_path", ""}});
}

void PluginGenerator::train(std::span<const QgPair> pairs)
{
    send_train(pairs, "train");
}

void PluginGenerator::fine_tune(std::span<const QgPair> pairs)
{
    send_train(pairs, "fine_tune");
}

Generation PluginGenerator::generate(std::string_view passage, const DecodeConfig& decode) const
{
    decode.validate();
    const auto response =
        process_->request({{"op", "generate"}, {"passage", passage}, {"top_k", decode.top_k}, {"seed", decode.seed}});
    const std::string raw = response.dump();
    auto it = response.find("question");
    if (it == response.end() || !it->is_string()) {
        throw PluginError("protocol violation: response lacks string \"question\"", raw);
    }
    return Generation{it->get<std::string>(), require_number(response, "loglik", raw)};
}

double PluginGenerator::score(std::string_view passage, std::string_view question) const
{
    if (!can_score()) {
        throw ModelError("plugin \"" + info().name + "\" cannot score (no score_qg capability)");
    }
    const auto response = process_->request({{"op", "score_qg"}, {"passage", passage}, {"question", question}});
    return require_number(response, "loglik", response.dump());
}

std::unique_ptr<GeneratorModel> PluginGenerator::clone() const
{
    return std::make_unique<PluginGenerator>(process_);
}

void PluginGenerator::save(const std::filesystem::path& path) const
{
    write_checkpoint(path, {{"model", "plugin"}, {"version", 1}, {"role", "generator"}, {"command", process_->command()}});
}

// ---------------------------------------------------------------------------

PluginRetriever::PluginRetriever(std::shared_ptr<PluginProcess> process) : process_(std::move(process)) {}

std::vector<double> PluginRetriever::encode(std::string_view text, const char* kind) const
{
    const auto response = process_->request({{"op", "encode"}, {"kind", kind}, {"text", text}});
    auto it = response.find("vec");
    if (it == response.end() || !it->is_array()) {
        throw PluginError("protocol violation: response lacks array \"vec\"", response.dump());
    }
    std::vector<double> vec;
    vec.reserve(it->size());
    for (const auto& x : *it) {
        if (!x.is_number()) {
            throw PluginError("protocol violation: \"vec\" must contain numbers", response.dump());
        }
        vec.push_back(x.get<double>());
    }
    return vec;
}

void PluginRetriever::send_train(std::span<const RetrievalExample> examples, const char* mode)
{
    if (examples.empty()) {
        throw ModelError("plugin retriever: empty training set");
    }
    if (!info().has("train")) {
        spdlog::warn("plugin \"{}\" has no train capability; {} skipped", info().name, mode);
        return;
    }
    TempFiles files;
    files.paths = {temp_file("pairs"), temp_file("negatives")};
    {
        std::ofstream pairs(files.paths[0], std::ios::binary);
        std::ofstream negatives(files.paths[1], std::ios::binary);
        for (const auto& ex : examples) {
            pairs << nlohmann::json{{"question", ex.question}, {"passage", ex.positive}}.dump() << '\n';
            negatives << nlohmann::json{{"negatives", ex.negatives}}.dump() << '\n';
        }
    }
    process_->request({{"op", "train"},
                       {"mode", mode},
                       {"pairs_path", files.paths[0].string()},
                       {"negatives_path", files.paths[1].string()}});
    if (indexed_) {
        for (std::size_t i = 0; i < texts_.size(); ++i) {
            encoded_[i] = encode(texts_[i], "p");
        }
    }
}

void PluginRetriever::train(std::span<const RetrievalExample> examples)
{
    send_train(examples, "train");
}

void PluginRetriever::fine_tune(std::span<const RetrievalExample> examples)
{
    send_train(examples, "fine_tune");
}

void PluginRetriever::index(std::span<const corpus::Passage> pool)
{
    ids_.clear();
    texts_.clear();
    encoded_.clear();
    for (const auto& p : pool) {
        auto vec = encode(p.text, "p");
        if (!encoded_.empty() && vec.size() != encoded_.front().size()) {
            throw PluginError("protocol violation: inconsistent encoding dimension");
        }
        ids_.push_back(p.id);
        texts_.push_back(p.text);
        encoded_.push_back(std::move(vec));
    }
    indexed_ = true;
}

std::vector<ScoredPassage> PluginRetriever::retrieve(std::string_view question, std::size_t k) const
{
    if (!indexed_) {
        throw ModelError("plugin retriever: index not built");
    }
    const auto q = encode(question, "q");
    std::vector<ScoredPassage> scored;
    scored.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        if (encoded_[i].size() != q.size()) {
            throw PluginError("protocol violation: question and passage encodings differ in dimension");
        }
        double s = 0.0;
        for (std::size_t d = 0; d < q.size(); ++d) {
            s += q[d] * encoded_[i][d];
        }
        scored.push_back({ids_[i], s});
    }
    return rank_top_k(std::move(scored), k);
}

double PluginRetriever::score(std::string_view question, std::string_view passage) const
{
    const auto q = encode(question, "q");
    const auto p = encode(passage, "p");
    if (q.size() != p.size()) {
        throw PluginError("protocol violation: question and passage encodings differ in dimension");
    }
    double s = 0.0;
    for (std::size_t d = 0; d < q.size(); ++d) {
        s += q[d] * p[d];
    }
    return s;
}

std::unique_ptr<RetrieverModel> PluginRetriever::clone() const
{
    return std::make_unique<PluginRetriever>(*this);
}

void PluginRetriever::save(const std::filesystem::path& path) const
{
    write_checkpoint(path, {{"model", "plugin"}, {"version", 1}, {"role", "retriever"}, {"command", process_->command()}});
}

}  // namespace dualtrain::models
