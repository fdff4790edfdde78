// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#include "desk_corpus.hpp"

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "dualtrain/rng.hpp"

namespace dualtrain::fixture {

namespace {

template <typename T, std::size_t N>
const T& pick(Rng& rng, const std::array<T, N>& items)
{
    return items[rng.below(N)];
}

// ---- target domain: machine learning -------------------------------------

constexpr std::array<std::string_view, 72> ml_concepts = {
    "overfitting", "underfitting", "regularization", "dropout", "batch normalization", "gradient descent",
    "stochastic gradient descent", "backpropagation", "cross validation", "precision", "recall", "f1 score",
    "logistic regression", "linear regression", "decision trees", "random forests", "gradient boosting",
    "support vector machines", "the kernel trick", "k means clustering", "principal component analysis",
    "linear discriminant analysis", "word2vec", "word embeddings", "attention", "transformers",
    "recurrent neural networks", "lstm networks", "convolutional neural networks", "max pooling",
    "relu activation", "the sigmoid function", "softmax", "cross entropy loss", "the learning rate", "momentum",
    "the adam optimizer", "early stopping", "data augmentation", "transfer learning", "fine tuning",
    "the bias variance tradeoff", "naive bayes", "bayesian inference", "markov chains", "hidden markov models",
    "reinforcement learning", "q learning", "policy gradients", "autoencoders", "variational autoencoders",
    "generative adversarial networks", "beam search", "tokenization", "bag of words", "tf idf",
    "cosine similarity", "l1 regularization", "l2 regularization", "weight decay", "hyperparameter tuning",
    "grid search", "the confusion matrix", "the roc curve", "feature scaling", "one hot encoding",
    "vanishing gradients", "exploding gradients", "mini batches", "the loss function", "ensemble learning",
    "label smoothing"};

constexpr std::array<std::string_view, 8> ml_kinds = {"technique", "method",  "model",  "algorithm",
                                                      "concept",   "metric", "heuristic", "procedure"};
constexpr std::array<std::string_view, 8> ml_areas = {
    "supervised learning", "deep learning",      "natural language processing", "computer vision",
    "statistics",          "numerical optimization", "unsupervised learning",   "speech recognition"};
constexpr std::array<std::string_view, 12> ml_goals = {
    "reduce overfitting",      "improve generalization",     "speed up training",
    "estimate model accuracy", "learn useful features",      "stabilize optimization",
    "handle noisy labels",     "compress high dimensional data", "rank similar documents",
    "balance the classes",     "avoid local minima",         "scale to large datasets"};
constexpr std::array<std::string_view, 12> ml_mechanisms = {
    "penalizing large weights",           "averaging many weak learners",
    "randomly dropping hidden units",     "following the negative gradient",
    "projecting data onto top eigenvectors", "maximizing the margin between classes",
    "normalizing layer activations",      "sharing weights across positions",
    "computing weighted sums of values",  "splitting data into folds",
    "sampling actions from a policy",     "reconstructing the input from a code"};
constexpr std::array<std::string_view, 10> ml_problems = {
    "a high variance on small datasets", "slow convergence",        "sensitivity to initialization",
    "a large memory footprint",          "poor calibration",         "a bias toward frequent classes",
    "unstable gradients",                "expensive hyperparameter search", "difficult interpretation",
    "leakage between splits"};
constexpr std::array<std::string_view, 8> ml_requirements = {
    "careful tuning of the learning rate", "a held out validation set", "normalized input features",
    "a large labeled dataset",             "a good random seed",        "a suitable loss function",
    "enough training epochs",              "a fast gpu"};

struct MlSpec {
    std::size_t topic = 0;
    std::size_t other = 0;
    std::string_view kind;
    std::string_view area;
    std::string_view goal;
    std::string_view mechanism;
    std::string_view problem;
    std::string_view requirement;
};

MlSpec make_ml_spec(Rng& rng)
{
    MlSpec s;
    s.topic = rng.below(ml_concepts.size());
    s.other = (s.topic + 1 + rng.below(ml_concepts.size() - 1)) % ml_concepts.size();
    s.kind = pick(rng, ml_kinds);
    s.area = pick(rng, ml_areas);
    s.goal = pick(rng, ml_goals);
    s.mechanism = pick(rng, ml_mechanisms);
    s.problem = pick(rng, ml_problems);
    s.requirement = pick(rng, ml_requirements);
    return s;
}

std::string ml_passage(const MlSpec& s, Rng& rng)
{
    const auto c = ml_concepts[s.topic];
    const auto o = ml_concepts[s.other];
    std::vector<std::string> sentences = {
        fmt::format("{} is a {} used in {}.", c, s.kind, s.area),
        fmt::format("{} helps to {} by {}.", c, s.goal, s.mechanism),
        fmt::format("a common problem with {} is {}.", c, s.problem),
        fmt::format("in practice {} requires {}.", c, s.requirement),
        fmt::format("{} is often compared with {} because both are popular in {}.", c, o, s.area),
        fmt::format("unlike {}, {} works by {}.", o, c, s.mechanism),
    };
    // Keep the definition first and drop one or two of the others.
    const std::size_t drop = 1 + rng.below(2);
    for (std::size_t i = 0; i < drop; ++i) {
        sentences.erase(sentences.begin() + static_cast<std::ptrdiff_t>(1 + rng.below(sentences.size() - 1)));
    }
    std::string text = sentences.front();
    for (std::size_t i = 1; i < sentences.size(); ++i) {
        text += ' ';
        text += sentences[i];
    }
    text[0] = static_cast<char>(text[0] - ('a' <= text[0] && text[0] <= 'z' ? 'a' - 'A' : 0));
    return text;
}

std::string ml_question_core(const MlSpec& s, Rng& rng)
{
    const auto c = ml_concepts[s.topic];
    const auto o = ml_concepts[s.other];
    const double u = rng.uniform();
    if (u < 0.40) {
        switch (rng.below(4)) {
        case 0: return fmt::format("What is {}?", c);
        case 1: return fmt::format("What is {} used for in {}?", c, s.area);
        case 2: return fmt::format("What problem does {} have with {}?", c, s.problem);
        default: return fmt::format("Which {} helps to {} by {}?", s.kind, s.goal, s.mechanism);
        }
    }
    if (u < 0.60) {
        switch (rng.below(3)) {
        case 0: return fmt::format("How does {} {}?", c, s.goal);
        case 1: return fmt::format("How do you implement {} by {}?", c, s.mechanism);
        default: return fmt::format("How to use {} with {}?", c, s.requirement);
        }
    }
    if (u < 0.75) {
        switch (rng.below(2)) {
        case 0: return fmt::format("Why does {} {}?", c, s.goal);
        default: return fmt::format("Why is {} prone to {}?", c, s.problem);
        }
    }
    if (u < 0.85) {
        switch (rng.below(2)) {
        case 0: return fmt::format("What is the difference between {} and {}?", c, o);
        default: return fmt::format("{} vs {} in {}?", c, o, s.area);
        }
    }
    switch (rng.below(3)) {
    case 0: return fmt::format("Is {} better than {} for {}?", c, o, s.area);
    case 1: return fmt::format("Should I use {} to {}?", c, s.goal);
    default: return fmt::format("Can {} {} without {}?", c, s.goal, s.requirement);
    }
}

std::string ml_question(const MlSpec& s, Rng& rng)
{
    std::string q = ml_question_core(s, rng);
    if (rng.uniform() < 0.3) {
        // Some askers add their setting.
        q.pop_back();
        q += fmt::format(" when working on {} with {} and {}?", s.area, s.requirement, s.problem);
    }
    return q;
}

// ---- source domain: open-domain trivia ------------------------------------

constexpr std::array<std::string_view, 40> places = {
    "paris",    "london",   "tokyo",     "cairo",    "lima",     "oslo",      "nairobi",  "sydney",
    "toronto",  "mumbai",   "berlin",    "madrid",   "rome",     "athens",    "dublin",   "lisbon",
    "vienna",   "prague",   "warsaw",    "seoul",    "beijing",  "bangkok",   "jakarta",  "manila",
    "santiago", "bogota",   "havana",    "mexico city", "chicago", "boston",  "denver",   "seattle",
    "quebec",   "reykjavik", "helsinki", "stockholm", "budapest", "istanbul", "tehran",   "karachi"};
constexpr std::array<std::string_view, 30> people = {
    "napoleon",     "cleopatra",  "shakespeare",  "mozart",      "einstein",     "newton",
    "darwin",       "gandhi",     "lincoln",      "churchill",   "galileo",      "beethoven",
    "picasso",      "tolstoy",    "confucius",    "socrates",    "aristotle",    "columbus",
    "magellan",     "curie",      "tesla",        "edison",      "da vinci",     "michelangelo",
    "bach",         "dickens",    "hemingway",    "mandela",     "washington",   "victoria"};
constexpr std::array<std::string_view, 12> things = {
    "cathedral", "bridge",  "museum",  "palace",   "tower",     "river",
    "mountain",  "stadium", "harbour", "festival", "university", "railway"};
constexpr std::array<std::string_view, 10> roles = {
    "emperor", "writer", "composer", "physicist", "painter", "explorer", "president", "philosopher",
    "queen",   "inventor"};
constexpr std::array<std::string_view, 12> events = {
    "the great fire", "the world fair",  "the first olympic games", "the revolution",
    "the gold rush",  "the great flood", "the peace treaty",        "the royal wedding",
    "the earthquake", "the civil war",   "the plague",              "the moon landing broadcast"};
constexpr std::array<std::string_view, 12> years = {"1666", "1789", "1815", "1848", "1871", "1889",
                                                   "1896", "1906", "1914", "1945", "1969", "1989"};
constexpr std::array<std::string_view, 8> adjectives = {"oldest", "largest", "tallest", "most visited",
                                                       "longest", "busiest", "smallest", "most famous"};

struct SourceSpec {
    std::string_view place;
    std::string_view person;
    std::string_view thing;
    std::string_view role;
    std::string_view event;
    std::string_view year;
    std::string_view adjective;
};

SourceSpec make_source_spec(Rng& rng)
{
    return {pick(rng, places), pick(rng, people), pick(rng, things), pick(rng, roles),
            pick(rng, events), pick(rng, years),  pick(rng, adjectives)};
}

std::string source_passage(const SourceSpec& s)
{
    return fmt::format(
        "The {} of {} is the {} {} in the region. It was built in {} and is named after {}, the famous {}. "
        "During {} the {} was used as a shelter. Today it is visited by many people from {}.",
        s.thing, s.place, s.adjective, s.thing, s.year, s.person, s.role, s.event, s.thing, s.place);
}

std::string source_question(const SourceSpec& s, Rng& rng)
{
    const double u = rng.uniform();
    if (u < 0.86) {
        switch (rng.below(6)) {
        case 0: return fmt::format("What is the {} {} in {}?", s.adjective, s.thing, s.place);
        case 1: return fmt::format("Who was the {} of {} named after?", s.thing, s.place);
        case 2: return fmt::format("When was the {} of {} built?", s.thing, s.place);
        case 3: return fmt::format("Where is the {} named after {}?", s.thing, s.person);
        case 4: return fmt::format("What was the {} of {} used for during {}?", s.thing, s.place, s.event);
        default: return fmt::format("Who was {}?", s.person);
        }
    }
    if (u < 0.90) {
        return fmt::format("How was the {} of {} built?", s.thing, s.place);
    }
    if (u < 0.93) {
        return fmt::format("Why is the {} of {} named after {}?", s.thing, s.place, s.person);
    }
    if (u < 0.95) {
        return fmt::format("What is the difference between the {} and the {} of {}?", s.thing, s.adjective, s.place);
    }
    return fmt::format("Is the {} of {} the {} {}?", s.thing, s.place, s.adjective, s.thing);
}

// Science and technology entries of the source domain. Their field names
// also occur in target passages.
constexpr std::array<std::string_view, 12> fields = {
    "supervised learning", "deep learning",          "natural language processing", "computer vision",
    "statistics",          "numerical optimization", "unsupervised learning",       "speech recognition",
    "machine learning",    "data mining",            "signal processing",           "information theory"};
constexpr std::array<std::string_view, 6> parents = {"mathematics", "computer science", "engineering",
                                                    "physics",     "linguistics",      "psychology"};

std::string science_passage(std::string_view field, std::string_view parent, const SourceSpec& s)
{
    return fmt::format(
        "{} is a field of study within {}. The term {} was coined by {} in {}. Early work on {} took place at "
        "the university of {}. Today {} is taught in many schools.",
        field, parent, field, s.person, s.year, field, s.place, field);
}

std::string science_question(std::string_view field, std::string_view parent, const SourceSpec& s, Rng& rng)
{
    switch (rng.below(6)) {
    case 0: return fmt::format("Who coined the term {}?", field);
    case 1: return fmt::format("What is {}?", field);
    case 2: return fmt::format("When was the term {} coined?", field);
    case 3: return fmt::format("Where did early work on {} take place?", field);
    case 4: return fmt::format("What field of {} studies {}?", parent, field);
    default: return fmt::format("Who was {} in {}?", s.person, field);
    }
}

}  // namespace

corpus::CorpusBundle make_desk_corpus(const DeskCorpusOptions& options)
{
    corpus::CorpusBundle bundle;

    Rng source_rng(derive_seed(options.seed, 1));
    for (std::size_t i = 0; i < options.source_pairs; ++i) {
        const auto spec = make_source_spec(source_rng);
        corpus::AlignedPair pair;
        std::string passage;
        std::string question;
        if (source_rng.uniform() < 0.3) {
            const auto field = pick(source_rng, fields);
            const auto parent = pick(source_rng, parents);
            passage = science_passage(field, parent, spec);
            question = science_question(field, parent, spec, source_rng);
        } else {
            passage = source_passage(spec);
            question = source_question(spec, source_rng);
        }
        passage[0] = static_cast<char>(passage[0] - ('a' <= passage[0] && passage[0] <= 'z' ? 'a' - 'A' : 0));
        pair.passage = corpus::make_passage(fmt::format("src-p{:05}", i), std::move(passage));
        pair.question = corpus::make_question(fmt::format("src-q{:05}", i), std::move(question));
        pair.split = corpus::Split::source_train;
        bundle.source_pairs.push_back(std::move(pair));
    }

    Rng target_rng(derive_seed(options.seed, 2));
    std::vector<MlSpec> specs;
    for (std::size_t i = 0; i < options.target_passages; ++i) {
        specs.push_back(make_ml_spec(target_rng));
        bundle.target_passages.push_back(
            corpus::make_passage(fmt::format("tgt-p{:05}", i), ml_passage(specs.back(), target_rng)));
    }
    // Unaligned questions, each written about a hidden P_U passage.
    for (std::size_t i = 0; i < options.target_questions; ++i) {
        const auto& spec = specs[target_rng.below(specs.size())];
        bundle.target_questions.push_back(
            corpus::make_question(fmt::format("tgt-q{:05}", i), ml_question(spec, target_rng)));
    }

    bundle.candidate_passages = bundle.target_passages;
    auto aligned = [&](std::string_view prefix, std::size_t n, corpus::Split split) {
        std::vector<corpus::AlignedPair> out;
        for (std::size_t i = 0; i < n; ++i) {
            const auto spec = make_ml_spec(target_rng);
            corpus::AlignedPair pair;
            pair.passage = corpus::make_passage(fmt::format("{}-p{:05}", prefix, i), ml_passage(spec, target_rng));
            pair.question = corpus::make_question(fmt::format("{}-q{:05}", prefix, i), ml_question(spec, target_rng));
            pair.split = split;
            bundle.candidate_passages.push_back(pair.passage);
            out.push_back(std::move(pair));
        }
        return out;
    };
    bundle.dev_pairs = aligned("dev", options.dev_pairs, corpus::Split::target_dev);
    bundle.test_pairs = aligned("test", options.test_pairs, corpus::Split::target_test);
    return bundle;
}

}  // namespace dualtrain::fixture
