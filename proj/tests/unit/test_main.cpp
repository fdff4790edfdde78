// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <spdlog/spdlog.h>

namespace {
// Library warnings are expected in error-path tests.
const bool quiet = [] {
    spdlog::set_level(spdlog::level::err);
    return true;
}();
}  // namespace
