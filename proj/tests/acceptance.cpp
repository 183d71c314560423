// Acceptance suite: one test case per reproduction criterion, one printed
// PASS/FAIL line per check.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>

#include "persim/harness.hpp"

namespace {

void run_suite(const char* id) {
    const persim::SuiteResult suite = persim::reproduce(id);
    for (const auto& row : suite.rows) {
        std::printf("[%s] %-62s measured=%-12.6g (%s) %s\n", row.id.c_str(),
                    row.description.c_str(), row.measured, row.detail.c_str(),
                    row.pass ? "PASS" : "FAIL");
        std::fflush(stdout);
        CHECK_MESSAGE(row.pass, row.id, ": ", row.description, " measured=", row.measured,
                      " (", row.detail, ")");
    }
}

} // namespace

TEST_CASE("A1") { run_suite("A1"); }
TEST_CASE("A2") { run_suite("A2"); }
TEST_CASE("A3") { run_suite("A3"); }
TEST_CASE("A4") { run_suite("A4"); }
TEST_CASE("A5") { run_suite("A5"); }
TEST_CASE("A6") { run_suite("A6"); }
TEST_CASE("A7") { run_suite("A7"); }
TEST_CASE("A8") { run_suite("A8"); }
TEST_CASE("A9") { run_suite("A9"); }
TEST_CASE("A10") { run_suite("A10"); }
TEST_CASE("props") { run_suite("props"); }
