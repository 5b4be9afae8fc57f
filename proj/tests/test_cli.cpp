#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "zld/cli.hpp"

using namespace zld;
namespace fs = std::filesystem;

namespace {

int call(const std::vector<std::string>& args, std::string& out, std::string& err)
{
    std::ostringstream o, e;
    const int rc = run(args, o, e);
    out = o.str();
    err = e.str();
    return rc;
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("validate_config")
{
    auto r = validate_config(std::string("{}"));
    CHECK(r.ok());
    CHECK(r.resolved == default_config());

    r = validate_config(std::string(R"({"ladder.alpha": 2.5})"));
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0].find("(0,2)") != std::string::npos);

    // every error is reported, not only the first
    r = validate_config(std::string(R"({"ladder.alpha": 2.5, "run.samples": -3, "nope": 1, "run.T": "big"})"));
    CHECK(r.errors.size() == 4);

    r = validate_config(std::string(R"({"run.profile": "paper", "run.T": 1e6})"));
    CHECK(r.ok());
    REQUIRE(r.warnings.size() == 1);
    CHECK(r.warnings[0].find("desk") != std::string::npos);

    CHECK_FALSE(validate_config(std::string("{not json")).ok());
    CHECK_FALSE(validate_config(std::string("[1,2]")).ok());
}

TEST_CASE("ladder constraints at the paper profile")
{
    std::string out, err;
    CHECK(call({"ladder", "constraints", "--alpha", "1.0", "--profile", "paper"}, out, err) == 0);
    CHECK(lines(out) == 7);
    CHECK(out.find(",0\n") == std::string::npos);
}

TEST_CASE("tail row count")
{
    std::string out, err;
    CHECK(call({"experiment", "tail", "--T", "1e6", "--alpha", "0.5,1.0,1.5", "--samples", "2000", "--seed", "42"}, out, err) == 0);
    CHECK(lines(out) == 4);
    CHECK(out.rfind("experiment,T,alpha,V,estimate,reference,ratio,stderr,n,seed", 0) == 0);
}

TEST_CASE("exit codes")
{
    std::string out, err;
    CHECK(call({"experiment", "tail", "--config", "/nonexistent/cfg.json"}, out, err) == 2);
    CHECK(err.find("/nonexistent/cfg.json") != std::string::npos);
    CHECK(call({"experiment", "tail", "--bogus"}, out, err) == 2);
    CHECK(err.find("Usage") != std::string::npos);
    CHECK(call({"frobnicate"}, out, err) == 2);
    CHECK(call({"experiment", "tail", "--alpha", "2.5"}, out, err) == 2);
    CHECK(call({"ladder", "build", "--profile", "paper"}, out, err) == 2);
    CHECK(call({"majorant", "build", "--profile", "paper", "--a", "3"}, out, err) == 2);
    CHECK(call({"--help"}, out, err) == 0);
}

TEST_CASE("zeta row")
{
    std::string out, err;
    CHECK(call({"zeta", "--t", "1000"}, out, err) == 0);
    CHECK(out.rfind("t,re,im,abs_log,err_bound\n1000,0.35633436", 0) == 0);
}

TEST_CASE("manifest and rerun")
{
    const fs::path root = fs::temp_directory_path() / "zld_test_cli";
    fs::remove_all(root);
    std::ofstream(root.string() + ".json") << R"({"run.samples": 3000, "moments.beta": [1, 2]})";
    std::string out, err;
    REQUIRE(call({"experiment", "moments", "--config", root.string() + ".json", "--out", (root / "a").string()}, out, err) == 0);
    CHECK(fs::exists(root / "a" / "moments.csv"));
    std::ifstream in(root / "a" / "manifest.json");
    const auto m = nlohmann::json::parse(in);
    CHECK(m["artifact_version"] == kArtifactVersion);
    CHECK(m["config"]["run.samples"] == 3000);
    CHECK(m["ledger"]["profile"] == "desk");
    CHECK(m["outputs"].contains("moments.csv"));
    CHECK(call({"experiment", "rerun", "--manifest", (root / "a" / "manifest.json").string(), "--out",
                (root / "b").string(), "--threads", "4"},
               out, err) == 0);
    CHECK(out.find("moments.csv identical") != std::string::npos);
    fs::remove_all(root);
    fs::remove(root.string() + ".json");
}
