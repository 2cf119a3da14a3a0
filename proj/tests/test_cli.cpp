#include <catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"

namespace fs = std::filesystem;
using namespace rpkisim;

namespace {

struct Invocation {
    int status = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

class Scratch {
public:
    Scratch() : dir_(fs::temp_directory_path() / ("rpkisim-cli-" + std::to_string(::getpid()) + "-" + std::to_string(counter_++)))
    {
        fs::create_directories(dir_);
    }
    ~Scratch() { fs::remove_all(dir_); }
    Scratch(const Scratch&) = delete;
    Scratch& operator=(const Scratch&) = delete;

    const fs::path& dir() const { return dir_; }

    Invocation run(const std::string& args, const std::string& env = "") const
    {
        const auto out = dir_ / "stdout";
        const auto err = dir_ / "stderr";
        const std::string cmd = env + " '" RPKISIM_CLI_PATH "' " + args + " >'" + out.string() + "' 2>'" + err.string() + "'";
        const int raw = std::system(cmd.c_str());
        Invocation r;
        r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
        r.out = slurp(out);
        r.err = slurp(err);
        return r;
    }

    fs::path write(const std::string& name, const std::string& text) const
    {
        const auto p = dir_ / name;
        std::ofstream(p) << text;
        return p;
    }

private:
    static inline int counter_ = 0;
    fs::path dir_;
};

std::string shell_arg(const fs::path& p) { return "'" + p.string() + "'"; }

} // namespace

TEST_CASE("analyze prints both tables")
{
    Scratch s;
    const auto r = s.run("analyze --tables");
    CHECK(r.status == 0);
    CHECK(r.out.find("2,864,") != std::string::npos);
    CHECK(r.out.find("reference-inconsistent") != std::string::npos);
}

TEST_CASE("analyze evaluates a parameter set")
{
    Scratch s;
    const auto r = s.run("analyze --params t_attack=1d t_sleep=600s n_retries=6 r_limit=60");
    CHECK(r.status == 0);
    CHECK(r.out.find("864,0.5,") != std::string::npos);
    CHECK(r.out.find(",74820,2244600,") != std::string::npos);
}

TEST_CASE("config errors exit 1 and name the key")
{
    Scratch s;
    auto r = s.run("analyze --params p=2 n=5");
    CHECK(r.status == 1);
    CHECK(r.err.find("params.p") != std::string::npos);

    r = s.run("analyze --params n=5 colour=blue");
    CHECK(r.status == 1);
    CHECK(r.err.find("params.colour") != std::string::npos);

    r = s.run("run " + shell_arg(s.dir() / "missing.yaml"));
    CHECK(r.status == 1);

    const auto bad = s.write("bad.yaml", "name: x\nduration: forever\n");
    r = s.run("run " + shell_arg(bad));
    CHECK(r.status == 1);
    CHECK(r.err.find("duration") != std::string::npos);

    r = s.run("probe " + shell_arg(testing::scenario_path("table4-scenario2")) + " --target ns-victim --kind smoke");
    CHECK(r.status == 1);
    CHECK(r.err.find("kind") != std::string::npos);

    r = s.run("probe " + shell_arg(testing::scenario_path("table4-scenario2")) + " --target ns-nowhere");
    CHECK(r.status == 1);
    CHECK(r.err.find("target") != std::string::npos);

    r = s.run("montecarlo " + shell_arg(testing::scenario_path("table4-scenario2")) + " --trials 0");
    CHECK(r.status == 1);
    CHECK(r.err.find("trials") != std::string::npos);

    r = s.run("frobnicate");
    CHECK(r.status == 1);
}

TEST_CASE("runtime failures exit 2")
{
    Scratch s;
    const auto r = s.run("run " + shell_arg(testing::scenario_path("healthy-baseline")) + " --log /dev/null/sub/log.jsonl");
    CHECK(r.status == 2);
}

TEST_CASE("log directory comes from the environment")
{
    Scratch s;
    const auto logs = s.dir() / "logs";
    const auto r = s.run("run " + shell_arg(testing::scenario_path("table4-scenario2")) + " --seed 3",
                         "RPKISIM_LOG_DIR=" + shell_arg(logs));
    REQUIRE(r.status == 0);
    CHECK(r.out.find("\"downgrade_achieved\": true") != std::string::npos);
    const auto log = logs / "table4-scenario2-seed3.jsonl";
    REQUIRE(fs::exists(log));
    CHECK(slurp(log).find("\"event_kind\":\"downgrade\"") != std::string::npos);
}

TEST_CASE("probe reports the configured nameserver limit")
{
    Scratch s;
    const auto r = s.run("probe " + shell_arg(testing::scenario_path("table4-scenario2")) + " --target ns-victim");
    REQUIRE(r.status == 0);
    CHECK(r.out.find("# drop_limit,") != std::string::npos);
    CHECK(r.out.find("# drop_limit,none") == std::string::npos);
}

TEST_CASE("montecarlo reports a success rate")
{
    Scratch s;
    const auto r = s.run("montecarlo " + shell_arg(testing::scenario_path("table4-scenarioS")) + " --trials 4 --parallel 2");
    REQUIRE(r.status == 0);
    CHECK(r.out.find("scenario,trials,successes") == 0);
    CHECK(r.out.find("table4-scenarioS,4,") != std::string::npos);
}
