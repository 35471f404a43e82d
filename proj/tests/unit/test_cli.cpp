#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fedcurr/cli/app.hpp"
#include "fedcurr/cli/config_file.hpp"
#include "fedcurr/error.hpp"

using namespace fedcurr;
using namespace fedcurr::cli;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    TempDir() {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        path_ = fs::temp_directory_path() / (std::string("fedcurr_") + info->test_suite_name() + "_" + info->name());
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

    fs::path write(const std::string& name, const std::string& text) const {
        const fs::path p = path_ / name;
        std::ofstream(p) << text;
        return p;
    }

private:
    fs::path path_;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

const char* kTinyRun = R"([experiment]
trials = 2
rounds = 1
num_clients = 4
participation = 2
local_epochs = 1
arms = vanilla, curriculum

[model]
kind = softmax

[data]
n = 80
dim = 3

[partition]
scheme = iid

[curriculum]
scoring = g_loss
)";

struct Captured {
    int code;
    std::string log;
    std::string err;
};

Captured run(const fs::path& cfg, const fs::path& out, std::optional<std::size_t> threads = 1) {
    std::ostringstream log, err;
    Options o;
    o.config = cfg;
    o.out_dir = out;
    o.threads = threads;
    const int code = run_command(o, log, err);
    return {code, log.str(), err.str()};
}

Captured verify(const fs::path& cfg, const fs::path& out) {
    std::ostringstream log, err;
    Options o;
    o.config = cfg;
    o.out_dir = out;
    o.threads = 2;
    const int code = verify_command(o, log, err);
    return {code, log.str(), err.str()};
}

}  // namespace

TEST(ConfigFile, ParsesSectionsKeysAndComments) {
    std::istringstream is("# top\n[a]\nx = 1 ; trailing\ny=two words\n\n[b]\nz = 0.5\n");
    const ConfigFile f = ConfigFile::parse(is, "t.ini");
    EXPECT_EQ(f.sections(), (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(f.get_count("a", "x"), 1u);
    EXPECT_EQ(f.get_string("a", "y"), "two words");
    EXPECT_DOUBLE_EQ(f.get_real("b", "z"), 0.5);
    EXPECT_EQ(f.line_of("b", "z"), 7);
}

TEST(ConfigFile, ErrorsCarryLineNumbers) {
    const char* bad[] = {"[a]\nx = 1\nnot a pair\n", "[a]\nx = 1\nx = 2\n", "[a]\n[a]\n", "[a\n", "[]\n"};
    const int lines[] = {3, 3, 2, 1, 1};
    for (int i = 0; i < 5; ++i) {
        std::istringstream is(bad[i]);
        try {
            ConfigFile::parse(is, "t.ini");
            ADD_FAILURE() << "accepted: " << bad[i];
        } catch (const ConfigError& e) {
            EXPECT_EQ(e.line(), lines[i]) << bad[i];
            EXPECT_NE(std::string(e.what()).find("t.ini:" + std::to_string(lines[i])), std::string::npos) << e.what();
        }
    }
}

TEST(ConfigFile, BadValuesAreConfigErrors) {
    std::istringstream is("[a]\nn = -3\nr = abc\nb = maybe\n");
    const ConfigFile f = ConfigFile::parse(is);
    EXPECT_THROW(f.get_count("a", "n"), ConfigError);
    EXPECT_THROW(f.get_real("a", "r"), ConfigError);
    EXPECT_THROW(f.get_bool("a", "b", false), ConfigError);
    EXPECT_THROW(f.get_string("a", "missing"), ConfigError);
    EXPECT_THROW(f.require_known("a", {"n", "r"}), ConfigError);
}

TEST(ConfigFile, KeysBeforeAnySectionAreRejectedByLoaders) {
    std::istringstream is("x = 1\n[verify]\n");
    const ConfigFile f = ConfigFile::parse(is, "t.ini");
    EXPECT_THROW(load_verify_config(f), ConfigError);
}

TEST(RunCommand, MissingKeyExitsTwoAndNamesKey) {
    TempDir tmp;
    std::string text = kTinyRun;
    text.replace(text.find("num_clients = 4\n"), 16, "");
    const auto r = run(tmp.write("c.ini", text), tmp.path() / "out");
    EXPECT_EQ(r.code, kExitConfig);
    EXPECT_NE(r.err.find("experiment.num_clients"), std::string::npos) << r.err;
}

TEST(RunCommand, UnknownKeyAndSectionAreRejected) {
    TempDir tmp;
    auto r = run(tmp.write("k.ini", std::string(kTinyRun) + "colour = blue\n"), tmp.path() / "out");
    EXPECT_EQ(r.code, kExitConfig);
    EXPECT_NE(r.err.find("colour"), std::string::npos) << r.err;
    r = run(tmp.write("s.ini", std::string(kTinyRun) + "[extras]\nx = 1\n"), tmp.path() / "out");
    EXPECT_EQ(r.code, kExitConfig);
    EXPECT_NE(r.err.find("extras"), std::string::npos) << r.err;
}

TEST(RunCommand, MissingConfigOrDataFileIsConfigError) {
    TempDir tmp;
    EXPECT_EQ(run(tmp.path() / "nope.ini", tmp.path() / "out").code, kExitConfig);
    std::string text = kTinyRun;
    text.replace(text.find("n = 80\ndim = 3\n"), 15, "file = absent.csv\n");
    const auto r = run(tmp.write("f.ini", text), tmp.path() / "out");
    EXPECT_EQ(r.code, kExitConfig);
    EXPECT_NE(r.err.find("absent.csv"), std::string::npos) << r.err;
}

TEST(RunCommand, SingleRoundWritesOneRowPerTrialAndArm) {
    TempDir tmp;
    const auto r = run(tmp.write("c.ini", kTinyRun), tmp.path() / "out");
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const std::string metrics = slurp(tmp.path() / "out" / "metrics.csv");
    EXPECT_EQ(metrics.substr(0, metrics.find('\n')), kMetricsHeader);
    EXPECT_EQ(count_lines(metrics), 1u + 2 * 2);
    const std::string summary = slurp(tmp.path() / "out" / "summary.csv");
    EXPECT_EQ(summary.substr(0, summary.find('\n')), "arm,trials,final_acc_mean,final_acc_std");
    EXPECT_EQ(count_lines(summary), 3u);
    EXPECT_NE(summary.find("\nvanilla,2,"), std::string::npos);
    EXPECT_NE(summary.find("\ncurriculum,2,"), std::string::npos);
}

TEST(RunCommand, RerunIsByteIdenticalAcrossThreads) {
    TempDir tmp;
    const fs::path cfg = tmp.write("c.ini", kTinyRun);
    ASSERT_EQ(run(cfg, tmp.path() / "a", 1).code, kExitOk);
    ASSERT_EQ(run(cfg, tmp.path() / "b", 3).code, kExitOk);
    EXPECT_EQ(slurp(tmp.path() / "a" / "metrics.csv"), slurp(tmp.path() / "b" / "metrics.csv"));
    EXPECT_EQ(slurp(tmp.path() / "a" / "summary.csv"), slurp(tmp.path() / "b" / "summary.csv"));
}

TEST(RunCommand, SeedOverrideChangesResults) {
    TempDir tmp;
    const fs::path cfg = tmp.write("c.ini", kTinyRun);
    ASSERT_EQ(run(cfg, tmp.path() / "a").code, kExitOk);
    std::ostringstream log, err;
    Options o{cfg, tmp.path() / "b", 1, 99};
    ASSERT_EQ(run_command(o, log, err), kExitOk);
    EXPECT_NE(slurp(tmp.path() / "a" / "metrics.csv"), slurp(tmp.path() / "b" / "metrics.csv"));
}

TEST(Threads, EnvironmentFallback) {
    ::setenv("FEDCURR_THREADS", "5", 1);
    EXPECT_EQ(resolve_threads(std::nullopt), 5u);
    EXPECT_EQ(resolve_threads(2), 2u);
    ::setenv("FEDCURR_THREADS", "zero", 1);
    EXPECT_THROW(resolve_threads(std::nullopt), ConfigError);
    ::unsetenv("FEDCURR_THREADS");
    EXPECT_EQ(resolve_threads(std::nullopt), 1u);
}

TEST(VerifyCommand, EmptyGridWritesHeaderOnly) {
    TempDir tmp;
    const auto r = verify(tmp.write("v.ini", "[verify]\nruns = 100\n"), tmp.path() / "out");
    EXPECT_EQ(r.code, kExitOk) << r.err;
    EXPECT_EQ(slurp(tmp.path() / "out" / "verify_report.csv"), std::string(theory::kReportHeader) + "\n");
}

TEST(VerifyCommand, LargeStepsizeIsPreconditionExit) {
    TempDir tmp;
    const auto r = verify(tmp.write("v.ini",
                                    "[verify]\nruns = 100\n[case.big]\nproblem = convex\nT = 3\nJ = 2\nQ = 2\n"
                                    "alpha = 0.5\nsigma = 0.1\nM = 1\n"),
                          tmp.path() / "out");
    EXPECT_EQ(r.code, kExitPrecondition);
    EXPECT_NE(r.err.find("big"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("t="), std::string::npos) << r.err;
}

TEST(VerifyCommand, TooFewRunsIsRejected) {
    TempDir tmp;
    const auto r = verify(tmp.write("v.ini", "[verify]\nruns = 10\n"), tmp.path() / "out");
    EXPECT_EQ(r.code, kExitConfig);
}

TEST(VerifyCommand, ShippedGridPasses) {
    TempDir tmp;
    const auto r = verify(fs::path(FEDCURR_CONFIG_DIR) / "theory_grid.ini", tmp.path() / "out");
    EXPECT_EQ(r.code, kExitOk) << r.err << r.log;
    EXPECT_EQ(count_lines(slurp(tmp.path() / "out" / "verify_report.csv")), 5u);
}

TEST(ShippedConfigs, AllLoad) {
    for (const char* name : {"smoke", "desk_curriculum", "desk_consistency", "desk_client_curriculum"}) {
        const fs::path p = fs::path(FEDCURR_CONFIG_DIR) / (std::string(name) + ".ini");
        EXPECT_NO_THROW(load_run_config(ConfigFile::load(p), p.parent_path())) << name;
    }
}
