#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "strata/state_document.hpp"
#include "strata/table.hpp"

namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("strata_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
    write("t.csv", "country,continent,gdp\nA,Asia,100\nB,Europe,\nC,Asia,300\n");
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& bytes) const {
    std::ofstream(path(name), std::ios::binary) << bytes;
  }

  std::string read(const std::string& name) const {
    std::ifstream in(path(name), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  int run(const std::string& args) const {
    const std::string cmd = std::string(STRATA_CLI_PATH) + " " + args + " 2>" + path("stderr.txt");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  fs::path dir_;
};

std::size_t count_of(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_F(CliTest, RenderThreeRows) {
  ASSERT_EQ(run("render --data " + path("t.csv") + " --out " + path("a.svg")), 0) << read("stderr.txt");
  const auto svg = read("a.svg");
  EXPECT_EQ(count_of(svg, "<g class=\"row\""), 3U);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST_F(CliTest, RenderIsDeterministic) {
  ASSERT_EQ(run("render --data " + path("t.csv") + " --out " + path("a.svg")), 0);
  ASSERT_EQ(run("render --data " + path("t.csv") + " --out " + path("b.svg")), 0);
  EXPECT_EQ(read("a.svg"), read("b.svg"));
  EXPECT_FALSE(read("a.svg").empty());
}

TEST_F(CliTest, RenderAppliesState) {
  auto table = strata::Table(std::make_shared<const strata::Dataset>(strata::load_dataset(read("t.csv"))));
  table.set_grouping({strata::ByCategorical{"continent"}});
  write("state.json", strata::state_to_json(table.state(), table.dataset()).dump());
  ASSERT_EQ(run("validate --data " + path("t.csv") + " --state " + path("state.json")), 0) << read("stderr.txt");
  ASSERT_EQ(run("render --data " + path("t.csv") + " --state " + path("state.json") + " --out " + path("a.svg")), 0)
      << read("stderr.txt");
  EXPECT_EQ(count_of(read("a.svg"), "<g class=\"row\""), table.traverse().size());
  EXPECT_EQ(table.traverse().size(), 5U);

  write("partial.json", "{\"protocol_version\":1}");
  EXPECT_EQ(run("render --data " + path("t.csv") + " --state " + path("partial.json")), 1);
  EXPECT_NE(read("stderr.txt").find("error"), std::string::npos);
}

TEST_F(CliTest, ValidateMalformedStateExitsOne) {
  write("bad.json", "{\"protocol_version\": 1, ");
  EXPECT_EQ(run("validate --state " + path("bad.json")), 1);
  write("wrong.json", "[1,2,3]");
  EXPECT_EQ(run("validate --state " + path("wrong.json")), 1);
  EXPECT_EQ(run("validate"), 1);
}

TEST_F(CliTest, ValidateDescriptor) {
  write("d.json", R"({"columns":[{"id":"country","kind":"text"},{"id":"gdp","kind":"numerical"}]})");
  EXPECT_EQ(run("validate --descriptor " + path("d.json")), 0) << read("stderr.txt");
  EXPECT_EQ(run("validate --descriptor " + path("d.json") + " --data " + path("t.csv")), 0) << read("stderr.txt");
  write("bad.json", R"({"columns":[{"id":"gdp","kind":"spline"}]})");
  EXPECT_EQ(run("validate --descriptor " + path("bad.json")), 1);
}

TEST_F(CliTest, MissingFileExitsTwo) {
  EXPECT_EQ(run("render --data " + path("nope.csv")), 2);
  EXPECT_EQ(run("validate --state " + path("nope.json")), 2);
  EXPECT_EQ(run("render --data " + path("t.csv") + " --out " + path("no/such/dir/a.svg")), 2);
}

TEST_F(CliTest, ExportCsv) {
  ASSERT_EQ(run("export --data " + path("t.csv") + " --out " + path("out.csv")), 0) << read("stderr.txt");
  EXPECT_EQ(read("out.csv"), "country,continent,gdp\r\nA,Asia,100\r\nB,Europe,\r\nC,Asia,300\r\n");
}

TEST_F(CliTest, BadArgumentsExitOne) {
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("serve --port 70000"), 1);
  EXPECT_EQ(run("render --data " + path("t.csv") + " --min-item-h 0.1"), 1);
}
