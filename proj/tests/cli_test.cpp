#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <string>

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(QUICHECK_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Cli, ConformantRunPasses) {
  EXPECT_EQ(run("run --test stream --role server --sim conformant --iterations 100 --seed 7"), 0);
}

TEST(Cli, DefectRunFails) {
  EXPECT_EQ(run("run --test stream --role server --sim defect:DecreasingPN --iterations 5"), 1);
}

TEST(Cli, ListClient) { EXPECT_EQ(run("list --role client"), 0); }

TEST(Cli, UnknownTest) { EXPECT_EQ(run("run --test nonsense"), 2); }

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run("run --test stream --policy sideways"), 2);
  EXPECT_EQ(run("run --test stream --sim conformant --target 127.0.0.1:4443"), 2);
  EXPECT_EQ(run("list --role router"), 2);
  EXPECT_EQ(run("frobnicate"), 2);
}

TEST(Cli, Validate) { EXPECT_EQ(run("validate"), 0); }
