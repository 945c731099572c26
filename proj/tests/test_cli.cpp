#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::path(FLEXQR_TEST_WORKDIR) / "cli";

int run(const std::string& args, const std::string& log = "cmd.log") {
  const std::string cmd =
      std::string(FLEXQR_BIN) + " " + args + " > " + (kWork / log).string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string first_line(const fs::path& p, int skip = 0) {
  std::ifstream in(p);
  std::string line;
  for (int i = 0; i <= skip; ++i) std::getline(in, line);
  return line;
}

struct Workdir {
  Workdir() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
  }
};

}  // namespace

TEST_CASE("cli workflows") {
  Workdir w;
  const std::string panel = (kWork / "sim" / "panel.csv").string();
  const std::string cfg = (kWork / "sim" / "panel.cfg").string();
  REQUIRE(run("simulate --shape study --n 30 --T 5 --seed 4 --out " + (kWork / "sim").string()) == 0);
  REQUIRE(fs::exists(panel));

  const std::string common = "--data " + panel + " --config " + cfg + " --draws 300 --burnin 200 --seed 9";

  SUBCASE("fit: default quantiles, byte-identical reruns, config hash guard") {
    const fs::path a = kWork / "fitA", b = kWork / "fitB";
    REQUIRE(run("fit --model freq " + common + " --out " + a.string()) == 0);
    REQUIRE(run("fit --model freq " + common + " --out " + b.string()) == 0);
    int blocks = 0;
    for (const char* q : {"0.1", "0.25", "0.5", "0.75", "0.9"}) {
      const fs::path d = a / ("freq_q" + std::string(q));
      INFO(d.string());
      CHECK(fs::exists(d / "draws.csv"));
      CHECK(fs::exists(d / "summary.json"));
      blocks += fs::exists(d / "summary.txt");
      CHECK(slurp(d / "draws.csv") == slurp(b / ("freq_q" + std::string(q)) / "draws.csv"));
    }
    CHECK(blocks == 5);
    CHECK(first_line(a / "freq_q0.5" / "draws.csv", 1) ==
          "beta_1,beta_2,beta_3,sigma,gamma,omega_11,omega_21,omega_22,accept");
    CHECK(first_line(a / "freq_q0.5" / "summary.csv", 1) == "parameter,mean,sd,ineff,ineff_flagged");
    const auto js = nlohmann::json::parse(slurp(a / "freq_q0.5" / "summary.json"));
    CHECK(js.contains("config_hash"));

    const std::string other = "fit --model freq --data " + panel + " --config " + cfg +
                              " --quantiles 0.5 --draws 300 --burnin 200 --seed 10 --out " + a.string();
    CHECK(run(other) == 1);
    CHECK(run(other + " --force") == 0);
  }

  SUBCASE("fit: REQ runs") {
    const fs::path a = kWork / "req";
    REQUIRE(run("fit --model req --quantiles 0.5 " + common + " --out " + a.string()) == 0);
    CHECK(first_line(a / "req_q0.5" / "draws.csv", 1) ==
          "beta_1,beta_2,beta_3,sigma,omega_11,omega_21,omega_22,accept");
  }

  SUBCASE("compare writes both models and the table") {
    const fs::path a = kWork / "cmp";
    REQUIRE(run("compare --quantiles 0.25,0.75 --J 200 " + common + " --out " + a.string()) == 0);
    CHECK(first_line(a / "compare.csv", 1) ==
          "quantile,log_ml_freq,log_ml_req,log_bf_freq_req,prob_freq,prob_req,odds_freq_req");
    for (const char* f : {"marglik_freq_q0.25.json", "marglik_req_q0.75.json", "compare.txt"}) {
      CHECK(fs::exists(a / f));
    }
    const auto js = nlohmann::json::parse(slurp(a / "marglik_freq_q0.25.json"));
    CHECK(js.contains("log_ml"));
    CHECK(js.contains("log_post_ordinates"));
  }

  SUBCASE("trainprior") {
    CHECK(run("trainprior " + common + " --out " + (kWork / "tp_small").string()) == 1);
    const fs::path a = kWork / "tp_all";
    REQUIRE(run("trainprior --fraction 1.0 " + common + " --out " + a.string()) == 0);
    // only the config-hash comment line
    const std::string held = slurp(a / "heldout_units.txt");
    CHECK(held.rfind("# config_hash:", 0) == 0);
    CHECK(std::count(held.begin(), held.end(), '\n') == 1);
    const auto js = nlohmann::json::parse(slurp(a / "prior.json"));
    CHECK(js["beta0"].size() == 3);
    CHECK(js.contains("training"));
  }

  SUBCASE("errors") {
    std::ofstream(kWork / "bad.csv") << "id,y,x2,x3,z2\n1,1,1,1,1\n";
    CHECK(run("fit --data " + (kWork / "bad.csv").string() + " --config " + cfg + " --out " +
                  (kWork / "bad").string(),
              "bad.log") == 1);
    CHECK(slurp(kWork / "bad.log").find("unit_id") != std::string::npos);
    CHECK(run("fit --data " + (kWork / "nope.csv").string() + " --config " + cfg + " --out " +
              (kWork / "nope").string()) == 3);
    CHECK(run("fit --model nonsense " + common + " --out " + (kWork / "ns").string()) == 1);
  }

  SUBCASE("gal-curve") {
    const fs::path f = kWork / "curve.csv";
    REQUIRE(run("gal-curve --p0 0.25 --gamma 0,0.5 --points 11 --out " + f.string()) == 0);
    CHECK(first_line(f) == "s,gamma,pdf");
    std::ifstream in(f);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) ++n;
    CHECK(n == 23);
  }
}
