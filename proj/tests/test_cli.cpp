// Runs the built command-line tool as a subprocess.
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / ("varioeta-cli-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

Outcome cli(const std::string& args) {
  const fs::path dir = scratch();
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string command =
      std::string("\"") + VARIOETA_CLI_PATH + "\" " + args + " >" + out.string() + " 2>" + err.string();
  const int raw = std::system(command.c_str());
  Outcome o;
  o.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  o.out = slurp(out);
  o.err = slurp(err);
  return o;
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

}  // namespace

TEST_CASE("fig2 happy path writes a CSV and exits 0") {
  const fs::path csv = scratch() / "fig2.csv";
  const auto o = cli("fig2 --n 500 --n 1000 --trials 2000 --seed 42 --out " + csv.string());
  CHECK(o.code == 0);
  const std::string text = slurp(csv);
  CHECK(first_line(text) == "n,trials,empirical_var,asymptotic,abs_error,oracle_var");
  CHECK(text.find("\n500,2000,") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}

TEST_CASE("fig2 without --out prints to stdout") {
  const auto o = cli("fig2 --n 100 --trials 1000");
  CHECK(o.code == 0);
  CHECK(first_line(o.out) == "n,trials,empirical_var,asymptotic,abs_error,oracle_var");
}

TEST_CASE("usage errors exit 2") {
  auto o = cli("fig2 --n 1 --trials 1000");
  CHECK(o.code == 2);
  CHECK(o.err.find("n must be >= 2") != std::string::npos);
  o = cli("fig2 --bogus");
  CHECK(o.code == 2);
  CHECK(o.err.find("Usage") != std::string::npos);
  o = cli("");
  CHECK(o.code == 2);
  o = cli("nonsense");
  CHECK(o.code == 2);
  o = cli("bench --problem sphere");
  CHECK(o.code == 2);
  o = cli("bench --method adam --steps 10");
  CHECK(o.code == 2);
  o = cli("compare --batch 2 --steps 10");
  CHECK(o.code == 2);
  o = cli("--config /nonexistent/file.cfg gf-check");
  CHECK(o.code == 2);
}

TEST_CASE("unwritable output path exits 1 with a message") {
  const auto o = cli("gf-check --out /nonexistent-dir/out.csv");
  CHECK(o.code == 1);
  CHECK(o.err.find("/nonexistent-dir/out.csv") != std::string::npos);
}

TEST_CASE("check commands") {
  auto o = cli("gamma-check");
  CHECK(o.code == 0);
  CHECK(first_line(o.out) == "check,parameter,expected,observed,abs_error,tolerance,status");
  o = cli("gamma-check --printed-exponent");
  CHECK(o.code == 1);
  CHECK(o.out.find("fail") != std::string::npos);
  o = cli("gf-check");
  CHECK(o.code == 0);
  CHECK(o.out.find("closed_form_residual") != std::string::npos);
  o = cli("validate");
  CHECK(o.code == 0);
}

TEST_CASE("bench: zero steps gives a header only; warnings go to stderr") {
  auto o = cli("bench --steps 0");
  CHECK(o.code == 0);
  CHECK(o.out == "method,step,error,wall_time\n");
  o = cli("bench --steps 5 --batch 300 --dataset-size 1000 --method sgd");
  CHECK(o.code == 0);
  CHECK(o.err.find("M >> N") != std::string::npos);
  o = cli("bench --steps 5 --batch 3000 --dataset-size 1000 --method sgd");
  CHECK(o.code == 2);
}

TEST_CASE("determinism: repeated invocations are byte-identical") {
  auto a = cli("fig2 --n 300 --n 700 --trials 3000 --seed 9 --threads 1");
  auto b = cli("fig2 --n 300 --n 700 --trials 3000 --seed 9 --threads 4");
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  a = cli("bench --steps 100 --record-every 10 --no-timing --seed 3");
  b = cli("bench --steps 100 --record-every 10 --no-timing --seed 3");
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  a = cli("compare --steps 50 --no-timing --repeats 1");
  b = cli("compare --steps 50 --no-timing --repeats 1");
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  a = cli("validate");
  b = cli("validate");
  CHECK(a.out == b.out);
}

TEST_CASE("config file values apply and flags override them") {
  const fs::path cfg = scratch() / "run.cfg";
  {
    std::ofstream f(cfg);
    f << "# fig2 settings\n"
         "trials = 1000\n"
         "seed=11\n"
         "n = 200, 400\n";
  }
  const auto from_file = cli("--config " + cfg.string() + " fig2");
  CHECK(from_file.code == 0);
  CHECK(from_file.out.find("\n200,1000,") != std::string::npos);
  CHECK(from_file.out.find("\n400,1000,") != std::string::npos);
  const auto explicit_flags = cli("fig2 --n 200 --n 400 --trials 1000 --seed 11");
  CHECK(from_file.out == explicit_flags.out);

  const auto overridden = cli("--config " + cfg.string() + " fig2 --seed 12");
  CHECK(overridden.code == 0);
  CHECK(overridden.out != from_file.out);
  CHECK(overridden.out == cli("fig2 --n 200 --n 400 --trials 1000 --seed 12").out);

  {
    std::ofstream f(cfg);
    f << "not a key value line\n";
  }
  CHECK(cli("--config " + cfg.string() + " fig2").code == 2);
}
