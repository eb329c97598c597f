#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "netpower/analytic.hpp"
#include "netpower/cli.hpp"
#include "netpower/config.hpp"
#include "netpower/csv.hpp"
#include "netpower/errors.hpp"
#include "netpower/spectrum.hpp"

using namespace netpower;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("netpower_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_file(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return path;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int invoke(std::vector<std::string> args, std::string* err_text = nullptr) {
  args.insert(args.begin(), "netpower");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (err_text) *err_text = err.str();
  return code;
}

const char* kRingFour =
    "# four-site ring\n"
    "dim = 1\nside = 4\ns = 0.5\nalpha = 4\nnoise = 1\n"
    "gamma_min = 1\ngamma_max = 1\ngamma_steps = 1\ne_list = 0\n";

std::string ring_config(int side, double gmin, double gmax, int steps, const std::string& e_list, int realizations = 1) {
  std::ostringstream s;
  s << "dim = 1\nside = " << side << "\ns = 0.5\nalpha = 4\nnoise = 1\n"
    << "gamma_min = " << gmin << "\ngamma_max = " << gmax << "\ngamma_steps = " << steps << "\ne_list = " << e_list
    << "\nrealizations = " << realizations << "\nmaster_seed = 99\n";
  return s.str();
}

}  // namespace

TEST_CASE("config parsing") {
  std::istringstream in(std::string(kRingFour) + "realizations = 7   # trailing comment\nmaster_seed = 18446744073709551615\n");
  const auto c = parse_config(in);
  CHECK(c.sweep.spec.side == 4);
  CHECK(c.sweep.gamma_grid == std::vector<double>{1.0});
  CHECK(c.sweep.e_grid == std::vector<double>{0.0});
  CHECK(c.sweep.realizations == 7);
  CHECK(c.sweep.master_seed == std::numeric_limits<std::uint64_t>::max());

  std::istringstream grid("dim=2\nside=5\ns=0.5\nalpha=5\nnoise=1\ngamma_min=1\ngamma_max=3\ngamma_steps=5\ne_list=0.3, 0.5\n");
  const auto g = parse_config(grid);
  CHECK(g.sweep.gamma_grid == std::vector<double>{1.0, 1.5, 2.0, 2.5, 3.0});
  CHECK(g.sweep.e_grid == std::vector<double>{0.3, 0.5});

  for (const std::string& bad : {std::string("dim = 1\n"), std::string(kRingFour) + "colour = blue\n",
                                std::string(kRingFour) + "side = 5\n", std::string(kRingFour) + "realizations = many\n",
                                std::string(kRingFour) + "just words\n", std::string(kRingFour) + "realizations = 0\n"}) {
    std::istringstream b(bad);
    CHECK_THROWS_AS(parse_config(b), ConfigError);
  }
  std::istringstream bad_lattice(std::string(kRingFour).replace(std::string(kRingFour).find("side = 4"), 8, "side = 2"));
  CHECK_THROWS_AS(parse_config(bad_lattice), ConfigError);
}

TEST_CASE("config text round-trips") {
  std::istringstream in(ring_config(30, 0.5, 9.5, 7, "0.1,0.25") + "eps_check = 1e-9\n");
  const auto c = parse_config(in);
  std::istringstream again(config_text(c, {{"command", "simulate"}, {"timestamp", "now"}}));
  const auto d = parse_config(again);
  CHECK(d.sweep.gamma_grid == c.sweep.gamma_grid);
  CHECK(d.sweep.e_grid == c.sweep.e_grid);
  CHECK(d.sweep.master_seed == c.sweep.master_seed);
  CHECK(d.sweep.eps_check == c.sweep.eps_check);
  CHECK(d.sweep.spec.s == c.sweep.spec.s);
}

TEST_CASE("csv values round-trip to full precision") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-300, 300);
  for (int i = 0; i < 5000; ++i) {
    const double v = std::ldexp(mant(rng), expo(rng));
    CHECK(*csv::parse_optional(csv::format(v)) == v);
  }
  CHECK_FALSE(csv::parse_optional(csv::format(std::optional<double>{})).has_value());
  CHECK(std::isinf(*csv::parse_optional(csv::format(std::numeric_limits<double>::infinity()))));
  CHECK_THROWS_AS(csv::parse_optional("1.5abc"), SchemaError);

  std::ostringstream out;
  csv::Writer w(out, {"a", "b"});
  w.row({"1", ""});
  CHECK(out.str() == "a,b\n1,\n");
  std::istringstream in(out.str());
  const auto t = csv::read(in);
  CHECK(t.column("b") == 1);
  CHECK_THROWS_AS(t.column("c"), SchemaError);
}

TEST_CASE("spectrum command") {
  const auto dir = scratch("spectrum");
  const auto cfg = write_file(dir / "ring.cfg", kRingFour);
  CHECK(invoke({"spectrum", "--config", cfg.string(), "--out", (dir / "out").string(), "--quiet"}) == cli::kExitOk);
  const auto table = csv::read_file((dir / "out" / "spectrum.csv").string());
  CHECK(table.header == std::vector<std::string>{"k_index", "q_components", "lambda"});
  REQUIRE(table.rows.size() == 4);
  const double lambda0 = 1.0 - (0.08 + 0.0625 / 18.0625);
  CHECK(std::stod(table.rows[0][2]) == doctest::Approx(lambda0).epsilon(1e-14));
  CHECK(std::stod(table.rows[2][2]) == doctest::Approx(1.0 + 0.08 - 0.0625 / 18.0625).epsilon(1e-14));
  CHECK(fs::exists(dir / "out" / "spectrum.manifest"));

  const auto tiny = write_file(dir / "tiny.cfg", std::string(kRingFour) + "gamma0 = 1e-9\n");
  CHECK(invoke({"spectrum", "--config", tiny.string(), "--out", (dir / "tiny").string(), "--quiet"}) == cli::kExitOk);
  for (const auto& row : csv::read_file((dir / "tiny" / "spectrum.csv").string()).rows) CHECK(std::stod(row[2]) > 1e8);

  std::string err;
  CHECK(invoke({"spectrum", "--config", (dir / "missing.cfg").string()}, &err) == cli::kExitConfig);
  CHECK_FALSE(err.empty());
}

TEST_CASE("exit codes") {
  CHECK(invoke({"--help"}) == cli::kExitOk);
  CHECK(invoke({"simulate", "--help"}) == cli::kExitOk);
  CHECK(invoke({}) == cli::kExitConfig);
  CHECK(invoke({"frobnicate"}) == cli::kExitConfig);
  CHECK(invoke({"analytic"}) == cli::kExitConfig);
  const auto dir = scratch("exit");
  const auto cfg = write_file(dir / "ring.cfg", kRingFour);
  CHECK(invoke({"analytic", "--config", cfg.string(), "--realizations", "0"}) == cli::kExitConfig);
  CHECK(invoke({"analytic", "--config", cfg.string(), "--seed", "minus-one"}) == cli::kExitConfig);
  const auto broken = write_file(dir / "broken.cfg", "dim = 1\nside = four\n");
  CHECK(invoke({"analytic", "--config", broken.string()}) == cli::kExitConfig);
}

TEST_CASE("analytic command") {
  const auto dir = scratch("analytic");
  const auto profile = gain_profile({1, 200, 0.5}, {4.0, 1.0, 1.0});
  const double gstar = 1.0 / interference_sum(profile);
  const double gc = critical_gamma(profile, 1.0, 0.5);

  SUBCASE("no erasures reproduce the uniform power") {
    const auto cfg = write_file(dir / "e0.cfg", ring_config(200, 0.5, 0.95 * gstar, 12, "0"));
    REQUIRE(invoke({"analytic", "--config", cfg.string(), "--out", (dir / "e0").string(), "--quiet"}) == cli::kExitOk);
    const auto t = csv::read_file((dir / "e0" / "analytic.csv").string());
    REQUIRE(t.rows.size() == 12);
    for (const auto& row : t.rows) {
      const double gamma = std::stod(row[t.column("gamma")]);
      const ChannelParams p{4.0, 1.0, gamma};
      CHECK(std::stod(row[t.column("pave_analytic")]) ==
            doctest::Approx(pave_no_erasure(eigenvalues(profile, p), p)).epsilon(1e-12));
    }
  }
  SUBCASE("finite power beyond the erasure-free divergence, then termination") {
    const auto cfg = write_file(dir / "e5.cfg", ring_config(200, 0.5, 1.3 * gc, 40, "0,0.5"));
    REQUIRE(invoke({"analytic", "--config", cfg.string(), "--out", (dir / "e5").string(), "--quiet"}) == cli::kExitOk);
    const auto t = csv::read_file((dir / "e5" / "analytic.csv").string());
    CHECK(t.header.size() == 9);
    bool extended = false;
    for (const auto& row : t.rows) {
      const double gamma = std::stod(row[t.column("gamma")]);
      const double e = std::stod(row[t.column("e")]);
      const bool present = !row[t.column("pave_analytic")].empty();
      if (e == 0.0) CHECK(present == (gamma < gstar));
      if (e == 0.5) {
        CHECK(present == (gamma <= gc));
        if (gamma > gstar && present) extended = true;
        if (!present) CHECK(row[t.column("beta_stable")].empty());
        CHECK(std::stod(row[t.column("critical_gamma")]) == doctest::Approx(gc).epsilon(1e-12));
      }
    }
    CHECK(extended);
  }
}

TEST_CASE("simulate command and manifest reruns") {
  const auto dir = scratch("simulate");
  SUBCASE("single realization without erasures") {
    const auto cfg = write_file(dir / "one.cfg", ring_config(40, 3.0, 3.0, 1, "0"));
    REQUIRE(invoke({"simulate", "--config", cfg.string(), "--out", (dir / "one").string(), "--quiet"}) == cli::kExitOk);
    const auto t = csv::read_file((dir / "one" / "simulate.csv").string());
    REQUIRE(t.rows.size() == 1);
    const auto profile = gain_profile({1, 40, 0.5}, {4.0, 1.0, 1.0});
    const ChannelParams p{4.0, 1.0, 3.0};
    CHECK(std::stod(t.rows[0][t.column("pave_mc_mean")]) ==
          doctest::Approx(1.0 / eigenvalues(profile, p).lambda0).epsilon(1e-12));
    CHECK(std::stod(t.rows[0][t.column("feasible_fraction")]) == 1.0);
    const auto r = csv::read_file((dir / "one" / "simulate_realizations.csv").string());
    CHECK(r.header == std::vector<std::string>{"gamma", "e", "realization", "seed", "feasible", "pave", "pvar", "min_eig"});
    // Without erasures every link carries the mean power: one bin holds all 40.
    const auto h = csv::read_file((dir / "one" / "simulate_power_histogram.csv").string());
    double total = 0.0, peak = 0.0;
    for (const auto& row : h.rows) {
      total += std::stod(row[h.column("count")]);
      peak = std::max(peak, std::stod(row[h.column("count")]));
    }
    CHECK(total == 40.0);
    CHECK(peak == 40.0);
  }
  SUBCASE("rerun from the manifest is byte-identical") {
    const auto cfg = write_file(dir / "mc.cfg", ring_config(60, 2.0, 12.0, 4, "0.3,0.6", 6));
    REQUIRE(invoke({"simulate", "--config", cfg.string(), "--out", (dir / "a").string(), "--quiet", "--threads", "2"}) ==
            cli::kExitOk);
    const auto manifest = dir / "a" / "simulate.manifest";
    REQUIRE(fs::exists(manifest));
    REQUIRE(invoke({"simulate", "--config", manifest.string(), "--out", (dir / "b").string(), "--quiet"}) == cli::kExitOk);
    for (const char* f : {"simulate.csv", "simulate_realizations.csv", "simulate_power_histogram.csv"})
      CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
}

TEST_CASE("critical command") {
  const auto dir = scratch("critical");
  const auto cfg = write_file(dir / "c.cfg", ring_config(100, 1.0, 1.0, 1, "0.5", 5));
  REQUIRE(invoke({"critical", "--config", cfg.string(), "--out", dir.string(), "--quiet"}) == cli::kExitOk);
  CHECK(csv::read_file((dir / "critical_samples.csv").string()).rows.size() == 5);
  const auto s = csv::read_file((dir / "critical_summary.csv").string());
  REQUIRE(s.rows.size() == 1);
  CHECK(std::stod(s.rows[0][s.column("sample_max")]) >= std::stod(s.rows[0][s.column("sample_min")]));
}

TEST_CASE("plot data") {
  const auto dir = scratch("plot");
  const auto profile = gain_profile({1, 100, 0.5}, {4.0, 1.0, 1.0});
  const double gc = critical_gamma(profile, 1.0, 0.5);
  const auto cfg = write_file(dir / "fig.cfg", ring_config(100, 1.0, 0.99 * gc, 12, "0.5", 4));
  REQUIRE(invoke({"analytic", "--config", cfg.string(), "--out", (dir / "an").string(), "--quiet"}) == cli::kExitOk);
  REQUIRE(invoke({"simulate", "--config", cfg.string(), "--out", (dir / "mc").string(), "--quiet"}) == cli::kExitOk);

  SUBCASE("stable, unstable and variance curves") {
    REQUIRE(invoke({"plotdata", (dir / "an" / "analytic.csv").string(), "--out", (dir / "p1").string(), "--quiet"}) ==
            cli::kExitOk);
    std::set<std::string> names;
    for (const auto& row : csv::read_file((dir / "p1" / "plot_series.csv").string()).rows) names.insert(row[0]);
    for (const char* n : {"stable", "unstable", "variance"}) CHECK(names.count(n) == 1);
    CHECK(fs::exists(dir / "p1" / "plot.gp"));
    CHECK(fs::exists(dir / "p1" / "series_stable_e0p5.dat"));
  }
  SUBCASE("analytic with Monte Carlo and per-sample inputs") {
    REQUIRE(invoke({"plotdata", (dir / "an" / "analytic.csv").string(), (dir / "mc" / "simulate.csv").string(),
                    (dir / "mc" / "simulate_realizations.csv").string(), "--out", (dir / "p2").string(), "--quiet"}) ==
            cli::kExitOk);
    std::set<std::string> names;
    for (const auto& row : csv::read_file((dir / "p2" / "plot_series.csv").string()).rows) names.insert(row[0]);
    for (const char* n : {"stable", "mc_mean", "mc_variance", "sample_max", "meanfield"}) CHECK(names.count(n) == 1);
  }
  SUBCASE("two-dimensional grid includes the mean-field curve") {
    const auto cfg2 = write_file(dir / "plane.cfg",
                                 "dim = 2\nside = 12\ns = 0.5\nalpha = 5\nnoise = 1\ngamma_min = 1\ngamma_max = 8\n"
                                 "gamma_steps = 8\ne_list = 0.5\n");
    REQUIRE(invoke({"analytic", "--config", cfg2.string(), "--out", (dir / "an2").string(), "--quiet"}) == cli::kExitOk);
    REQUIRE(invoke({"plotdata", (dir / "an2" / "analytic.csv").string(), "--out", (dir / "p3").string(), "--quiet"}) ==
            cli::kExitOk);
    std::set<std::string> names;
    for (const auto& row : csv::read_file((dir / "p3" / "plot_series.csv").string()).rows) names.insert(row[0]);
    CHECK(names.count("meanfield") == 1);
  }
  SUBCASE("schema errors") {
    const auto other = write_file(dir / "other.cfg", ring_config(100, 50.0, 60.0, 3, "0.5"));
    REQUIRE(invoke({"analytic", "--config", other.string(), "--out", (dir / "far").string(), "--quiet"}) == cli::kExitOk);
    CHECK(invoke({"plotdata", (dir / "an" / "analytic.csv").string(), (dir / "far" / "analytic.csv").string(), "--out",
                  (dir / "p4").string()}) == cli::kExitSchema);
    const auto junk = write_file(dir / "junk.csv", "x,y\n1,2\n");
    CHECK(invoke({"plotdata", junk.string(), "--out", (dir / "p5").string()}) == cli::kExitSchema);
    CHECK(invoke({"plotdata", (dir / "nope.csv").string(), "--out", (dir / "p6").string()}) == cli::kExitSchema);
  }
}
