// Writes the built-in scenario networks and sample files to a directory.

#include "implylp/ingest.hpp"
#include "implylp/oracle.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

using namespace implylp;

namespace {

void write_fixture(const std::filesystem::path &dir, const std::string &stem, const Fixture &f) {
  save_network(f.net1, dir / (stem + "_net1.json"));
  save_network(f.net2, dir / (stem + "_net2.json"));
  save_samples({{stem + "_center", f.center, f.label}}, dir / (stem + "_samples.json"));
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Write fixture networks and samples", "implylp_fixtures"};
  std::string out = "fixtures";
  std::uint64_t seed = 1;
  std::size_t samples = 20;
  app.add_option("--out", out, "output directory");
  app.add_option("--seed", seed, "seed for the random fixtures");
  app.add_option("--samples", samples, "samples drawn around the random fixture");
  CLI11_PARSE(app, argc, argv);

  try {
    std::filesystem::create_directories(out);
    write_fixture(out, "figure1", make_fixture(FixtureKind::Figure1Style));
    write_fixture(out, "uniform", make_fixture(FixtureKind::UniformConstant, seed));

    Fixture r = make_fixture(FixtureKind::RandomSmall, seed);
    write_fixture(out, "random", r);
    Rng rng(seed);
    std::vector<Sample> many;
    for (std::size_t k = 0; k < samples; ++k) {
      std::vector<double> x(r.center.size());
      for (double &v : x)
        v = rng.uniform(-1.0, 1.0);
      many.push_back({"s" + std::to_string(k), x, predict(r.net1, x)});
    }
    save_samples(many, std::filesystem::path(out) / "random_many_samples.json");
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  std::cout << "wrote fixtures to " << out << "\n";
  return 0;
}
