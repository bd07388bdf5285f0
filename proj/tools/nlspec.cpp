#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "nlspec/cli.hpp"
#include "nlspec/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"nonlocal Dirichlet spectral lab"};
  std::string config;
  std::string out_dir = ".";
  unsigned threads = 0;
  app.add_option("config", config, "experiment configuration (JSON)")->required();
  app.add_option("--out-dir", out_dir, "directory for CSV/SVG outputs");
  app.add_option("--threads", threads, "worker threads (default: NLSPEC_THREADS, then all cores)")
      ->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  if (threads > 0) nlspec::set_thread_count(threads);

  const nlspec::RunResult r = nlspec::run_config(config, out_dir);
  if (r.exit_code == 0) {
    std::printf("%s\n", r.csv.string().c_str());
    if (!r.svg.empty()) std::printf("%s\n", r.svg.string().c_str());
  } else {
    std::fputs(r.message.c_str(), stderr);
  }
  return r.exit_code;
}
