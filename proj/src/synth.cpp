#include "drrules/synth.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "drrules/common.hpp"

namespace drrules {

void write_synth_csv(std::ostream& out, const SynthSpec& spec) {
  if (spec.rows == 0) throw std::runtime_error("synthetic dataset needs at least one row");
  if (!(spec.noise >= 0.0 && spec.noise < 1.0))
    throw std::runtime_error("noise probability must lie in [0, 1)");

  Rng rng(spec.seed);
  out << "u0,u1,u2,u3,u4,u5,cat,flag,y\n";
  static const char* kCats[3] = {"a", "b", "c"};
  char buf[16];
  for (std::size_t i = 0; i < spec.rows; ++i) {
    double u[6];
    for (double& v : u) {
      // Round to 2 decimals up front so the written text and the rule below
      // agree on the exact value.
      std::snprintf(buf, sizeof buf, "%.2f", rng.uniform() * 10.0);
      v = std::strtod(buf, nullptr);
      out << buf << ',';
    }
    const char* cat = kCats[rng.uniform_int(3)];
    int flag = static_cast<int>(rng.uniform_int(2));
    int y = ((u[0] > 6.0 && u[1] <= 4.0) || u[2] > 8.0 || (cat[0] == 'a' && flag == 1)) ? 1 : 0;
    if (rng.uniform() < spec.noise) y = 1 - y;
    out << cat << ',' << flag << ',' << y << '\n';
  }
  if (!out) throw std::runtime_error("failed while writing synthetic CSV");
}

void write_synth_csv_file(const std::string& path, const SynthSpec& spec) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_synth_csv(out, spec);
}

}  // namespace drrules
