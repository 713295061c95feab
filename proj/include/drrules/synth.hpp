#pragma once
// Deterministic synthetic CSV generator: a small planted-rule classification
// task with mixed column types, handy for smoke tests and for exercising the
// full pipeline when no benchmark CSV is on hand.

#include <cstdint>
#include <iosfwd>
#include <string>

namespace drrules {

struct SynthSpec {
  std::size_t rows = 400;
  std::uint64_t seed = 7;
  double noise = 0.05;  // label flip probability in [0, 1)
};

// Write a header + `spec.rows` data rows. Columns: u0..u5 numeric in [0,10)
// rounded to 2 decimals, `cat` in {a,b,c}, `flag` in {0,1}, and label `y`
// from the planted rule
//   (u0 > 6 AND u1 <= 4) OR u2 > 8 OR (cat = a AND flag = 1)
// with independent noise flips. Identical spec => identical bytes.
void write_synth_csv(std::ostream& out, const SynthSpec& spec);

// Convenience wrapper that creates/truncates `path`.
void write_synth_csv_file(const std::string& path, const SynthSpec& spec);

}  // namespace drrules
