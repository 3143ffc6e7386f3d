#pragma once

namespace hwm {

// Entry point behind the hwmap binary. Subcommands:
//   simulate  run the half-wave flow, write snapshots + energy.csv
//   residual  read a snapshot directory, write residual.csv (and
//             convergence.csv when --dt-family is given)
//   analyze   envelope + microlocal reports for the configured data
//   gauge     gauge construction diagnostics and gauged residual
//   iterate   Picard iteration, write the contraction log
// Common flags: --config PATH (required), --out DIR, --seed N,
// --dt-family "d1,d2,...". Exit codes: 0 success, 2 configuration,
// 3 numerical failure, 4 I/O.
int run_cli(int argc, char** argv);

} // namespace hwm
