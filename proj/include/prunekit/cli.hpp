#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace prunekit {

// Process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitInternal = 1,
    kExitUsage = 2,    // bad arguments, config, or artifact format
    kExitNumeric = 3,  // non-finite values during training
    kExitPartial = 4,  // sweep finished but some points failed
};

/// Entry point for the prunekit tool. args excludes the program name.
///
///   train   --config FILE [--out DIR] [--seed N]
///   sweep   --config FILE [--out DIR] [--seed N] [--parallelism N]
///   report  --in DIR [--out DIR]
///   inspect ARTIFACT
///   compare ARTIFACT_A ARTIFACT_B --config FILE [--out DIR] [--seed N]
///
/// The output directory defaults to $PRUNEKIT_OUT, then "prunekit-out".
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace prunekit
