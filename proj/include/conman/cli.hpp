#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "conman/policy.hpp"

namespace conman::cli {

/// Process exit codes.
enum ExitStatus : int {
    kOk = 0,
    kValidationFailure = 1,
    kInputError = 2,
    kInternalError = 3,
};

/// Parses "tc=real_time,dir=send[,app=name]". nullopt on any malformed part.
std::optional<ChannelRequest> parse_request(std::string_view spec);

/// Entry point shared by the binary and the tests; args excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace conman::cli
