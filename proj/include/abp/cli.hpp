#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace abp {

// Exit codes: 0 ok/valid, 1 warnings (validate) or step-limit (simulate),
// 2 invalid spec / deadlock / analysis failure, 3 I/O or document errors.
// Data goes to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace abp
