#pragma once

// Versioned text container for policies: a header with the architecture and
// one exactly-representable hex float per parameter.

#include <iosfwd>
#include <string>

#include "ebrake/networks.hpp"

namespace ebrake {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void save_policy(std::ostream& out, const PolicyNetwork& policy);
PolicyNetwork load_policy(std::istream& in);

/// File variants; errors name the path.
void save_policy(const std::string& path, const PolicyNetwork& policy);
PolicyNetwork load_policy(const std::string& path);

}  // namespace ebrake
