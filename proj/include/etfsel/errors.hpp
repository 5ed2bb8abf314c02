#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace etfsel {

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// exit code 2: bad inputs, bad configuration
struct parse_error : error { using error::error; };
struct validation_error : error { using error::error; };
struct config_error : error { using error::error; };
struct lookup_error : error { using error::error; };
struct pairing_error : error { using error::error; };

// exit code 3: numerical failure
struct singularity_error : error { using error::error; };
struct numerical_error : error { using error::error; };

inline void warn(const std::string& msg) {
  std::fprintf(stderr, "warning: %s\n", msg.c_str());
}

}  // namespace etfsel
