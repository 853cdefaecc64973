#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace msre {

inline constexpr const char* kVersion = "0.1.0";

// error taxonomy maps onto CLI exit codes:
//   config_error -> 1, check_error -> 2, io_error -> 3
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct check_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// capacity/sampler problems are configuration problems from the caller's view
struct capacity_error : config_error {
    using config_error::config_error;
};
struct sampler_error : check_error {
    using check_error::check_error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw config_error(msg);
}
inline void check(bool cond, const std::string& msg) {
    if (!cond) throw check_error(msg);
}

}  // namespace msre
