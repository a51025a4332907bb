#include "mgp/rng.hpp"

#include <sstream>

#include "mgp/errors.hpp"

namespace mgp::rng {

std::int64_t Engine::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) raise(ErrorKind::Internal, "uniform_int: empty range");
  auto range = static_cast<std::uint64_t>(hi - lo) + 1;
  if (range == 0) return static_cast<std::int64_t>(gen_());  // full 64-bit range
  std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                        std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t x = gen_();
  while (x >= limit) x = gen_();
  return lo + static_cast<std::int64_t>(x % range);
}

std::string Engine::save_state() const {
  std::ostringstream ss;
  ss << gen_;
  return ss.str();
}

void Engine::load_state(const std::string& s) {
  std::istringstream ss(s);
  ss >> gen_;
  if (ss.fail()) raise(ErrorKind::Internal, "rng: malformed engine state");
}

}  // namespace mgp::rng
