#include "logtex/rng.hpp"

namespace logtex {

std::uint64_t derive_seed(std::uint64_t root_seed, std::string_view role) {
  // FNV-1a over the role name, mixed with the root seed through splitmix64.
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (char c : role) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001b3ULL;
  }
  Rng mixer(root_seed ^ hash);
  return mixer.next_u64();
}

}  // namespace logtex
