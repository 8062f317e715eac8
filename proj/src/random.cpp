#include "sipx/random.hpp"

namespace sipx {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// seed = F(K(master, stream) ^ replica), F the splitmix64 finalizer (a bijection).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replica, std::string_view stream) {
  const std::uint64_t key = splitmix64(splitmix64(master) ^ fnv1a64(stream));
  return splitmix64(key ^ replica);
}

}  // namespace sipx
