#include "pct/prng.hpp"

#include "pct/errors.hpp"

namespace pct {

BigInt Xoshiro256ss::below(const BigInt& bound) {
  if (bound <= 0) throw ValidationError("sampling bound must be positive");
  if (bound == 1) return 0;

  if (bound <= BigInt(~std::uint64_t{0})) {
    // Single-word path. Mask to the covering power of two, then reject.
    const std::uint64_t b = bound.convert_to<std::uint64_t>();
    unsigned bits = 0;
    while ((std::uint64_t{1} << bits) < b && bits < 63) ++bits;
    if ((std::uint64_t{1} << bits) < b) bits = 64;
    const std::uint64_t mask =
        bits >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << bits) - 1);
    for (;;) {
      const std::uint64_t u = next() & mask;
      if (u < b) return BigInt(u);
    }
  }

  const unsigned bits = static_cast<unsigned>(msb(bound)) + 1;
  const unsigned words = (bits + 63) / 64;
  const unsigned top_bits = bits - 64 * (words - 1);
  const std::uint64_t top_mask =
      top_bits >= 64 ? ~std::uint64_t{0}
                     : ((std::uint64_t{1} << top_bits) - 1);
  for (;;) {
    BigInt u = 0;
    for (unsigned w = 0; w < words; ++w) {
      std::uint64_t word = next();
      if (w == 0) word &= top_mask;
      u <<= 64;
      u |= BigInt(word);
    }
    if (u < bound) return u;
  }
}

}  // namespace pct
