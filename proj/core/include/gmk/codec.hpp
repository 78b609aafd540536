#ifndef GMK_CODEC_HPP
#define GMK_CODEC_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gmk {

class ModelCheckpoint;

// Owner signature as a +/-1 bit sequence. A 0 entry marks an erasure
// (a scale factor that was exactly zero at extraction time); erasures
// never appear in encoded signatures and count as mismatches in BER.
struct BitSignature {
  std::vector<int8_t> bits;
  std::optional<std::string> source_text;

  size_t length() const { return bits.size(); }
  bool has_erasures() const;
};

// Where the signature lives: normalization layers in model definition
// order, one potential bit per channel.
struct SignPlacement {
  std::vector<std::string> layer_names;
  std::vector<int> channel_counts;

  int total_capacity_bits() const;
};

struct BerResult {
  size_t mismatches = 0;
  size_t total = 0;
  double ber = 0.0;
};

struct Capacity {
  int bits = 0;
  int bytes = 0;
};

// Text -> signature. Each character becomes its 8-bit ASCII code,
// MSB first, 0 -> -1 and 1 -> +1. Rejects empty or non-printable-ASCII
// input, naming the offending index.
BitSignature encode_text(const std::string& text);

// Inverse of encode_text. Length must be a multiple of 8. Bytes outside
// printable ASCII are kept but substituted with '?' and flagged through
// *had_unprintable when provided.
std::string decode_bits(const BitSignature& sig, bool* had_unprintable = nullptr);

// Reads scale factors layer by layer in placement order (channel index
// ascending) and takes their signs. gamma == 0 becomes an erasure.
BitSignature extract_signs(const ModelCheckpoint& checkpoint,
                           const SignPlacement& placement, size_t n_bits);

// Same extraction from an already-flattened gamma sequence.
BitSignature signs_of(const std::vector<float>& gammas, size_t n_bits);

BerResult ber(const BitSignature& extracted, const BitSignature& reference);

Capacity capacity(const SignPlacement& placement);

BitSignature negate(const BitSignature& sig);

// Audit dump: one +1/-1 per line (0 for erasures).
std::string format_bits(const BitSignature& sig);
BitSignature parse_bits(const std::string& text);

}  // namespace gmk

#endif
