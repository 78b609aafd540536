#include "gmk/codec.hpp"

#include <sstream>

#include "gmk/checkpoint.hpp"
#include "gmk/error.hpp"

namespace gmk {

namespace {
bool printable_ascii(unsigned char c) { return c >= 0x20 && c <= 0x7e; }
}  // namespace

bool BitSignature::has_erasures() const {
  for (int8_t b : bits)
    if (b == 0) return true;
  return false;
}

int SignPlacement::total_capacity_bits() const {
  int total = 0;
  for (int c : channel_counts) total += c;
  return total;
}

BitSignature encode_text(const std::string& text) {
  require(!text.empty(), ErrorKind::InvalidArgument, "encode_text: empty text");
  BitSignature sig;
  sig.bits.reserve(text.size() * 8);
  for (size_t i = 0; i < text.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    require(printable_ascii(c), ErrorKind::InvalidArgument,
            "encode_text: non-printable-ASCII character at index " +
                std::to_string(i));
    for (int bit = 7; bit >= 0; --bit)  // MSB first
      sig.bits.push_back(((c >> bit) & 1) ? int8_t{1} : int8_t{-1});
  }
  sig.source_text = text;
  return sig;
}

std::string decode_bits(const BitSignature& sig, bool* had_unprintable) {
  require(sig.length() % 8 == 0, ErrorKind::InvalidArgument,
          "decode_bits: length " + std::to_string(sig.length()) +
              " not divisible by 8");
  if (had_unprintable) *had_unprintable = false;
  std::string out;
  out.reserve(sig.length() / 8);
  for (size_t i = 0; i < sig.length(); i += 8) {
    unsigned char c = 0;
    for (size_t j = 0; j < 8; ++j) {
      c = static_cast<unsigned char>(c << 1);
      if (sig.bits[i + j] > 0) c |= 1;
    }
    if (!printable_ascii(c)) {
      if (had_unprintable) *had_unprintable = true;
      c = '?';
    }
    out.push_back(static_cast<char>(c));
  }
  return out;
}

BitSignature signs_of(const std::vector<float>& gammas, size_t n_bits) {
  require(n_bits <= gammas.size(), ErrorKind::InvalidArgument,
          "signs_of: requested " + std::to_string(n_bits) + " bits from " +
              std::to_string(gammas.size()) + " scale factors");
  BitSignature sig;
  sig.bits.reserve(n_bits);
  for (size_t i = 0; i < n_bits; ++i) {
    float g = gammas[i];
    sig.bits.push_back(g > 0.0f ? int8_t{1} : (g < 0.0f ? int8_t{-1} : int8_t{0}));
  }
  return sig;
}

BitSignature extract_signs(const ModelCheckpoint& checkpoint,
                           const SignPlacement& placement, size_t n_bits) {
  require(static_cast<int>(n_bits) <= placement.total_capacity_bits(),
          ErrorKind::InvalidArgument, "extract_signs: n_bits exceeds capacity");
  std::vector<float> flat;
  flat.reserve(static_cast<size_t>(placement.total_capacity_bits()));
  for (size_t l = 0; l < placement.layer_names.size(); ++l) {
    const std::string tensor_name = placement.layer_names[l] + ".gamma";
    require(checkpoint.has(tensor_name), ErrorKind::NotFound,
            "extract_signs: missing layer " + placement.layer_names[l]);
    const Tensor& gamma = checkpoint.get(tensor_name);
    require(static_cast<int>(gamma.size()) == placement.channel_counts[l],
            ErrorKind::ShapeMismatch,
            "extract_signs: channel count mismatch at " +
                placement.layer_names[l]);
    for (size_t i = 0; i < gamma.size(); ++i) flat.push_back(gamma[i]);
  }
  return signs_of(flat, n_bits);
}

BerResult ber(const BitSignature& extracted, const BitSignature& reference) {
  require(extracted.length() == reference.length(), ErrorKind::InvalidArgument,
          "ber: length mismatch (" + std::to_string(extracted.length()) +
              " vs " + std::to_string(reference.length()) + ")");
  BerResult r;
  r.total = reference.length();
  for (size_t i = 0; i < r.total; ++i) {
    // erasures (0) never match a +/-1 reference bit
    if (extracted.bits[i] != reference.bits[i]) ++r.mismatches;
  }
  r.ber = r.total == 0 ? 0.0
                       : static_cast<double>(r.mismatches) /
                             static_cast<double>(r.total);
  return r;
}

Capacity capacity(const SignPlacement& placement) {
  Capacity c;
  c.bits = placement.total_capacity_bits();
  c.bytes = c.bits / 8;
  return c;
}

BitSignature negate(const BitSignature& sig) {
  BitSignature out = sig;
  out.source_text.reset();
  for (auto& b : out.bits) b = static_cast<int8_t>(-b);
  return out;
}

std::string format_bits(const BitSignature& sig) {
  std::ostringstream os;
  for (int8_t b : sig.bits) {
    if (b > 0)
      os << "+1\n";
    else if (b < 0)
      os << "-1\n";
    else
      os << "0\n";
  }
  return os.str();
}

BitSignature parse_bits(const std::string& text) {
  BitSignature sig;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line == "+1" || line == "1")
      sig.bits.push_back(1);
    else if (line == "-1")
      sig.bits.push_back(-1);
    else if (line == "0")
      sig.bits.push_back(0);
    else
      throw Error(ErrorKind::BadFormat, "parse_bits: bad line '" + line + "'");
  }
  return sig;
}

}  // namespace gmk
