#include "bbans/container.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>

#include "bbans/bits_back.hpp"
#include "bbans/errors.hpp"

namespace bbans {
namespace {

class ByteWriter {
 public:
  explicit ByteWriter(std::vector<std::uint8_t>& out) : out_(out) {}
  template <typename T>
  void put(T value) {
    for (std::size_t k = 0; k < sizeof(T); ++k)
      out_.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(value) >> (8 * k)));
  }
  void put_bytes(std::span<const std::uint8_t> bytes) {
    out_.insert(out_.end(), bytes.begin(), bytes.end());
  }

 private:
  std::vector<std::uint8_t>& out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}
  template <typename T>
  T get() {
    need(sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t k = 0; k < sizeof(T); ++k) v |= std::uint64_t{in_[pos_ + k]} << (8 * k);
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }
  std::span<const std::uint8_t> get_bytes(std::size_t n) {
    need(n);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const noexcept { return in_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw MalformedPayload("container truncated");
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

double CompressedContainer::net_bits_per_dim() const {
  const double dims = static_cast<double>(header.image_count) * header.input_dim;
  if (dims == 0) return 0.0;
  return (static_cast<double>(payload_bits()) - static_cast<double>(init_bits())) / dims;
}

double CompressedContainer::gross_bits_per_dim() const {
  const double dims = static_cast<double>(header.image_count) * header.input_dim;
  return dims == 0 ? 0.0 : static_cast<double>(payload_bits()) / dims;
}

std::vector<std::uint8_t> serialize_container(const CompressedContainer& c) {
  std::vector<std::uint8_t> out;
  out.reserve(kContainerHeaderBytes + 4 * c.payload.size());
  ByteWriter w(out);
  const ContainerHeader& h = c.header;
  w.put_bytes(kContainerMagic);
  w.put<std::uint32_t>(kContainerVersion);
  w.put_bytes(h.model_hash);
  w.put<std::uint64_t>(h.image_count);
  w.put<std::uint32_t>(h.input_dim);
  w.put<std::uint32_t>(h.latent_precision);
  w.put<std::uint32_t>(h.ans_precision);
  w.put<std::uint64_t>(h.seed);
  w.put<std::uint32_t>(h.n_init_words);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(h.family));
  w.put<std::uint8_t>(static_cast<std::uint8_t>(h.binarization.mode));
  w.put<std::uint16_t>(0);
  w.put<std::uint64_t>(h.binarization.param);
  w.put<std::uint64_t>(c.payload.size());
  for (std::uint32_t word : c.payload) w.put<std::uint32_t>(word);
  return out;
}

CompressedContainer parse_container(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const auto magic = r.get_bytes(kContainerMagic.size());
  if (!std::equal(magic.begin(), magic.end(), kContainerMagic.begin()))
    throw MalformedPayload("not a BB-ANS container (bad magic)");
  if (r.get<std::uint32_t>() != kContainerVersion)
    throw MalformedPayload("unsupported container version");

  CompressedContainer c;
  ContainerHeader& h = c.header;
  const auto hash = r.get_bytes(h.model_hash.size());
  std::copy(hash.begin(), hash.end(), h.model_hash.begin());
  h.image_count = r.get<std::uint64_t>();
  h.input_dim = r.get<std::uint32_t>();
  h.latent_precision = r.get<std::uint32_t>();
  h.ans_precision = r.get<std::uint32_t>();
  h.seed = r.get<std::uint64_t>();
  h.n_init_words = r.get<std::uint32_t>();
  const auto family = r.get<std::uint8_t>();
  const auto mode = r.get<std::uint8_t>();
  if (r.get<std::uint16_t>() != 0) throw MalformedPayload("reserved header bits set");
  h.binarization.param = r.get<std::uint64_t>();
  const auto words = r.get<std::uint64_t>();

  if (family > 1) throw MalformedPayload("unknown likelihood family code");
  if (mode > 2) throw MalformedPayload("unknown binarization mode");
  h.family = static_cast<LikelihoodFamily>(family);
  h.binarization.mode = static_cast<BinarizeMode>(mode);
  if (h.latent_precision < 1 || h.latent_precision > kMaxLatentPrecision ||
      h.ans_precision < h.latent_precision + 8 || h.ans_precision > kMaxAnsPrecision)
    throw MalformedPayload("precision fields out of range");
  if (h.n_init_words < 2) throw MalformedPayload("n_init_words below 2");
  if (words > r.remaining() / 4 || r.remaining() != 4 * words)
    throw MalformedPayload("payload length disagrees with word count");

  c.payload.resize(static_cast<std::size_t>(words));
  for (auto& word : c.payload) word = r.get<std::uint32_t>();
  return c;
}

void write_container(const CompressedContainer& container, const std::filesystem::path& path) {
  const auto bytes = serialize_container(container);
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed to write container " + path.string());
}

CompressedContainer read_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open container " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return parse_container(bytes);
}

CompressedContainer encode_dataset(const VaeModel& model, const DiscretizationGrid& grid,
                                   std::span<const Image> images, const EncodeOptions& options) {
  if (images.empty()) throw std::invalid_argument("encode_dataset needs at least one image");
  ChainSession session(model, grid,
                       ans_init(options.seed, options.n_init_words, options.ans_precision));
  for (std::size_t i = 0; i < images.size(); ++i) {
    session.append(images[i]);
    if (options.on_image) options.on_image(i, session.state());
  }

  CompressedContainer c;
  c.header.model_hash = model.model_hash;
  c.header.image_count = images.size();
  c.header.input_dim = static_cast<std::uint32_t>(model.input_dim);
  c.header.latent_precision = grid.precision();
  c.header.ans_precision = options.ans_precision;
  c.header.seed = options.seed;
  c.header.n_init_words = static_cast<std::uint32_t>(options.n_init_words);
  c.header.family = model.family;
  c.header.binarization = options.binarization;
  c.payload = ans_flatten(session.state());
  return c;
}

std::vector<Image> decode_dataset(const CompressedContainer& container, const VaeModel& model) {
  const ContainerHeader& h = container.header;
  if (h.model_hash != model.model_hash)
    throw HashMismatch("container was written with model " + to_hex(h.model_hash) +
                       ", got " + to_hex(model.model_hash));
  if (h.input_dim != model.input_dim || h.family != model.family)
    throw ShapeMismatch("container input_dim/likelihood disagree with model");

  const DiscretizationGrid grid(h.latent_precision);
  const VaeCodingModel coder(model, grid, h.ans_precision);
  AnsState state = ans_unflatten(container.payload, h.ans_precision);

  std::vector<Image> images(static_cast<std::size_t>(h.image_count));
  for (std::size_t i = images.size(); i-- > 0;) images[i] = bits_back_pop(state, coder);

  if (state != ans_init(h.seed, h.n_init_words, h.ans_precision))
    throw MalformedPayload("message did not unwind to its initial bits");
  return images;
}

}  // namespace bbans
