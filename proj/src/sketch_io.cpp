#include "whatif/sketch_io.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cstring>
#include <iomanip>
#include <sstream>

namespace whatif {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::MalformedSection, what); }

unsigned width_for(std::uint64_t max_value) { return std::max(1u, static_cast<unsigned>(std::bit_width(max_value))); }

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int len = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                  static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(len));
  return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text, const std::string& section) {
  if (text.size() % 4 != 0) malformed("section '" + section + "' is not valid base64");
  std::vector<std::uint8_t> out(3 * (text.size() / 4));
  const int len = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                  static_cast<int>(text.size()));
  if (len < 0) malformed("section '" + section + "' is not valid base64");
  std::size_t pad = 0;
  if (!text.empty() && text.back() == '=') ++pad;
  if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(len) - pad);
  return out;
}

using Sections = std::map<std::string, BitWriter>;

class Readers {
 public:
  explicit Readers(std::map<std::string, BitReader> r) : readers_(std::move(r)) {}

  BitReader& operator[](const std::string& name) {
    auto it = readers_.find(name);
    if (it == readers_.end()) malformed("missing payload section '" + name + "'");
    return it->second;
  }

  void finish() const {
    for (const auto& [name, r] : readers_)
      if (!r.exhausted()) malformed("trailing data in section '" + name + "'");
  }

 private:
  std::map<std::string, BitReader> readers_;
};

std::size_t checked_size(std::uint64_t v, std::size_t limit, const std::string& what) {
  if (v > limit) malformed(what + " out of range");
  return static_cast<std::size_t>(v);
}

constexpr std::size_t kSanity = std::size_t{1} << 32;

}  // namespace

void BitWriter::put(std::uint64_t value, unsigned width) {
  for (unsigned i = 0; i < width; ++i) {
    if (bits_ % 8 == 0) bytes_.push_back(0);
    if ((value >> (width - 1 - i)) & 1u) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (bits_ % 8));
    ++bits_;
  }
}

void BitWriter::put_count(std::uint64_t value) {
  // Gamma code of v = value + 1 in 128-bit space so value = 2^64 - 1 still fits.
  const unsigned __int128 v = static_cast<unsigned __int128>(value) + 1;
  unsigned len = 0;
  for (unsigned __int128 t = v; t > 1; t >>= 1) ++len;
  put(0, len);
  put(1, 1);
  for (unsigned i = len; i-- > 0;) put(static_cast<std::uint64_t>((v >> i) & 1u), 1);
}

void BitWriter::put_signed(std::int64_t value) {
  put_count(value >= 0 ? static_cast<std::uint64_t>(value) << 1
                       : ((static_cast<std::uint64_t>(-(value + 1))) << 1) | 1u);
}

void BitWriter::put_double(double value) { put(std::bit_cast<std::uint64_t>(value), 64); }

void BitWriter::put_bytes(const std::string& text) {
  put_count(text.size());
  for (unsigned char c : text) put(c, 8);
}

BitReader::BitReader(std::string name, std::vector<std::uint8_t> bytes, std::size_t bits)
    : name_(std::move(name)), bytes_(std::move(bytes)), bits_(bits) {
  if (bits_ > bytes_.size() * 8 || bytes_.size() != (bits_ + 7) / 8)
    malformed("section '" + name_ + "' declares " + std::to_string(bits_) + " bits but holds " +
              std::to_string(bytes_.size()) + " bytes");
}

std::uint64_t BitReader::get(unsigned width) {
  if (width > 64 || bits_ - pos_ < width) malformed("section '" + name_ + "' ended early");
  std::uint64_t v = 0;
  for (unsigned i = 0; i < width; ++i, ++pos_) v = (v << 1) | ((bytes_[pos_ / 8] >> (7 - pos_ % 8)) & 1u);
  return v;
}

std::uint64_t BitReader::get_count() {
  unsigned len = 0;
  while (get(1) == 0) {
    if (++len > 64) malformed("section '" + name_ + "' holds an oversized integer");
  }
  unsigned __int128 v = 1;
  for (unsigned i = 0; i < len; ++i) v = (v << 1) | get(1);
  return static_cast<std::uint64_t>(v - 1);
}

std::int64_t BitReader::get_signed() {
  const std::uint64_t z = get_count();
  return (z & 1u) ? -static_cast<std::int64_t>(z >> 1) - 1 : static_cast<std::int64_t>(z >> 1);
}

double BitReader::get_double() { return std::bit_cast<double>(get(64)); }

std::string BitReader::get_bytes() {
  const std::size_t n = checked_size(get_count(), (bits_ - pos_) / 8, "string length in '" + name_ + "'");
  std::string out(n, '\0');
  for (char& c : out) c = static_cast<char>(get(8));
  return out;
}

struct SketchCodec {
  // Count sketch: shape, hash parameters, and per (hash, hypothetical) trail lists.
  static void write(Sections& out, const CntSketch& s) {
    BitWriter& shape = out["cnt.shape"];
    shape.put_count(s.k_);
    shape.put_count(s.capacity_);
    shape.put_count(s.bits_);
    shape.put_count(s.hashes_.size());
    BitWriter& hashes = out["cnt.hashes"];
    if (!s.hashes_.empty()) hashes.put(s.hashes_.front().p, 64);
    for (const PairwiseHash& h : s.hashes_) {
      const unsigned w = width_for(h.p - 1);
      hashes.put(h.a, w);
      hashes.put(h.b, w);
    }
    BitWriter& trails = out["cnt.trails"];
    const unsigned tw = width_for(s.bits_);
    for (std::size_t j = 0; j < s.hashes_.size(); ++j) {
      trails.put_count(s.concise_count_[j]);
      const unsigned cw = width_for(s.concise_count_[j]);
      for (std::size_t i = 0; i < s.k_; ++i) {
        const auto& list = s.lists_[j][i];
        trails.put_count(list.size());
        for (const TrailEntry& e : list) {
          trails.put(e.trail, tw);
          trails.put(e.concise, cw);
        }
      }
    }
  }

  static CntSketch read_cnt(Readers& in) {
    CntSketch s;
    BitReader& shape = in["cnt.shape"];
    s.k_ = checked_size(shape.get_count(), kSanity, "k");
    s.capacity_ = checked_size(shape.get_count(), kSanity, "capacity");
    s.bits_ = static_cast<unsigned>(checked_size(shape.get_count(), kMaxHashBits, "hash width"));
    const std::size_t m = checked_size(shape.get_count(), kSanity, "hash count");
    BitReader& hashes = in["cnt.hashes"];
    const std::uint64_t p = m ? hashes.get(64) : 2;
    for (std::size_t j = 0; j < m; ++j) {
      PairwiseHash h;
      const unsigned w = width_for(p - 1);
      h.a = hashes.get(w);
      h.b = hashes.get(w);
      h.p = p;
      h.bits = s.bits_;
      s.hashes_.push_back(h);
    }
    BitReader& trails = in["cnt.trails"];
    const unsigned tw = width_for(s.bits_);
    s.lists_.assign(m, std::vector<std::vector<TrailEntry>>(s.k_));
    for (std::size_t j = 0; j < m; ++j) {
      const auto concise = checked_size(trails.get_count(), 0xffffffffu, "concise count");
      s.concise_count_.push_back(static_cast<std::uint32_t>(concise));
      const unsigned cw = width_for(concise);
      for (std::size_t i = 0; i < s.k_; ++i) {
        const std::size_t len = checked_size(trails.get_count(), s.capacity_, "trail list length");
        auto& list = s.lists_[j][i];
        list.reserve(len);
        for (std::size_t e = 0; e < len; ++e) {
          TrailEntry t;
          t.trail = static_cast<std::uint8_t>(trails.get(tw));
          t.concise = static_cast<std::uint32_t>(trails.get(cw));
          if (t.trail > s.bits_ || t.concise >= concise) malformed("trail entry out of range");
          list.push_back(t);
        }
      }
    }
    return s;
  }

  static void write(Sections& out, const SumSketch& s) {
    BitWriter& grid = out["sum.grid"];
    grid.put_count(s.k_);
    grid.put_double(s.base_);
    for (const auto& top : s.top_) {
      grid.put(top.has_value(), 1);
      if (top) grid.put_signed(*top);
    }
    grid.put_count(s.intervals_.size());
    for (const auto& [l, cnt] : s.intervals_) {
      grid.put_signed(l);
      write(out, cnt);
    }
    write(out, s.total_);
  }

  static SumSketch read_sum(Readers& in) {
    SumSketch s;
    BitReader& grid = in["sum.grid"];
    s.k_ = checked_size(grid.get_count(), kSanity, "k");
    s.base_ = grid.get_double();
    for (std::size_t i = 0; i < s.k_; ++i) {
      if (grid.get(1)) s.top_.emplace_back(static_cast<int>(grid.get_signed()));
      else s.top_.emplace_back(std::nullopt);
    }
    const std::size_t buckets = checked_size(grid.get_count(), kSanity, "bucket count");
    for (std::size_t b = 0; b < buckets; ++b) {
      const int l = static_cast<int>(grid.get_signed());
      s.intervals_.emplace(l, read_cnt(in));
    }
    s.total_ = read_cnt(in);
    return s;
  }

  static void write_records(Sections& out, const std::vector<QtlRecord>& list) {
    out["qtl.shape"].put_count(list.size());
    BitWriter& tuples = out["qtl.tuples"];
    BitWriter& chars = out["qtl.charVectors"];
    for (const QtlRecord& r : list) {
      tuples.put_count(r.id);
      tuples.put_double(r.weight);
      for (std::size_t i = 0; i < r.membership.size(); ++i) chars.put(r.membership.test(i), 1);
    }
  }

  static std::vector<QtlRecord> read_records(Readers& in, std::size_t k, std::size_t limit) {
    const std::size_t len = checked_size(in["qtl.shape"].get_count(), limit, "tuple list length");
    BitReader& tuples = in["qtl.tuples"];
    BitReader& chars = in["qtl.charVectors"];
    std::vector<QtlRecord> out(len);
    for (QtlRecord& r : out) {
      r.id = tuples.get_count();
      r.weight = tuples.get_double();
      r.membership = HypMask(k);
      for (std::size_t i = 0; i < k; ++i)
        if (chars.get(1)) r.membership.set(i);
    }
    return out;
  }

  static void write(Sections& out, const QtlSketch& s) {
    BitWriter& shape = out["qtl.shape"];
    shape.put_count(s.k_);
    shape.put_double(s.epsilon_);
    shape.put_double(s.base_);
    shape.put_count(s.t_);
    shape.put_count(s.keep_);
    shape.put_count(s.grid_top_);
    write(out, s.count_);
    for (const auto& list : s.prefix_) write_records(out, list);
    out["qtl.shape"].put_count(s.sampled_.size());
    for (const auto& [j, lists] : s.sampled_) {
      out["qtl.shape"].put_count(j);
      for (const auto& list : lists) write_records(out, list);
    }
  }

  static QtlSketch read_qtl(Readers& in) {
    QtlSketch s;
    BitReader& shape = in["qtl.shape"];
    s.k_ = checked_size(shape.get_count(), kSanity, "k");
    s.epsilon_ = shape.get_double();
    s.base_ = shape.get_double();
    s.t_ = checked_size(shape.get_count(), kSanity, "sample target");
    s.keep_ = checked_size(shape.get_count(), kSanity, "sample cap");
    s.grid_top_ = checked_size(shape.get_count(), kSanity, "grid size");
    s.count_ = read_cnt(in);
    for (std::size_t i = 0; i < s.k_; ++i) s.prefix_.push_back(read_records(in, s.k_, s.t_));
    const std::size_t levels = checked_size(in["qtl.shape"].get_count(), s.grid_top_ + 1, "sampled level count");
    for (std::size_t l = 0; l < levels; ++l) {
      const std::size_t j = checked_size(in["qtl.shape"].get_count(), s.grid_top_, "grid index");
      auto& lists = s.sampled_[j];
      for (std::size_t i = 0; i < s.k_; ++i) lists.push_back(read_records(in, s.k_, s.keep_));
    }
    return s;
  }

  static void write(Sections& out, const RegSketch& s) {
    BitWriter& shape = out["reg.shape"];
    shape.put_count(s.k_);
    shape.put_count(s.n_);
    shape.put_count(static_cast<std::uint64_t>(s.dim_));
    shape.put_count(s.t_);
    BitWriter& perms = out["reg.permutations"];
    const unsigned pw = width_for(s.k_ ? s.k_ - 1 : 0);
    for (const auto& perm : s.perms_)
      for (std::uint16_t c : perm) perms.put(c, pw);
    BitWriter& rows = out["reg.rows"];
    BitWriter& rates = out["reg.rates"];
    const unsigned rw = width_for(s.n_);
    for (const auto& list : s.samples_) {
      shape.put_count(list.size());
      for (const RegSample& smp : list) {
        rows.put_count(smp.id);
        for (Eigen::Index c = 0; c < smp.features.size(); ++c) rows.put_double(smp.features(c));
        rows.put_double(smp.target);
        for (std::uint32_t r : smp.rates) rates.put(r, rw);
      }
    }
  }

  static RegSketch read_reg(Readers& in) {
    RegSketch s;
    BitReader& shape = in["reg.shape"];
    s.k_ = checked_size(shape.get_count(), 0xffff, "k");
    s.n_ = checked_size(shape.get_count(), kSanity, "n");
    s.dim_ = static_cast<Eigen::Index>(checked_size(shape.get_count(), kSanity, "dimension"));
    s.t_ = checked_size(shape.get_count(), kSanity, "sample count");
    BitReader& perms = in["reg.permutations"];
    const unsigned pw = width_for(s.k_ ? s.k_ - 1 : 0);
    s.perms_.assign(s.t_, std::vector<std::uint16_t>(s.k_));
    for (auto& perm : s.perms_)
      for (auto& c : perm) {
        c = static_cast<std::uint16_t>(perms.get(pw));
        if (c >= s.k_) malformed("permutation entry out of range");
      }
    BitReader& rows = in["reg.rows"];
    BitReader& rates = in["reg.rates"];
    const unsigned rw = width_for(s.n_);
    s.samples_.resize(s.k_);
    for (auto& list : s.samples_) {
      const std::size_t len = checked_size(shape.get_count(), s.t_, "sample list length");
      if (len != 0 && len != s.t_) malformed("sample list length differs from the sample count");
      list.resize(len);
      for (RegSample& smp : list) {
        smp.id = rows.get_count();
        smp.features.resize(s.dim_);
        for (Eigen::Index c = 0; c < s.dim_; ++c) smp.features(c) = rows.get_double();
        smp.target = rows.get_double();
        smp.rates.resize(s.k_);
        for (auto& r : smp.rates) r = static_cast<std::uint32_t>(rates.get(rw));
      }
    }
    return s;
  }

  static void write(Sections& out, const DisjointRegSketch& s) {
    BitWriter& shape = out["disjoint.shape"];
    shape.put_count(s.gram_.size());
    shape.put_count(static_cast<std::uint64_t>(s.dim_));
    BitWriter& gram = out["disjoint.gram"];
    BitWriter& moment = out["disjoint.moment"];
    for (std::size_t i = 0; i < s.gram_.size(); ++i) {
      for (Eigen::Index r = 0; r < s.dim_; ++r)
        for (Eigen::Index c = 0; c < s.dim_; ++c) gram.put_double(s.gram_[i](r, c));
      for (Eigen::Index r = 0; r < s.dim_; ++r) moment.put_double(s.moment_[i](r));
    }
  }

  static DisjointRegSketch read_disjoint(Readers& in) {
    DisjointRegSketch s;
    BitReader& shape = in["disjoint.shape"];
    const std::size_t k = checked_size(shape.get_count(), kSanity, "k");
    s.dim_ = static_cast<Eigen::Index>(checked_size(shape.get_count(), 1u << 16, "dimension"));
    BitReader& gram = in["disjoint.gram"];
    BitReader& moment = in["disjoint.moment"];
    for (std::size_t i = 0; i < k; ++i) {
      Eigen::MatrixXd g(s.dim_, s.dim_);
      for (Eigen::Index r = 0; r < s.dim_; ++r)
        for (Eigen::Index c = 0; c < s.dim_; ++c) g(r, c) = gram.get_double();
      Eigen::VectorXd m(s.dim_);
      for (Eigen::Index r = 0; r < s.dim_; ++r) m(r) = moment.get_double();
      s.gram_.push_back(std::move(g));
      s.moment_.push_back(std::move(m));
    }
    return s;
  }

  static void write_numeric(Sections& out, const NumericSketch& s) {
    std::visit([&](const auto& sk) { write(out, sk); }, s);
  }

  static NumericSketch read_numeric(Readers& in, QueryKind kind) {
    switch (kind) {
      case QueryKind::Count: return read_cnt(in);
      case QueryKind::Sum:
      case QueryKind::Average: return read_sum(in);
      case QueryKind::Quantile: return read_qtl(in);
      case QueryKind::Regression: return read_reg(in);
      case QueryKind::RegressionDisjoint: return read_disjoint(in);
      case QueryKind::Complex: break;
    }
    malformed("nested complex sketch");
  }

  static void write(Sections& out, const GroupedSketch& g) {
    BitWriter& shape = out["groups.shape"];
    shape.put_count(g.k_);
    shape.put_count(g.depth_);
    shape.put_count(static_cast<std::uint64_t>(g.kind_));
    shape.put_count(g.budget_);
    shape.put_count(g.groups_.size());
    BitWriter& keys = out["groups.keys"];
    for (const GroupSketch& gs : g.groups_) {
      keys.put_count(gs.key.size());
      for (const std::string& cell : gs.key) keys.put_bytes(cell);
      out["groups.shape"].put_count(gs.size);
      BitWriter& nonempty = out["groups.nonempty"];
      for (std::size_t i = 0; i < gs.nonempty.size(); ++i) nonempty.put(gs.nonempty.test(i), 1);
      write_numeric(out, gs.sketch);
    }
  }

  static GroupedSketch read_grouped(Readers& in, const nlohmann::json& parameters) {
    GroupedSketch g;
    BitReader& shape = in["groups.shape"];
    g.k_ = checked_size(shape.get_count(), 30, "k");
    g.depth_ = checked_size(shape.get_count(), g.k_, "lifting depth");
    const auto kind = checked_size(shape.get_count(), static_cast<std::size_t>(QueryKind::Complex) - 1, "kind");
    g.kind_ = static_cast<QueryKind>(kind);
    g.budget_ = checked_size(shape.get_count(), kSanity, "group budget");
    const std::size_t groups = checked_size(shape.get_count(), kSanity, "group count");
    const std::size_t derived = SubsetIndex(g.k_, g.depth_).size();
    BitReader& keys = in["groups.keys"];
    for (std::size_t n = 0; n < groups; ++n) {
      GroupSketch gs;
      const std::size_t width = checked_size(keys.get_count(), kSanity, "group key width");
      for (std::size_t c = 0; c < width; ++c) gs.key.push_back(keys.get_bytes());
      gs.size = checked_size(in["groups.shape"].get_count(), kSanity, "group size");
      gs.nonempty = HypMask(derived);
      BitReader& nonempty = in["groups.nonempty"];
      for (std::size_t i = 0; i < derived; ++i)
        if (nonempty.get(1)) gs.nonempty.set(i);
      gs.sketch = read_numeric(in, g.kind_);
      g.groups_.push_back(std::move(gs));
    }
    if (parameters.contains("warnings"))
      for (const auto& w : parameters.at("warnings")) g.warnings_.push_back(w.get<std::string>());
    return g;
  }
};

std::size_t SketchContainer::k() const {
  return std::visit(overloaded{[](const GroupedSketch& g) { return g.k(); },
                               [](const auto& s) { return s.k(); }},
                    sketch);
}

std::vector<std::string> SketchContainer::labels() const {
  std::vector<std::string> out;
  if (parameters.contains("labels"))
    for (const auto& l : parameters.at("labels")) out.push_back(l.get<std::string>());
  for (std::size_t i = out.size(); i < k(); ++i) out.push_back("h" + std::to_string(i + 1));
  out.resize(k());
  return out;
}

std::string checksum_of(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::InvalidArgument, "SHA-256 unavailable");
  std::ostringstream hex;
  for (unsigned i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int{digest[i]};
  return hex.str();
}

namespace {

nlohmann::json unsigned_document(const SketchContainer& c) {
  Sections sections;
  std::visit(overloaded{[&](const GroupedSketch& g) { SketchCodec::write(sections, g); },
                        [&](const auto& s) { SketchCodec::write(sections, s); }},
             c.sketch);
  nlohmann::json payload = nlohmann::json::object();
  for (const auto& [name, w] : sections) payload[name] = {{"bits", w.bits()}, {"data", base64_encode(w.bytes())}};
  nlohmann::json doc;
  doc["format"] = "whatif-sketch";
  doc["formatVersion"] = kFormatVersion;
  doc["queryKind"] = std::string(to_string(c.kind));
  doc["parameters"] = c.parameters;
  doc["payload"] = std::move(payload);
  return doc;
}

}  // namespace

std::string save(const SketchContainer& c) {
  nlohmann::json doc = unsigned_document(c);
  doc["checksum"] = checksum_of(doc.dump());
  return doc.dump();
}

SketchContainer load(const std::string& bytes) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::exception& e) {
    malformed(std::string("container is not JSON: ") + e.what());
  }
  if (!doc.is_object()) malformed("container is not a JSON object");
  if (!doc.contains("formatVersion") || !doc["formatVersion"].is_number_integer())
    malformed("container has no formatVersion");
  if (doc["formatVersion"].get<long long>() != kFormatVersion)
    throw Error(ErrorCode::VersionMismatch, "container version " + doc["formatVersion"].dump() +
                                                ", expected " + std::to_string(kFormatVersion));
  if (!doc.contains("checksum") || !doc["checksum"].is_string()) malformed("container has no checksum");
  const std::string claimed = doc["checksum"].get<std::string>();
  doc.erase("checksum");
  if (checksum_of(doc.dump()) != claimed) throw Error(ErrorCode::ChecksumMismatch, "payload checksum differs");

  for (const char* field : {"queryKind", "parameters", "payload"})
    if (!doc.contains(field)) malformed(std::string("container has no ") + field);
  if (!doc["payload"].is_object() || !doc["parameters"].is_object() || !doc["queryKind"].is_string())
    malformed("container fields have the wrong type");

  SketchContainer c;
  try {
    c.kind = parse_kind(doc["queryKind"].get<std::string>());
  } catch (const Error&) {
    malformed("unknown queryKind " + doc["queryKind"].dump());
  }
  c.parameters = doc["parameters"];

  std::map<std::string, BitReader> readers;
  for (const auto& [name, sec] : doc["payload"].items()) {
    if (!sec.is_object() || !sec.contains("bits") || !sec.contains("data") || !sec["bits"].is_number_unsigned() ||
        !sec["data"].is_string())
      malformed("section '" + name + "' must be {bits, data}");
    readers.emplace(name, BitReader(name, base64_decode(sec["data"].get<std::string>(), name),
                                    sec["bits"].get<std::size_t>()));
  }
  Readers in(std::move(readers));
  try {
    switch (c.kind) {
      case QueryKind::Complex: c.sketch = SketchCodec::read_grouped(in, c.parameters); break;
      default: std::visit([&](auto&& s) { c.sketch = std::move(s); }, SketchCodec::read_numeric(in, c.kind));
    }
  } catch (const nlohmann::json::exception& e) {
    malformed(e.what());
  }
  in.finish();
  return c;
}

nlohmann::json SizeReport::to_json() const {
  return {{"headerBits", header_bits}, {"payloadBits", payload_bits}, {"sections", sections},
          {"totalBits", header_bits + payload_bits}};
}

SizeReport measure(const SketchContainer& c) {
  SizeReport r;
  nlohmann::json doc = unsigned_document(c);
  for (const auto& [name, sec] : doc["payload"].items()) {
    const std::size_t bits = sec["bits"].get<std::size_t>();
    r.sections[name] = bits;
    r.payload_bits += bits;
  }
  doc.erase("payload");
  doc["checksum"] = std::string(64, '0');
  r.header_bits = doc.dump().size() * 8;
  return r;
}

nlohmann::json to_json(const std::vector<GroupRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const GroupRow& row : rows) {
    nlohmann::json j = row.value ? whatif::to_json(*row.value) : nlohmann::json::object();
    j["key"] = row.key;
    if (!row.error.empty()) j["error"] = row.error;
    if (row.value && degraded(*row.value)) j["degraded"] = true;
    out.push_back(std::move(j));
  }
  return out;
}

nlohmann::json ScenarioAnswer::to_json() const {
  nlohmann::json j = std::visit(overloaded{[](const NumericValue& v) { return whatif::to_json(v); },
                                           [](const std::vector<GroupRow>& rows) {
                                             return nlohmann::json{{"groupedRows", whatif::to_json(rows)}};
                                           }},
                                value);
  j["kind"] = std::string(whatif::to_string(kind));
  j["scenario"] = scenario.one_based();
  j["degraded"] = degraded;
  j["epsilon"] = epsilon;
  j["delta"] = delta;
  return j;
}

ScenarioAnswer answer(const SketchContainer& c, const Scenario& s, const AnswerParams& params) {
  s.check(c.k());
  ScenarioAnswer a;
  a.kind = c.kind;
  a.scenario = s;
  a.epsilon = c.parameters.value("epsilon", 0.0);
  a.delta = c.parameters.value("delta", 0.0);
  if (const auto* g = std::get_if<GroupedSketch>(&c.sketch)) {
    auto rows = g->extract(s, params);
    for (const GroupRow& r : rows)
      if (r.value && degraded(*r.value)) a.degraded = true;
    a.value = std::move(rows);
    return a;
  }
  NumericValue v = std::visit(overloaded{[](const GroupedSketch&) -> NumericValue { malformed("unreachable"); },
                                         [&](const auto& sk) {
                                           return answer_sketch(sk, c.kind, s, params);
                                         }},
                              c.sketch);
  a.degraded = degraded(v);
  a.value = std::move(v);
  return a;
}

}  // namespace whatif
