#include "raceplan/graph_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "raceplan/csv.hpp"
#include "raceplan/errors.hpp"

namespace raceplan {
namespace {

constexpr char kMagic[4] = {'L', 'A', 'T', 'G'};
constexpr char kTrailer[4] = {'G', 'E', 'N', 'D'};

class Writer {
 public:
  void raw(const char* p, std::size_t n) { buf_.append(p, n); }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void array(const Eigen::ArrayXd& a) {
    for (Eigen::Index i = 0; i < a.size(); ++i) f64(a[i]);
  }
  std::string take() { return std::move(buf_); }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view b) : b_(b) {}
  void need(std::size_t n) const {
    if (pos_ + n > b_.size()) throw GraphTruncatedError("graph file truncated at byte " + std::to_string(b_.size()));
  }
  std::string_view raw(std::size_t n) {
    need(n);
    auto v = b_.substr(pos_, n);
    pos_ += n;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(static_cast<unsigned char>(b_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(b_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(b_[pos_++]);
  }
  double f64() { return std::bit_cast<double>(u64()); }
  /// Element count, checked against the bytes left so a corrupt count cannot over-allocate.
  std::size_t count(std::size_t min_elem_bytes) {
    const std::size_t n = u32();
    need(n * min_elem_bytes);
    return n;
  }
  void array(Eigen::ArrayXd& a, std::size_t n) {
    need(8 * n);
    a.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) a[static_cast<Eigen::Index>(i)] = f64();
  }
  bool at_end() const { return pos_ == b_.size(); }

 private:
  std::string_view b_;
  std::size_t pos_ = 0;
};

void write_params(Writer& w, const GraphParams& p) {
  const double v[] = {p.lat_sep, p.long_sep_straight, p.long_sep_curve, p.kappa_curve_thresh, p.min_horizon,
                      p.w_len,   p.w_kappa_avg,       p.w_kappa_range,  p.w_rl,               p.lat_ratio_max,
                      p.r_min,   p.veh_width,         p.sample_spacing};
  w.u32(static_cast<std::uint32_t>(std::size(v)));
  for (double x : v) w.f64(x);
}

GraphParams read_params(Reader& r) {
  if (r.u32() != 13) throw GraphFileError("graph file: unexpected parameter block size");
  GraphParams p;
  double* fields[] = {&p.lat_sep, &p.long_sep_straight, &p.long_sep_curve, &p.kappa_curve_thresh, &p.min_horizon,
                      &p.w_len,   &p.w_kappa_avg,       &p.w_kappa_range,  &p.w_rl,               &p.lat_ratio_max,
                      &p.r_min,   &p.veh_width,         &p.sample_spacing};
  for (double* f : fields) *f = r.f64();
  return p;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string serialize_graph(const Lattice& g) {
  Writer w;
  w.raw(kMagic, 4);
  w.u32(kGraphFormatVersion);
  write_params(w, g.params);
  w.u64(g.raceline_hash);
  w.u8(g.cyclic ? 1 : 0);

  const auto& pts = g.ref.points();
  w.u32(static_cast<std::uint32_t>(pts.size()));
  for (const auto& p : pts) {
    for (double v : {p.s, p.x, p.y, p.theta, p.kappa, p.v_ref, p.w_left, p.w_right}) w.f64(v);
  }
  w.f64(g.lap_length);

  w.u32(static_cast<std::uint32_t>(g.layer_s.size()));
  for (double s : g.layer_s) w.f64(s);

  w.u32(static_cast<std::uint32_t>(g.nodes.size()));
  for (const auto& n : g.nodes) {
    w.i32(n.layer);
    w.i32(n.lat_idx);
    for (double v : {n.s, n.l, n.pose.x, n.pose.y, n.pose.theta}) w.f64(v);
  }

  w.u32(static_cast<std::uint32_t>(g.edges.size()));
  for (const auto& e : g.edges) {
    w.u32(static_cast<std::uint32_t>(e.from));
    w.u32(static_cast<std::uint32_t>(e.to));
    for (int k = 0; k < 4; ++k) {
      w.f64(e.segment.coef(k, 0));
      w.f64(e.segment.coef(k, 1));
    }
    for (double v : {e.segment.s_len, e.s_len, e.kappa_avg, e.kappa_range, e.cost, e.bound_center.x(),
                     e.bound_center.y(), e.bound_radius}) {
      w.f64(v);
    }
    w.u32(static_cast<std::uint32_t>(e.sampled.size()));
    w.array(e.sampled.s);
    w.array(e.sampled.x);
    w.array(e.sampled.y);
    w.array(e.sampled.psi);
    w.array(e.sampled.kappa);
  }
  w.raw(kTrailer, 4);
  return w.take();
}

Lattice deserialize_graph(std::string_view bytes, std::optional<std::uint64_t> expected_hash) {
  Reader r(bytes);
  if (bytes.size() < 4) throw GraphTruncatedError("graph file truncated in header");
  if (r.raw(4) != std::string_view(kMagic, 4)) throw GraphFileError("not a graph file (bad magic)");
  const auto version = r.u32();
  if (version != kGraphFormatVersion) {
    throw GraphVersionError("graph format version " + std::to_string(version) + ", expected " +
                            std::to_string(kGraphFormatVersion));
  }
  Lattice g;
  g.params = read_params(r);
  g.raceline_hash = r.u64();
  if (expected_hash && *expected_hash != g.raceline_hash) {
    throw GraphHashError("graph was built from a different race line (hash mismatch)");
  }
  g.cyclic = r.u8() != 0;

  std::vector<RefLinePoint> pts(r.count(64));
  for (auto& p : pts) {
    for (double* v : {&p.s, &p.x, &p.y, &p.theta, &p.kappa, &p.v_ref, &p.w_left, &p.w_right}) *v = r.f64();
  }
  g.lap_length = r.f64();

  g.layer_s.resize(r.count(8));
  for (auto& s : g.layer_s) s = r.f64();

  g.nodes.resize(r.count(48));
  for (auto& n : g.nodes) {
    n.layer = r.i32();
    n.lat_idx = r.i32();
    for (double* v : {&n.s, &n.l, &n.pose.x, &n.pose.y, &n.pose.theta}) *v = r.f64();
    if (n.layer < 0 || n.layer >= g.num_layers()) throw GraphFileError("graph file: node layer out of range");
  }

  g.edges.resize(r.count(140));
  for (auto& e : g.edges) {
    e.from = static_cast<int>(r.u32());
    e.to = static_cast<int>(r.u32());
    if (e.from < 0 || e.to < 0 || e.from >= static_cast<int>(g.nodes.size()) ||
        e.to >= static_cast<int>(g.nodes.size())) {
      throw GraphFileError("graph file: edge endpoint out of range");
    }
    for (int k = 0; k < 4; ++k) {
      e.segment.coef(k, 0) = r.f64();
      e.segment.coef(k, 1) = r.f64();
    }
    e.segment.s_len = r.f64();
    e.s_len = r.f64();
    e.kappa_avg = r.f64();
    e.kappa_range = r.f64();
    e.cost = r.f64();
    e.bound_center.x() = r.f64();
    e.bound_center.y() = r.f64();
    e.bound_radius = r.f64();
    const std::size_t n = r.u32();
    r.need(n * 40);
    e.sampled.resize(static_cast<Eigen::Index>(n));
    r.array(e.sampled.s, n);
    r.array(e.sampled.x, n);
    r.array(e.sampled.y, n);
    r.array(e.sampled.psi, n);
    r.array(e.sampled.kappa, n);
  }
  if (r.raw(4) != std::string_view(kTrailer, 4)) throw GraphFileError("graph file: bad trailer");
  if (!r.at_end()) throw GraphFileError("graph file: trailing bytes");

  try {
    g.ref = ReferenceLine::from_points(std::move(pts), {true, true, true});
  } catch (const GeometryError& e) {
    throw GraphFileError(std::string("graph file: embedded reference line invalid: ") + e.what());
  }
  g.reindex();
  return g;
}

void save_graph(const Lattice& g, const std::filesystem::path& path) {
  const auto bytes = serialize_graph(g);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("write failed: " + path.string());
}

Lattice load_graph(const std::filesystem::path& path, std::optional<std::uint64_t> expected_hash) {
  return deserialize_graph(csv::read_file(path), expected_hash);
}

Lattice load_graph(const std::filesystem::path& path, const std::filesystem::path& raceline_csv) {
  return load_graph(path, fnv1a64(csv::read_file(raceline_csv)));
}

}  // namespace raceplan
