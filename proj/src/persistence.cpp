#include "sparsecode/persistence.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

namespace sparsecode {
namespace {

enum : std::uint8_t { kHasTau = 1, kHasModel = 2 };

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v) { le(v, 2); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void i64(std::int64_t v) { le(static_cast<std::uint64_t>(v), 8); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }
  void bytes(const char* p, std::size_t n) { buf_.insert(buf_.end(), p, p + n); }
  const std::vector<std::uint8_t>& data() const { return buf_; }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::istream& in) : in_(in) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  std::int64_t i64() { return static_cast<std::int64_t>(le(8)); }
  double f64() { return std::bit_cast<double>(le(8)); }
  void bytes(char* p, std::size_t n) {
    if (!in_.read(p, static_cast<std::streamsize>(n))) throw FormatError("container truncated");
  }

 private:
  std::uint64_t le(int n) {
    std::array<unsigned char, 8> b{};
    if (!in_.read(reinterpret_cast<char*>(b.data()), n)) throw FormatError("container truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= std::uint64_t(b[i]) << (8 * i);
    return v;
  }
  std::istream& in_;
};

std::uint8_t manifold_code(const std::optional<ManifoldSpec>& m) {
  if (!m) return 0;
  switch (m->kind()) {
    case ManifoldKind::FullSphere: return 1;
    case ManifoldKind::Circle: return 2;
    case ManifoldKind::SubSphere: return 3;
  }
  return 0;
}

std::optional<ManifoldSpec> manifold_from_code(std::uint8_t code, int d, int d_o) {
  try {
    switch (code) {
      case 0: return std::nullopt;
      case 1: return ManifoldSpec::full_sphere(d);
      case 2: return ManifoldSpec::circle(d);
      case 3: return ManifoldSpec::sub_sphere(d, d_o);
    }
  } catch (const ParameterError& e) {
    throw FormatError(std::string("container manifold: ") + e.what());
  }
  throw FormatError("container: unknown manifold code " + std::to_string(code));
}

std::uint32_t checked_u32(Index v, const char* what) {
  if (v < 0 || v > Index(UINT32_MAX)) throw FormatError(std::string("container: ") + what + " does not fit in 32 bits");
  return static_cast<std::uint32_t>(v);
}

void write_all(std::ostream& out, const ByteWriter& w) {
  out.write(reinterpret_cast<const char*>(w.data().data()), static_cast<std::streamsize>(w.data().size()));
  if (!out) throw FormatError("container: write failed");
}

ByteWriter encode(const ExpansionMatrixd& theta, const Sparsifierd& sparsifier,
                  const std::optional<ManifoldSpec>& manifold, const ApproximatorModel* model) {
  const DistributionSpec& dist = theta.distribution();
  std::optional<ManifoldSpec> mf = manifold;
  if (!mf && dist.kind() == DistributionKind::DataAttuned) mf = dist.manifold();
  if (mf && mf->ambient_dim() != theta.dim()) throw ShapeError("container: manifold dimension differs from Theta");

  const bool has_tau = sparsifier.scheme() == Scheme::Threshold;
  const Index m = theta.m();
  const Index model_len = model ? m : 0;
  ByteWriter w;
  w.bytes(kContainerMagic, 5);
  w.u8(static_cast<std::uint8_t>((has_tau ? kHasTau : 0) | (model ? kHasModel : 0)));
  w.u8(sparsifier.scheme() == Scheme::WTA ? 0 : 1);
  w.u8(static_cast<std::uint8_t>(dist.kind()));
  w.u32(checked_u32(theta.dim(), "d"));
  w.u32(checked_u32(m, "m"));
  w.u32(checked_u32(sparsifier.k(), "k"));
  w.u8(manifold_code(mf));
  w.u8(0);
  w.u16(static_cast<std::uint16_t>(mf ? mf->intrinsic_dim() : 0));
  w.f64(dist.sigma());
  w.u64(theta.seed());
  w.u64(has_tau ? static_cast<std::uint64_t>(sparsifier.thresholds()->calibration_sample_size()) : 0);
  w.u64(static_cast<std::uint64_t>(model_len));
  w.u64(static_cast<std::uint64_t>(model_len));
  w.u64(static_cast<std::uint64_t>(model_len));
  w.u64(0);
  for (Index j = 0; j < m; ++j)
    for (Index c = 0; c < theta.dim(); ++c) w.f64(theta.rows()(j, c));
  if (has_tau)
    for (Index j = 0; j < m; ++j) w.f64((*sparsifier.thresholds())[j]);
  if (model) {
    for (Index j = 0; j < m; ++j) w.f64(model->weights()[j]);
    for (Index j = 0; j < m; ++j) w.i64(model->counts()[j]);
    for (Index j = 0; j < m; ++j) w.u8(model->good_mask()[j] ? 1 : 0);
  }
  return w;
}

}  // namespace

void write_encoder(std::ostream& out, const ExpansionMatrixd& theta, const Sparsifierd& sparsifier,
                   const std::optional<ManifoldSpec>& manifold) {
  write_all(out, encode(theta, sparsifier, manifold, nullptr));
}

void write_model(std::ostream& out, const ApproximatorModel& model, const std::optional<ManifoldSpec>& manifold) {
  write_all(out, encode(model.theta(), model.sparsifier(), manifold, &model));
}

Container read_container(std::istream& in) {
  ByteReader r(in);
  char magic[5];
  r.bytes(magic, 5);
  if (std::memcmp(magic, kContainerMagic, 5) != 0) throw FormatError("container: bad magic (expected EASP1)");
  const std::uint8_t flags = r.u8();
  const std::uint8_t scheme = r.u8();
  const std::uint8_t dist_kind = r.u8();
  const std::uint32_t d = r.u32();
  const std::uint32_t m = r.u32();
  const std::uint32_t k = r.u32();
  const std::uint8_t mcode = r.u8();
  if (r.u8() != 0) throw FormatError("container: reserved byte 21 must be 0");
  const std::uint16_t d_o = r.u16();
  const double sigma = r.f64();
  const std::uint64_t seed = r.u64();
  const std::uint64_t n_cal = r.u64();
  const std::uint64_t n_w = r.u64();
  const std::uint64_t n_c = r.u64();
  const std::uint64_t n_g = r.u64();
  if (r.u64() != 0) throw FormatError("container: reserved bytes 72..79 must be 0");

  if (flags & ~(kHasTau | kHasModel)) throw FormatError("container: unknown flag bits");
  if (scheme > 1) throw FormatError("container: unknown scheme code");
  if (m < 1 || d < 2) throw FormatError("container: m must be >= 1 and d >= 2");
  if (k < 1 || k > m) throw FormatError("container: k must lie in [1, m]");
  if (bool(flags & kHasTau) != (scheme == 1)) throw FormatError("container: tau section must be present iff scheme is threshold");
  const bool has_model = flags & kHasModel;
  if (has_model ? (n_w != m || n_c != m || n_g != m) : (n_w || n_c || n_g))
    throw FormatError("container: section lengths inconsistent with m");

  const std::optional<ManifoldSpec> manifold = manifold_from_code(mcode, int(d), int(d_o));
  std::optional<DistributionSpec> dist;
  try {
    switch (dist_kind) {
      case 0: dist = DistributionSpec::uniform_sphere(int(d)); break;
      case 1: dist = DistributionSpec::gaussian(int(d), sigma); break;
      case 2:
        if (!manifold) throw FormatError("container: data-attuned rows need a manifold code");
        dist = DistributionSpec::data_attuned(*manifold);
        break;
      default: throw FormatError("container: unknown distribution code");
    }
  } catch (const ParameterError& e) {
    throw FormatError(std::string("container distribution: ") + e.what());
  }

  Eigen::MatrixXd rows(m, d);
  for (Index j = 0; j < Index(m); ++j)
    for (Index c = 0; c < Index(d); ++c) rows(j, c) = r.f64();
  if (!rows.allFinite()) throw FormatError("container: Theta has non-finite entries");
  auto theta = std::make_shared<const ExpansionMatrixd>(std::move(rows), *dist, seed);

  std::optional<Sparsifierd> sparsifier;
  try {
    if (scheme == 0) {
      sparsifier = Sparsifierd::winner_take_all(k);
    } else {
      Eigen::VectorXd tau(m);
      for (Index j = 0; j < Index(m); ++j) tau[j] = r.f64();
      sparsifier = Sparsifierd::threshold(ThresholdVectord(std::move(tau), k, static_cast<Index>(n_cal)));
    }
  } catch (const ParameterError& e) {
    throw FormatError(std::string("container thresholds: ") + e.what());
  }

  Container c{theta, *sparsifier, manifold, std::nullopt};
  if (has_model) {
    Eigen::VectorXd w(m);
    CountVector counts(m);
    GoodMask good(m);
    for (Index j = 0; j < Index(m); ++j) w[j] = r.f64();
    for (Index j = 0; j < Index(m); ++j) counts[j] = r.i64();
    for (Index j = 0; j < Index(m); ++j) {
      const std::uint8_t b = r.u8();
      if (b > 1) throw FormatError("container: good-mask bytes must be 0 or 1");
      good[j] = b == 1;
    }
    if (!w.allFinite()) throw FormatError("container: non-finite weight");
    try {
      c.model.emplace(theta, *sparsifier, std::move(w), std::move(counts), std::move(good));
    } catch (const std::invalid_argument& e) {
      throw FormatError(std::string("container model: ") + e.what());
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("container: trailing bytes");
  return c;
}

void save_encoder(const std::string& path, const ExpansionMatrixd& theta, const Sparsifierd& sparsifier,
                  const std::optional<ManifoldSpec>& manifold) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  write_encoder(out, theta, sparsifier, manifold);
}

void save_model(const std::string& path, const ApproximatorModel& model, const std::optional<ManifoldSpec>& manifold) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  write_model(out, model, manifold);
}

Container load_container(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  return read_container(in);
}

}  // namespace sparsecode
