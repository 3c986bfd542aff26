#include "smdet/smcodec.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "smdet/errors.hpp"

namespace smdet {

std::uint32_t gray_encode(std::uint32_t v) { return v ^ (v >> 1); }

int Constellation::bits() const { return ilog2(order); }

int Constellation::nearest(cplx z) const {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < order; ++i) {
    const double d = std::norm(z - points[i]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

int Constellation::find(cplx z, double tol) const {
  const int i = nearest(z);
  return std::abs(z - points[i]) <= tol * std::max(1.0, std::sqrt(power)) ? i : -1;
}

Constellation build_constellation(ModKind kind, int order, double symbol_power) {
  if (!(symbol_power > 0)) raise(ErrorCode::InvalidArgument, "symbol power must be positive");
  Constellation c;
  c.kind = kind;
  c.order = order;
  c.power = symbol_power;
  c.points.assign(order, cplx{});
  const double amp = std::sqrt(symbol_power);
  if (kind == ModKind::PSK) {
    if (order < 2 || !is_power_of_two(order))
      raise(ErrorCode::UnsupportedOrder, "PSK order must be a power of two >= 2");
    for (int p = 0; p < order; ++p) {
      const double phase = 2.0 * kPi * p / order;
      cplx pt = amp * cplx(std::cos(phase), std::sin(phase));
      // Snap the exact axis points so M=2 and M=4 have clean +-1 / +-i entries.
      if (std::abs(pt.real()) < 1e-15) pt.real(0.0);
      if (std::abs(pt.imag()) < 1e-15) pt.imag(0.0);
      c.points[gray_encode(static_cast<std::uint32_t>(p))] = pt;
    }
    return c;
  }
  if (order != 4 && order != 16 && order != 64)
    raise(ErrorCode::UnsupportedOrder, "QAM order must be 4, 16 or 64");
  const int side = static_cast<int>(std::lround(std::sqrt(order)));
  const int axis_bits = ilog2(side);
  const double scale = amp / std::sqrt(2.0 * (order - 1) / 3.0);
  for (int ii = 0; ii < side; ++ii) {
    for (int iq = 0; iq < side; ++iq) {
      const std::uint32_t label = (gray_encode(ii) << axis_bits) | gray_encode(iq);
      c.points[label] = scale * cplx(2.0 * ii - (side - 1), 2.0 * iq - (side - 1));
    }
  }
  return c;
}

std::string_view to_string(SignalMode mode) {
  switch (mode) {
    case SignalMode::SM: return "SM";
    case SignalMode::SMX: return "SMX";
    case SignalMode::SSK: return "SSK";
  }
  return "SM";
}

SignalMode parse_signal_mode(std::string_view text) {
  if (text == "SM" || text == "sm") return SignalMode::SM;
  if (text == "SMX" || text == "smx") return SignalMode::SMX;
  if (text == "SSK" || text == "ssk") return SignalMode::SSK;
  raise(ErrorCode::InvalidArgument, "unknown signal mode '" + std::string(text) + "'");
}

namespace {

int read_uint(const Bits& bits, std::size_t& pos, int width) {
  int v = 0;
  for (int i = 0; i < width; ++i) v = (v << 1) | (bits[pos++] & 1);
  return v;
}

void write_uint(Bits& bits, int v, int width) {
  for (int i = width - 1; i >= 0; --i) bits.push_back(static_cast<std::uint8_t>((v >> i) & 1));
}

std::int64_t saturating_pow(std::int64_t base, std::int64_t exp) {
  std::int64_t r = 1;
  for (std::int64_t i = 0; i < exp; ++i) {
    if (r > std::numeric_limits<std::int64_t>::max() / base)
      return std::numeric_limits<std::int64_t>::max();
    r *= base;
  }
  return r;
}

}  // namespace

SignalCodec::SignalCodec(const SystemConfig& cfg, SignalMode mode)
    : cfg_(cfg),
      mode_(mode),
      constellation_(build_constellation(cfg.mod_kind, cfg.mod_order, cfg.symbol_power)) {
  if (!is_power_of_two(cfg.n_tx)) raise(ErrorCode::InvalidArgument, "n_tx must be a power of two");
}

int SignalCodec::bits_per_block() const {
  const int a = cfg_.antenna_bits();
  const int s = cfg_.symbol_bits();
  switch (mode_) {
    case SignalMode::SM: return cfg_.block_len * (a + s);
    case SignalMode::SSK: return cfg_.block_len * a;
    case SignalMode::SMX: return cfg_.n_tx * cfg_.block_len * s;
  }
  return 0;
}

cplx SignalCodec::ssk_symbol() const { return cplx(std::sqrt(cfg_.symbol_power), 0.0); }

SignalBlock SignalCodec::map(const Bits& bits) const {
  if (static_cast<int>(bits.size()) != bits_per_block())
    raise(ErrorCode::BadLength, "expected " + std::to_string(bits_per_block()) + " bits, got " +
                                    std::to_string(bits.size()));
  const int a = cfg_.antenna_bits();
  const int s = cfg_.symbol_bits();
  const int nb = cfg_.block_len;
  SignalBlock out;
  std::size_t pos = 0;
  if (mode_ == SignalMode::SMX) {
    out.label.resize(static_cast<std::size_t>(cfg_.n_tx) * nb);
    for (auto& l : out.label) l = read_uint(bits, pos, s);
    return out;
  }
  out.antenna.resize(nb);
  out.label.assign(nb, 0);
  for (int j = 0; j < nb; ++j) {
    out.antenna[j] = read_uint(bits, pos, a);
    if (mode_ == SignalMode::SM) out.label[j] = read_uint(bits, pos, s);
  }
  return out;
}

Bits SignalCodec::demap(const SignalBlock& block) const {
  const int a = cfg_.antenna_bits();
  const int s = cfg_.symbol_bits();
  Bits out;
  out.reserve(bits_per_block());
  if (mode_ == SignalMode::SMX) {
    for (int l : block.label) write_uint(out, l, s);
    return out;
  }
  for (int j = 0; j < cfg_.block_len; ++j) {
    write_uint(out, block.antenna[j], a);
    if (mode_ == SignalMode::SM) write_uint(out, block.label[j], s);
  }
  return out;
}

CVector SignalCodec::symbols(const SignalBlock& block) const {
  CVector s(cfg_.block_len);
  for (int j = 0; j < cfg_.block_len; ++j)
    s(j) = mode_ == SignalMode::SSK ? ssk_symbol() : constellation_.points[block.label[j]];
  return s;
}

CMatrix SignalCodec::matrix(const SignalBlock& block) const {
  CMatrix x = CMatrix::Zero(cfg_.n_tx, cfg_.block_len);
  if (mode_ == SignalMode::SMX) {
    for (int j = 0; j < cfg_.block_len; ++j)
      for (int i = 0; i < cfg_.n_tx; ++i)
        x(i, j) = constellation_.points[block.label[static_cast<std::size_t>(j) * cfg_.n_tx + i]];
    return x;
  }
  const CVector s = symbols(block);
  for (int j = 0; j < cfg_.block_len; ++j) x(block.antenna[j], j) = s(j);
  return x;
}

SignalBlock SignalCodec::from_matrix(const CMatrix& x) const {
  if (x.rows() != cfg_.n_tx || x.cols() != cfg_.block_len)
    raise(ErrorCode::ShapeMismatch, "block matrix must be N_T x B");
  SignalBlock out;
  const double tol = 1e-9 * std::max(1.0, std::sqrt(cfg_.symbol_power));
  if (mode_ == SignalMode::SMX) {
    for (int j = 0; j < cfg_.block_len; ++j)
      for (int i = 0; i < cfg_.n_tx; ++i) {
        const int l = constellation_.find(x(i, j));
        if (l < 0) raise(ErrorCode::NotInConstellation, "entry is not a constellation point");
        out.label.push_back(l);
      }
    return out;
  }
  for (int j = 0; j < cfg_.block_len; ++j) {
    int active = -1;
    for (int i = 0; i < cfg_.n_tx; ++i) {
      if (std::abs(x(i, j)) > tol) {
        if (active >= 0) raise(ErrorCode::NotInConstellation, "more than one active antenna");
        active = i;
      }
    }
    if (active < 0) raise(ErrorCode::NotInConstellation, "column without an active antenna");
    out.antenna.push_back(active);
    if (mode_ == SignalMode::SSK) {
      if (std::abs(x(active, j) - ssk_symbol()) > tol)
        raise(ErrorCode::NotInConstellation, "SSK entry differs from the SSK symbol");
      out.label.push_back(0);
    } else {
      const int l = constellation_.find(x(active, j));
      if (l < 0) raise(ErrorCode::NotInConstellation, "symbol is not a constellation point");
      out.label.push_back(l);
    }
  }
  return out;
}

std::int64_t SignalCodec::candidate_count() const {
  const int nb = cfg_.block_len;
  switch (mode_) {
    case SignalMode::SM:
      return saturating_pow(static_cast<std::int64_t>(cfg_.mod_order) * cfg_.n_tx, nb);
    case SignalMode::SSK: return saturating_pow(cfg_.n_tx, nb);
    case SignalMode::SMX:
      return saturating_pow(cfg_.mod_order, static_cast<std::int64_t>(cfg_.n_tx) * nb);
  }
  return 0;
}

SignalBlock SignalCodec::block_at(std::int64_t index) const {
  const int nb = cfg_.block_len;
  const int m = cfg_.mod_order;
  SignalBlock out;
  if (mode_ == SignalMode::SMX) {
    const int n = cfg_.n_tx * nb;
    out.label.assign(n, 0);
    for (int i = n - 1; i >= 0; --i) {
      out.label[i] = static_cast<int>(index % m);
      index /= m;
    }
    return out;
  }
  out.antenna.assign(nb, 0);
  out.label.assign(nb, 0);
  if (mode_ == SignalMode::SM) {
    for (int j = nb - 1; j >= 0; --j) {
      out.label[j] = static_cast<int>(index % m);
      index /= m;
    }
  }
  for (int j = nb - 1; j >= 0; --j) {
    out.antenna[j] = static_cast<int>(index % cfg_.n_tx);
    index /= cfg_.n_tx;
  }
  return out;
}

std::int64_t SignalCodec::index_of(const SignalBlock& block) const {
  const int m = cfg_.mod_order;
  std::int64_t idx = 0;
  if (mode_ == SignalMode::SMX) {
    for (int l : block.label) idx = idx * m + l;
    return idx;
  }
  for (int a : block.antenna) idx = idx * cfg_.n_tx + a;
  if (mode_ == SignalMode::SM)
    for (int l : block.label) idx = idx * m + l;
  return idx;
}

std::vector<SignalBlock> SignalCodec::enumerate(std::int64_t cap) const {
  const std::int64_t n = candidate_count();
  if (n > cap)
    raise(ErrorCode::SearchSpaceTooLarge,
          "candidate set has " + std::to_string(n) + " members, cap is " + std::to_string(cap));
  std::vector<SignalBlock> out;
  out.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) out.push_back(block_at(i));
  return out;
}

int SignalCodec::hamming(const SignalBlock& a, const SignalBlock& b) const {
  const Bits ba = demap(a);
  const Bits bb = demap(b);
  int d = 0;
  for (std::size_t i = 0; i < ba.size(); ++i) d += ba[i] != bb[i];
  return d;
}

SignalBlock map_bits(const Bits& bits, const SystemConfig& cfg) {
  return SignalCodec(cfg).map(bits);
}

Bits demap_block(const std::vector<int>& antenna_idx, const CVector& symbols,
                 const SystemConfig& cfg) {
  const SignalCodec codec(cfg);
  if (static_cast<int>(antenna_idx.size()) != cfg.block_len || symbols.size() != cfg.block_len)
    raise(ErrorCode::BadLength, "antenna and symbol vectors must have length B");
  SignalBlock block;
  block.antenna = antenna_idx;
  for (int j = 0; j < cfg.block_len; ++j) {
    if (antenna_idx[j] < 0 || antenna_idx[j] >= cfg.n_tx)
      raise(ErrorCode::NotInConstellation, "antenna index out of range");
    const int l = codec.constellation().find(symbols(j));
    if (l < 0) raise(ErrorCode::NotInConstellation, "symbol is not a constellation point");
    block.label.push_back(l);
  }
  return codec.demap(block);
}

int hamming_payload_distance(const CMatrix& x, const CMatrix& x_prime, const SystemConfig& cfg) {
  const SignalCodec codec(cfg);
  return codec.hamming(codec.from_matrix(x), codec.from_matrix(x_prime));
}

CMatrix pilot_block(const SystemConfig& cfg) {
  if (cfg.block_len != cfg.n_tx)
    raise(ErrorCode::ShapeMismatch, "SM pilot blocks require B = N_T");
  return std::sqrt(cfg.pilot_power) * CMatrix::Identity(cfg.n_tx, cfg.n_tx);
}

std::vector<SignalBlock> enumerate_candidates(const SystemConfig& cfg, SignalMode mode,
                                              std::int64_t cap) {
  return SignalCodec(cfg, mode).enumerate(cap);
}

CMatrix ssk_matrix(const std::vector<int>& antenna, int n_tx) {
  CMatrix l = CMatrix::Zero(n_tx, static_cast<Eigen::Index>(antenna.size()));
  for (std::size_t j = 0; j < antenna.size(); ++j) l(antenna[j], static_cast<Eigen::Index>(j)) = 1.0;
  return l;
}

}  // namespace smdet
