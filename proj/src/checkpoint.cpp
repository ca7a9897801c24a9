#include "tcd/checkpoint.hpp"

#include <stdexcept>

#include "tcd/binio.hpp"

namespace tcd {

namespace {
constexpr char kMagic[9] = "TCDCKPT1";
constexpr std::uint32_t kVersion = 1;

void write_params(BinWriter& w, const ParamSet& p) {
  w.u32(static_cast<std::uint32_t>(p.size()));
  for (std::size_t i = 0; i < p.size(); ++i) {
    w.str(p.names[i]);
    const Tensor& t = p.tensors[i];
    w.u32(static_cast<std::uint32_t>(t.ndim()));
    for (int d : t.shape) w.u32(static_cast<std::uint32_t>(d));
    w.f64_array(t.data);
  }
}

ParamSet read_params(BinReader& r) {
  ParamSet p;
  const std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::string name = r.str();
    const std::uint32_t nd = r.u32();
    std::vector<int> shape(nd);
    for (std::uint32_t d = 0; d < nd; ++d) shape[d] = static_cast<int>(r.u32());
    const std::size_t numel = shape_numel(shape);
    p.add(name, Tensor(shape, r.f64_array(numel)));
  }
  return p;
}

}  // namespace

void save_checkpoint(const Checkpoint& c, const std::string& path) {
  BinWriter w;
  w.magic(kMagic);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(c.dcfg.d_s));
  w.u32(static_cast<std::uint32_t>(c.dcfg.levels));
  w.u32(static_cast<std::uint32_t>(c.dcfg.base_width));
  w.u32(static_cast<std::uint32_t>(c.dcfg.kernel));
  w.u32(static_cast<std::uint32_t>(c.dcfg.embed_dim));
  w.u32(static_cast<std::uint32_t>(c.dcfg.cond_dim));
  w.u32(static_cast<std::uint32_t>(c.icfg.d_s));
  w.u32(static_cast<std::uint32_t>(c.icfg.d_a));
  w.u32(static_cast<std::uint32_t>(c.icfg.hidden));
  w.u8(c.sched_kind == ScheduleKind::Cosine ? 0 : 1);
  w.u32(static_cast<std::uint32_t>(c.K));
  w.f64(c.gcfg.omega);
  w.f64(c.gcfg.condition_dropout_p);
  w.u8(c.gcfg.clip_x0 ? 1 : 0);
  w.u8(c.gcfg.variance_scaled_noise ? 1 : 0);
  w.u32(static_cast<std::uint32_t>(c.L));
  w.u32(static_cast<std::uint32_t>(c.t_hc));
  w.u32(static_cast<std::uint32_t>(c.stats.d_s));
  w.f64_array(c.stats.state_min);
  w.f64_array(c.stats.state_max);
  w.f64(c.stats.T_min);
  w.f64(c.stats.T_max);
  w.f64(c.stats.r_min);
  w.f64(c.stats.r_max);
  w.u32(static_cast<std::uint32_t>(c.stats.t_max));
  write_params(w, c.theta);
  write_params(w, c.phi);
  w.save(path);
}

Checkpoint load_checkpoint(const std::string& path) {
  BinReader r = BinReader::from_file(path);
  r.expect_magic(kMagic, "checkpoint");
  const std::uint32_t version = r.u32();
  if (version != kVersion)
    throw std::runtime_error("checkpoint version mismatch: got " + std::to_string(version) +
                             ", expected " + std::to_string(kVersion));
  r.check_crc("checkpoint");
  Checkpoint c;
  c.dcfg.d_s = static_cast<int>(r.u32());
  c.dcfg.levels = static_cast<int>(r.u32());
  c.dcfg.base_width = static_cast<int>(r.u32());
  c.dcfg.kernel = static_cast<int>(r.u32());
  c.dcfg.embed_dim = static_cast<int>(r.u32());
  c.dcfg.cond_dim = static_cast<int>(r.u32());
  c.icfg.d_s = static_cast<int>(r.u32());
  c.icfg.d_a = static_cast<int>(r.u32());
  c.icfg.hidden = static_cast<int>(r.u32());
  c.sched_kind = r.u8() == 0 ? ScheduleKind::Cosine : ScheduleKind::Linear;
  c.K = static_cast<int>(r.u32());
  c.gcfg.omega = r.f64();
  c.gcfg.condition_dropout_p = r.f64();
  c.gcfg.clip_x0 = r.u8() != 0;
  c.gcfg.variance_scaled_noise = r.u8() != 0;
  c.L = static_cast<int>(r.u32());
  c.t_hc = static_cast<int>(r.u32());
  c.stats.d_s = static_cast<int>(r.u32());
  c.stats.state_min = r.f64_array(static_cast<std::size_t>(c.stats.d_s));
  c.stats.state_max = r.f64_array(static_cast<std::size_t>(c.stats.d_s));
  c.stats.T_min = r.f64();
  c.stats.T_max = r.f64();
  c.stats.r_min = r.f64();
  c.stats.r_max = r.f64();
  c.stats.t_max = static_cast<int>(r.u32());
  c.theta = read_params(r);
  c.phi = read_params(r);
  return c;
}

}  // namespace tcd
