#include "tcd/denoiser.hpp"

#include <cmath>
#include <stdexcept>

namespace tcd {

namespace {

Tensor init_weight(std::vector<int> shape, int fan_in, Rng& rng) {
  Tensor w(std::move(shape));
  const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (double& v : w.data) v = scale * rng.normal();
  return w;
}

void add_linear(ParamSet& p, const std::string& name, int in, int out, Rng& rng) {
  p.add(name + ".w", init_weight({in, out}, in, rng));
  p.add(name + ".b", Tensor::zeros({out}));
}

void add_conv(ParamSet& p, const std::string& name, int k, int cin, int cout, Rng& rng) {
  p.add(name + ".w", init_weight({k * cin, cout}, k * cin, rng));
  p.add(name + ".b", Tensor::zeros({cout}));
}

struct Cursor {
  const std::vector<int>& ids;
  std::size_t pos = 0;
  int next() {
    if (pos >= ids.size()) throw std::logic_error("denoiser: parameter cursor exhausted");
    return ids[pos++];
  }
};

// conv + silu + embedding add + conv + silu, with residual shortcut.
int resblock(Tape& t, Cursor& cur, int h, int emb, int cin, int cout, int kernel) {
  const int c1w = cur.next(), c1b = cur.next();
  const int ew = cur.next(), eb = cur.next();
  const int c2w = cur.next(), c2b = cur.next();
  int a = t.silu(t.conv1d(h, c1w, c1b, kernel));
  a = t.add_rowvec(a, t.linear(emb, ew, eb));
  a = t.silu(t.conv1d(a, c2w, c2b, kernel));
  int shortcut = h;
  if (cin != cout) {
    const int sw = cur.next(), sb = cur.next();
    shortcut = t.linear(h, sw, sb);
  }
  return t.add(a, shortcut);
}

void add_resblock_params(ParamSet& p, const std::string& name, int cin, int cout, int k, int E, Rng& rng) {
  add_conv(p, name + ".c1", k, cin, cout, rng);
  add_linear(p, name + ".emb", E, cout, rng);
  add_conv(p, name + ".c2", k, cout, cout, rng);
  if (cin != cout) add_linear(p, name + ".sc", cin, cout, rng);
}

}  // namespace

ParamSet init_denoiser(const DenoiserConfig& cfg, Rng& rng) {
  if (cfg.levels < 1) throw std::invalid_argument("denoiser: levels must be >= 1");
  if (cfg.embed_dim % 2 != 0) throw std::invalid_argument("denoiser: embed_dim must be even");
  ParamSet p;
  const int E = cfg.embed_dim;
  add_linear(p, "time.l1", E, E, rng);
  add_linear(p, "time.l2", E, E, rng);
  add_linear(p, "cond.l1", cfg.cond_dim, E, rng);
  add_linear(p, "cond.l2", E, E, rng);
  add_conv(p, "in", cfg.kernel, cfg.d_s, cfg.width(0), rng);
  for (int i = 0; i < cfg.levels; ++i) {
    const int cin = i == 0 ? cfg.width(0) : cfg.width(i - 1);
    add_resblock_params(p, "down" + std::to_string(i), cin, cfg.width(i), cfg.kernel, E, rng);
    if (i + 1 < cfg.levels) add_conv(p, "down" + std::to_string(i) + ".dn", cfg.kernel, cfg.width(i), cfg.width(i), rng);
  }
  const int wlast = cfg.width(cfg.levels - 1);
  add_resblock_params(p, "mid", wlast, wlast, cfg.kernel, E, rng);
  for (int i = cfg.levels - 1; i >= 0; --i) {
    const int hcur = i == cfg.levels - 1 ? wlast : cfg.width(i + 1);
    add_resblock_params(p, "up" + std::to_string(i), hcur + cfg.width(i), cfg.width(i), cfg.kernel, E, rng);
  }
  add_conv(p, "out", cfg.kernel, cfg.width(0), cfg.d_s, rng);
  return p;
}

void check_denoiser_input(const DenoiserConfig& cfg, int L) {
  const int div = 1 << (cfg.levels - 1);
  if (L % div != 0)
    throw std::invalid_argument("denoiser: sequence length " + std::to_string(L) +
                                " not divisible by " + std::to_string(div));
  if (L / div < 1) throw std::invalid_argument("denoiser: sequence too short for level count");
}

Tensor sinusoidal_embedding(const std::vector<int>& k_steps, int dim) {
  const int B = static_cast<int>(k_steps.size());
  const int half = dim / 2;
  Tensor e({B, dim});
  for (int b = 0; b < B; ++b) {
    for (int i = 0; i < half; ++i) {
      const double freq =
          half > 1 ? std::exp(-std::log(10000.0) * static_cast<double>(i) / (half - 1)) : 1.0;
      const double x = static_cast<double>(k_steps[static_cast<std::size_t>(b)]) * freq;
      e.at(b, 2 * i) = std::sin(x);
      e.at(b, 2 * i + 1) = std::cos(x);
    }
  }
  return e;
}

int denoiser_forward(Tape& tape, const DenoiserConfig& cfg, const ParamSet& params,
                     const std::vector<int>& param_nodes, int x_noisy,
                     const std::vector<int>& k_steps, const Tensor& cond) {
  const Tensor& xv = tape.value(x_noisy);
  if (xv.ndim() != 3 || xv.dim(2) != cfg.d_s)
    throw std::invalid_argument("denoiser: input must be (B,L,d_s), got " + xv.shape_str());
  check_denoiser_input(cfg, xv.dim(1));
  if (static_cast<int>(k_steps.size()) != xv.dim(0))
    throw std::invalid_argument("denoiser: one diffusion step per batch row required");
  if (cond.ndim() != 2 || cond.dim(0) != xv.dim(0) || cond.dim(1) != cfg.cond_dim)
    throw std::invalid_argument("denoiser: condition must be (B,cond_dim), got " + cond.shape_str());
  if (param_nodes.size() != params.size())
    throw std::invalid_argument("denoiser: bound parameter nodes do not match parameter set");

  Cursor cur{param_nodes};
  Tape& t = tape;

  const int tw1 = cur.next(), tb1 = cur.next(), tw2 = cur.next(), tb2 = cur.next();
  const int cw1 = cur.next(), cb1 = cur.next(), cw2 = cur.next(), cb2 = cur.next();
  const int se = t.leaf(sinusoidal_embedding(k_steps, cfg.embed_dim));
  int temb = t.linear(t.silu(t.linear(se, tw1, tb1)), tw2, tb2);
  const int cleaf = t.leaf(cond);
  int cemb = t.linear(t.silu(t.linear(cleaf, cw1, cb1)), cw2, cb2);
  const int emb = t.silu(t.add(temb, cemb));

  const int inw = cur.next(), inb = cur.next();
  int h = t.conv1d(x_noisy, inw, inb, cfg.kernel);

  std::vector<int> skips(static_cast<std::size_t>(cfg.levels));
  for (int i = 0; i < cfg.levels; ++i) {
    const int cin = i == 0 ? cfg.width(0) : cfg.width(i - 1);
    h = resblock(t, cur, h, emb, cin, cfg.width(i), cfg.kernel);
    skips[static_cast<std::size_t>(i)] = h;
    if (i + 1 < cfg.levels) {
      const int dw = cur.next(), db = cur.next();
      h = t.conv1d(h, dw, db, cfg.kernel, 2);
    }
  }

  const int wlast = cfg.width(cfg.levels - 1);
  h = resblock(t, cur, h, emb, wlast, wlast, cfg.kernel);

  for (int i = cfg.levels - 1; i >= 0; --i) {
    const int hcur = i == cfg.levels - 1 ? wlast : cfg.width(i + 1);
    h = t.concat_last(h, skips[static_cast<std::size_t>(i)]);
    h = resblock(t, cur, h, emb, hcur + cfg.width(i), cfg.width(i), cfg.kernel);
    if (i > 0) h = t.upsample2(h);
  }

  const int ow = cur.next(), ob = cur.next();
  h = t.conv1d(h, ow, ob, cfg.kernel);
  if (cur.pos != param_nodes.size()) throw std::logic_error("denoiser: unused parameter blocks");
  return h;
}

Tensor denoiser_eval(const DenoiserConfig& cfg, const ParamSet& params, const Tensor& x_noisy,
                     const std::vector<int>& k_steps, const Tensor& cond) {
  Tape tape(false);
  const std::vector<int> ids = bind_params(tape, params, false);
  const int x = tape.leaf(x_noisy);
  const int out = denoiser_forward(tape, cfg, params, ids, x, k_steps, cond);
  return tape.value(out);
}

}  // namespace tcd
