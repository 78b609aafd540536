#include "gmk/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gmk/error.hpp"
#include "gmk/metrics.hpp"
#include "gmk/rng.hpp"

namespace gmk {

namespace {

using nn::Adam;
using nn::Param;

// Deterministic shuffled pass over the dataset, reshuffled every epoch.
class BatchStream {
 public:
  BatchStream(const Tensor& data, int batch, Rng rng)
      : data_(data), batch_(batch), rng_(rng) {
    require(data.rank() == 4 && data.dim(0) >= batch,
            ErrorKind::InvalidArgument,
            "training dataset smaller than one batch");
    indices_.resize(static_cast<size_t>(data.dim(0)));
    for (size_t i = 0; i < indices_.size(); ++i)
      indices_[i] = static_cast<int>(i);
    shuffle();
  }

  Tensor next() {
    int c = data_.dim(1), h = data_.dim(2), w = data_.dim(3);
    Tensor out({batch_, c, h, w});
    size_t stride = static_cast<size_t>(c) * h * w;
    for (int i = 0; i < batch_; ++i) {
      if (pos_ >= indices_.size()) {
        shuffle();
        pos_ = 0;
      }
      int src = indices_[pos_++];
      std::copy(data_.data() + src * stride, data_.data() + (src + 1) * stride,
                out.data() + i * stride);
    }
    return out;
  }

 private:
  void shuffle() {
    for (size_t i = indices_.size(); i > 1; --i) {
      size_t j = rng_.below(i);
      std::swap(indices_[i - 1], indices_[j]);
    }
  }

  const Tensor& data_;
  int batch_;
  Rng rng_;
  std::vector<int> indices_;
  size_t pos_ = 0;
};

Tensor sample_latents(int n, int d, Rng& rng) {
  Tensor z({n, d});
  for (size_t i = 0; i < z.size(); ++i)
    z[i] = static_cast<float>(rng.normal());
  return z;
}

void zero_grads(const std::vector<Param*>& params) {
  for (Param* p : params) p->zero_grad();
}

void log_row(std::ostringstream& log, int64_t step, double base, double lw,
             double ls, double total) {
  log << step << ',' << base << ',' << lw << ',' << ls << ',' << total << '\n';
}

int trigger_batch_size(const TrainConfig& cfg) {
  int n = static_cast<int>(
      std::lround(cfg.batch_size * cfg.objective.trigger_batch_ratio));
  return n < 1 ? 1 : n;
}

}  // namespace

TrainResult train_dcgan(const nn::GeneratorConfig& gen_cfg,
                        const nn::DiscriminatorConfig& disc_cfg,
                        const Tensor& dataset, const TrainConfig& cfg,
                        const ModelCheckpoint* init) {
  require(cfg.steps > 0 && cfg.batch_size > 0 && cfg.d_steps > 0,
          ErrorKind::InvalidArgument, "train_dcgan: bad configuration");
  require(dataset.rank() == 4 && dataset.dim(2) == gen_cfg.out_size(),
          ErrorKind::ShapeMismatch,
          "train_dcgan: dataset resolution does not match generator output");

  Rng root(cfg.seed);
  Rng init_rng = root.fork(0);
  Rng data_rng = root.fork(1);
  Rng z_rng = root.fork(2);

  nn::Generator gen("gen", gen_cfg, init_rng);
  nn::Discriminator disc("disc", disc_cfg, init_rng);
  if (init) {
    gen.read_state(*init);
    disc.read_state(*init);
  }
  const bool use_lw = cfg.objective.lambda > 0.0;
  const bool use_ls = cfg.objective.use_sign_loss;
  if (use_ls) {
    require(cfg.signature.target.length() > 0, ErrorKind::InvalidArgument,
            "train_dcgan: sign loss enabled without a signature");
    require(cfg.signature.target.length() <=
                static_cast<size_t>(gen.placement().total_capacity_bits()),
            ErrorKind::InvalidArgument,
            "train_dcgan: signature exceeds placement capacity");
    if (cfg.seed_signature_signs && !init)
      gen.seed_signature(cfg.signature.target);
  }

  BatchStream stream(dataset, cfg.batch_size, data_rng);
  Adam opt_g(cfg.lr, cfg.beta1, cfg.beta2);
  Adam opt_d(cfg.lr, cfg.beta1, cfg.beta2);
  std::vector<Param*> g_params = gen.params();
  std::vector<Param*> d_params = disc.params();

  auto snapshot = [&](int64_t step) {
    ModelCheckpoint ckpt;
    ckpt.meta.step = step;
    ckpt.meta.seed = cfg.seed;
    ckpt.meta.config_hash = cfg.config_hash;
    ckpt.meta.model_kind = "dcgan";
    ckpt.meta.placement = gen.placement();
    gen.write_state(ckpt);
    disc.write_state(ckpt);
    return ckpt;
  };

  TrainResult result;
  result.checkpoint = snapshot(0);
  std::ostringstream log;
  log << "step,base,lw,ls,total\n";

  for (int step = 1; step <= cfg.steps; ++step) {
    // --- discriminator updates
    for (int d = 0; d < cfg.d_steps; ++d) {
      zero_grads(d_params);
      Tensor real = stream.next();
      real *= 2.0f;
      real += Tensor::full(real.shape(), -1.0f);
      std::vector<float> s_real = disc.forward(real, true);
      std::vector<float> g_real(s_real.size(), 0.0f);
      double nr = static_cast<double>(s_real.size());
      for (size_t i = 0; i < s_real.size(); ++i)
        if (1.0 - s_real[i] > 0.0) g_real[i] = static_cast<float>(-1.0 / nr);
      disc.backward(g_real);

      Tensor z = sample_latents(cfg.batch_size, gen_cfg.latent_dim, z_rng);
      Tensor fake = gen.forward(z, true);
      std::vector<float> s_fake = disc.forward(fake, true);
      std::vector<float> g_fake(s_fake.size(), 0.0f);
      double nf = static_cast<double>(s_fake.size());
      for (size_t i = 0; i < s_fake.size(); ++i)
        if (1.0 + s_fake[i] > 0.0) g_fake[i] = static_cast<float>(1.0 / nf);
      disc.backward(g_fake);
      opt_d.step(d_params);
    }

    // --- generator update
    zero_grads(g_params);
    zero_grads(d_params);  // scratch: polluted below, re-zeroed next cycle
    Tensor z = sample_latents(cfg.batch_size, gen_cfg.latent_dim, z_rng);
    Tensor fake = gen.forward(z, true);
    std::vector<float> scores = disc.forward(fake, true);
    std::vector<float> gscore;
    double base = generator_hinge_loss(scores, &gscore);
    Tensor grad_fake = disc.backward(gscore);
    gen.backward(grad_fake);

    double lw = 0.0;
    if (use_lw) {
      Tensor zt =
          sample_latents(trigger_batch_size(cfg), gen_cfg.latent_dim, z_rng);
      Tensor xw = build_trigger_batch(zt, cfg.trigger);
      Tensor y = gen.forward(xw, true);
      Tensor y01 = to_unit_range(y, -1.0, 1.0);
      Tensor target = paste_watermark_batch(y01, cfg.watermark);
      ReconstructiveLoss rl = reconstructive_loss(y01, target, {}, true);
      lw = rl.loss;
      Tensor gy = rl.grad_gen;
      gy *= static_cast<float>(0.5 * cfg.objective.lambda);
      gen.backward(gy);
    }

    double ls = 0.0;
    if (use_ls) {
      SignLossResult slr = sign_loss(gen.gammas(), cfg.signature, true);
      ls = slr.loss;
      gen.add_gamma_grad(slr.grad);
    }

    double total;
    bool finite = std::isfinite(base) && std::isfinite(lw) && std::isfinite(ls);
    if (finite) {
      total = compose_objective(base, lw, ls, cfg.objective);
    } else {
      result.diverged = true;
      log_row(log, step, base, lw, ls,
              std::numeric_limits<double>::quiet_NaN());
      break;
    }
    opt_g.step(g_params);

    if (step % cfg.log_every == 0 || step == cfg.steps) {
      log_row(log, step, base, lw, ls, total);
      result.checkpoint = snapshot(step);
      result.completed_steps = step;
    }
  }
  if (!result.diverged) {
    result.checkpoint = snapshot(cfg.steps);
    result.completed_steps = cfg.steps;
  }
  result.log_csv = log.str();
  return result;
}

TrainResult train_vae(const nn::VaeConfig& vae_cfg, const Tensor& dataset,
                      const TrainConfig& cfg, const ModelCheckpoint* init) {
  require(cfg.steps > 0 && cfg.batch_size > 0, ErrorKind::InvalidArgument,
          "train_vae: bad configuration");
  require(dataset.rank() == 4 && dataset.dim(2) == vae_cfg.image_size,
          ErrorKind::ShapeMismatch,
          "train_vae: dataset resolution does not match the model");

  Rng root(cfg.seed);
  Rng init_rng = root.fork(0);
  Rng data_rng = root.fork(1);
  Rng eps_rng = root.fork(2);

  nn::Vae vae("vae", vae_cfg, init_rng);
  if (init) vae.read_state(*init);
  const bool use_lw = cfg.objective.lambda > 0.0;
  const bool use_ls = cfg.objective.use_sign_loss;
  if (use_lw)
    require(cfg.trigger.kind == TriggerSpec::Kind::Image,
            ErrorKind::InvalidArgument,
            "train_vae: VAE triggers are image-space");
  if (use_ls) {
    require(cfg.signature.target.length() <=
                static_cast<size_t>(
                    vae.decoder().placement().total_capacity_bits()),
            ErrorKind::InvalidArgument,
            "train_vae: signature exceeds placement capacity");
    if (cfg.seed_signature_signs && !init)
      vae.decoder().seed_signature(cfg.signature.target);
  }

  BatchStream stream(dataset, cfg.batch_size, data_rng);
  Adam opt(cfg.lr, cfg.beta1, cfg.beta2);
  std::vector<Param*> params = vae.params();
  int ld = vae_cfg.decoder.latent_dim;

  auto snapshot = [&](int64_t step) {
    ModelCheckpoint ckpt;
    ckpt.meta.step = step;
    ckpt.meta.seed = cfg.seed;
    ckpt.meta.config_hash = cfg.config_hash;
    ckpt.meta.model_kind = "vae";
    ckpt.meta.placement = vae.decoder().placement();
    vae.write_state(ckpt);
    return ckpt;
  };

  TrainResult result;
  result.checkpoint = snapshot(0);
  std::ostringstream log;
  log << "step,base,lw,ls,total\n";

  for (int step = 1; step <= cfg.steps; ++step) {
    zero_grads(params);
    Tensor batch = stream.next();
    Tensor eps = sample_latents(cfg.batch_size, ld, eps_rng);
    nn::VaeForward f = vae.forward(batch, eps, true);
    VaeElboResult elbo = vae_elbo_loss(batch, f.recon, f.mu, f.sigma, true);
    vae.backward(elbo.grad_recon, elbo.grad_mu, elbo.grad_sigma);
    double base = elbo.loss;

    double lw = 0.0;
    if (use_lw) {
      int tb = trigger_batch_size(cfg);
      Tensor tbatch = stream.next();
      Tensor xw = build_trigger_batch(tbatch, cfg.trigger);
      if (tb != cfg.batch_size) {
        // trigger batch ratio < 1: trim
        Tensor trimmed({tb, xw.dim(1), xw.dim(2), xw.dim(3)});
        std::copy(xw.data(), xw.data() + trimmed.size(), trimmed.data());
        xw = trimmed;
      }
      Tensor eps2 = sample_latents(xw.dim(0), ld, eps_rng);
      nn::VaeForward fw = vae.forward(xw, eps2, true);
      Tensor target = paste_watermark_batch(fw.recon, cfg.watermark);
      ReconstructiveLoss rl = reconstructive_loss(fw.recon, target, {}, true);
      lw = rl.loss;
      Tensor gr = rl.grad_gen;
      gr *= static_cast<float>(cfg.objective.lambda);
      Tensor zeros(fw.mu.shape());
      vae.backward(gr, zeros, zeros);
    }

    double ls = 0.0;
    if (use_ls) {
      SignLossResult slr =
          sign_loss(vae.decoder().gammas(), cfg.signature, true);
      ls = slr.loss;
      vae.decoder().add_gamma_grad(slr.grad);
    }

    bool finite = std::isfinite(base) && std::isfinite(lw) && std::isfinite(ls);
    if (!finite) {
      result.diverged = true;
      log_row(log, step, base, lw, ls,
              std::numeric_limits<double>::quiet_NaN());
      break;
    }
    double total = compose_objective(base, lw, ls, cfg.objective);
    opt.step(params);

    if (step % cfg.log_every == 0 || step == cfg.steps) {
      log_row(log, step, base, lw, ls, total);
      result.checkpoint = snapshot(step);
      result.completed_steps = step;
    }
  }
  if (!result.diverged) {
    result.checkpoint = snapshot(cfg.steps);
    result.completed_steps = cfg.steps;
  }
  result.log_csv = log.str();
  return result;
}

nn::Generator load_generator(const nn::GeneratorConfig& cfg,
                             const ModelCheckpoint& ckpt) {
  Rng rng(0);
  nn::Generator gen("gen", cfg, rng);
  gen.read_state(ckpt);
  return gen;
}

nn::Vae load_vae(const nn::VaeConfig& cfg, const ModelCheckpoint& ckpt) {
  Rng rng(0);
  nn::Vae vae("vae", cfg, rng);
  vae.read_state(ckpt);
  return vae;
}

}  // namespace gmk
