#include "gmk/nn/models.hpp"

#include <cmath>
#include <cstring>

#include "gmk/error.hpp"

namespace gmk::nn {

namespace {

Tensor reshaped(const Tensor& t, std::vector<int> shape) {
  require(shape_numel(shape) == t.size(), ErrorKind::ShapeMismatch,
          "reshape: element count mismatch");
  Tensor out(std::move(shape));
  std::memcpy(out.data(), t.data(), sizeof(float) * t.size());
  return out;
}

int same_pad(int k) { return (k - 1) / 2; }

}  // namespace

void write_params(ModelCheckpoint& ckpt, const std::vector<Param*>& params) {
  for (const Param* p : params) ckpt.put(p->name, p->value);
}

void read_params(const ModelCheckpoint& ckpt,
                 const std::vector<Param*>& params) {
  for (Param* p : params) {
    require(ckpt.has(p->name), ErrorKind::NotFound,
            "checkpoint is missing tensor " + p->name);
    const Tensor& t = ckpt.get(p->name);
    require(t.same_shape(p->value), ErrorKind::ShapeMismatch,
            "checkpoint tensor " + p->name + " has unexpected shape");
    p->value = t;
  }
}

// ---------------------------------------------------------------------------
// Generator

Generator::Generator(std::string prefix, const GeneratorConfig& cfg,
                     Rng& init_rng)
    : prefix_(std::move(prefix)), cfg_(cfg) {
  require(!cfg_.widths.empty(), ErrorKind::InvalidArgument,
          "Generator: widths must be non-empty");
  require(cfg_.latent_dim > 0 && cfg_.base_map > 0 && cfg_.out_channels > 0,
          ErrorKind::InvalidArgument, "Generator: bad configuration");
  fc_channels_ = 2 * cfg_.widths[0];
  fc_ = std::make_unique<Dense>(prefix_ + ".fc", cfg_.latent_dim,
                                cfg_.base_map * cfg_.base_map * fc_channels_,
                                false, init_rng);
  bn0_ = std::make_unique<BatchNorm2d>(prefix_ + ".bn0", fc_channels_,
                                       init_rng);
  int in_c = fc_channels_;
  for (size_t i = 0; i < cfg_.widths.size(); ++i) {
    std::string idx = std::to_string(i + 1);
    deconvs_.push_back(std::make_unique<Deconv2d>(
        prefix_ + ".deconv" + idx, in_c, cfg_.widths[i], 4, 2, 1, init_rng));
    bns_.push_back(std::make_unique<BatchNorm2d>(prefix_ + ".bn" + idx,
                                                 cfg_.widths[i], init_rng));
    relus_.emplace_back();
    in_c = cfg_.widths[i];
  }
  head_ = std::make_unique<Conv2d>(prefix_ + ".head", in_c, cfg_.out_channels,
                                   3, 1, 1, false, init_rng);
}

Tensor Generator::forward(const Tensor& z, bool train) {
  require(z.rank() == 2 && z.dim(1) == cfg_.latent_dim,
          ErrorKind::ShapeMismatch, prefix_ + ": bad latent shape");
  int n = z.dim(0);
  Tensor h = fc_->forward(z, train);
  h = reshaped(h, {n, fc_channels_, cfg_.base_map, cfg_.base_map});
  h = bn0_->forward(h, train);
  h = relu0_.forward(h);
  for (size_t i = 0; i < deconvs_.size(); ++i) {
    h = deconvs_[i]->forward(h, train);
    h = bns_[i]->forward(h, train);
    h = relus_[i].forward(h);
  }
  h = head_->forward(h, train);
  return cfg_.sigmoid_head ? sigmoid_.forward(h) : tanh_.forward(h);
}

Tensor Generator::backward(const Tensor& grad_out) {
  Tensor g = cfg_.sigmoid_head ? sigmoid_.backward(grad_out)
                               : tanh_.backward(grad_out);
  g = head_->backward(g);
  for (size_t i = deconvs_.size(); i-- > 0;) {
    g = relus_[i].backward(g);
    g = bns_[i]->backward(g);
    g = deconvs_[i]->backward(g);
  }
  g = relu0_.backward(g);
  g = bn0_->backward(g);
  g = reshaped(g, {g.dim(0), fc_channels_ * cfg_.base_map * cfg_.base_map});
  return fc_->backward(g);
}

std::vector<Param*> Generator::params() {
  std::vector<Param*> out;
  for (Param* p : fc_->params()) out.push_back(p);
  for (Param* p : bn0_->params()) out.push_back(p);
  for (size_t i = 0; i < deconvs_.size(); ++i) {
    for (Param* p : deconvs_[i]->params()) out.push_back(p);
    for (Param* p : bns_[i]->params()) out.push_back(p);
  }
  for (Param* p : head_->params()) out.push_back(p);
  return out;
}

std::vector<Param*> Generator::buffers() {
  std::vector<Param*> out;
  for (Param* p : bn0_->buffers()) out.push_back(p);
  for (auto& bn : bns_)
    for (Param* p : bn->buffers()) out.push_back(p);
  return out;
}

SignPlacement Generator::placement() const {
  SignPlacement p;
  for (auto& bn : bns_) {
    p.layer_names.push_back(bn->name());
    p.channel_counts.push_back(bn->channels());
  }
  return p;
}

std::vector<float> Generator::gammas() const {
  std::vector<float> out;
  for (auto& bn : bns_) {
    const Tensor& g = const_cast<BatchNorm2d&>(*bn).gamma().value;
    out.insert(out.end(), g.data(), g.data() + g.size());
  }
  return out;
}

void Generator::add_gamma_grad(const std::vector<float>& g) {
  size_t off = 0;
  for (auto& bn : bns_) {
    Param& gamma = bn->gamma();
    if (gamma.grad.size() != gamma.value.size()) gamma.zero_grad();
    for (size_t i = 0; i < gamma.value.size(); ++i, ++off) {
      require(off < g.size(), ErrorKind::ShapeMismatch,
              "add_gamma_grad: gradient shorter than capacity");
      gamma.grad[i] += g[off];
    }
  }
  require(off == g.size(), ErrorKind::ShapeMismatch,
          "add_gamma_grad: gradient longer than capacity");
}

void Generator::set_gammas(const std::vector<float>& g) {
  require(g.size() == static_cast<size_t>(placement().total_capacity_bits()),
          ErrorKind::ShapeMismatch, "set_gammas: wrong length");
  size_t off = 0;
  for (auto& bn : bns_) {
    Param& gamma = bn->gamma();
    for (size_t i = 0; i < gamma.value.size(); ++i, ++off)
      gamma.value[i] = g[off];
  }
}

void Generator::seed_signature(const BitSignature& sig) {
  std::vector<float> g = gammas();
  require(sig.length() <= g.size(), ErrorKind::InvalidArgument,
          "seed_signature: signature exceeds capacity");
  for (size_t i = 0; i < sig.length(); ++i) {
    require(sig.bits[i] == 1 || sig.bits[i] == -1, ErrorKind::InvalidArgument,
            "seed_signature: signature has erasures");
    g[i] = static_cast<float>(sig.bits[i]) * std::fabs(g[i]);
    if (g[i] == 0.0f) g[i] = 0.5f * static_cast<float>(sig.bits[i]);
  }
  set_gammas(g);
}

void Generator::write_state(ModelCheckpoint& ckpt) {
  write_params(ckpt, params());
  write_params(ckpt, buffers());
}

void Generator::read_state(const ModelCheckpoint& ckpt) {
  read_params(ckpt, params());
  read_params(ckpt, buffers());
}

// ---------------------------------------------------------------------------
// Discriminator

Discriminator::Discriminator(std::string prefix,
                             const DiscriminatorConfig& cfg, Rng& init_rng)
    : prefix_(std::move(prefix)), cfg_(cfg) {
  require(!cfg_.convs.empty(), ErrorKind::InvalidArgument,
          "Discriminator: convs must be non-empty");
  int in_c = cfg_.in_channels;
  int h = cfg_.image_size;
  for (size_t i = 0; i < cfg_.convs.size(); ++i) {
    const ConvSpec& s = cfg_.convs[i];
    convs_.push_back(std::make_unique<Conv2d>(
        prefix_ + ".conv" + std::to_string(i + 1), in_c, s.width, s.k,
        s.stride, same_pad(s.k), cfg_.spectral_norm, init_rng));
    acts_.emplace_back(cfg_.leaky_slope);
    h = convs_.back()->out_h(h);
    require(h > 0, ErrorKind::InvalidArgument,
            "Discriminator: feature map collapsed to zero");
    in_c = s.width;
  }
  feat_dim_ = in_c * h * h;
  fc_ = std::make_unique<Dense>(prefix_ + ".fc", feat_dim_, 1,
                                cfg_.spectral_norm, init_rng);
}

std::vector<float> Discriminator::forward(const Tensor& x, bool train) {
  require(x.rank() == 4 && x.dim(1) == cfg_.in_channels &&
              x.dim(2) == cfg_.image_size && x.dim(3) == cfg_.image_size,
          ErrorKind::ShapeMismatch, prefix_ + ": bad input shape");
  last_n_ = x.dim(0);
  Tensor h = x;
  for (size_t i = 0; i < convs_.size(); ++i) {
    h = convs_[i]->forward(h, train);
    h = acts_[i].forward(h);
  }
  h = reshaped(h, {last_n_, feat_dim_});
  Tensor scores = fc_->forward(h, train);
  std::vector<float> out(static_cast<size_t>(last_n_));
  for (int i = 0; i < last_n_; ++i) out[static_cast<size_t>(i)] = scores[static_cast<size_t>(i)];
  return out;
}

Tensor Discriminator::backward(const std::vector<float>& grad_scores) {
  require(grad_scores.size() == static_cast<size_t>(last_n_),
          ErrorKind::ShapeMismatch, prefix_ + ": bad score-grad length");
  Tensor gs({last_n_, 1});
  for (int i = 0; i < last_n_; ++i) gs[static_cast<size_t>(i)] = grad_scores[static_cast<size_t>(i)];
  Tensor g = fc_->backward(gs);
  int h = cfg_.image_size;
  for (const ConvSpec& s : cfg_.convs) h = (h + 2 * same_pad(s.k) - s.k) / s.stride + 1;
  g = reshaped(g, {last_n_, cfg_.convs.back().width, h, h});
  for (size_t i = convs_.size(); i-- > 0;) {
    g = acts_[i].backward(g);
    g = convs_[i]->backward(g);
  }
  return g;
}

std::vector<Param*> Discriminator::params() {
  std::vector<Param*> out;
  for (auto& c : convs_)
    for (Param* p : c->params()) out.push_back(p);
  for (Param* p : fc_->params()) out.push_back(p);
  return out;
}

std::vector<Param*> Discriminator::buffers() {
  std::vector<Param*> out;
  for (auto& c : convs_)
    for (Param* p : c->buffers()) out.push_back(p);
  for (Param* p : fc_->buffers()) out.push_back(p);
  return out;
}

void Discriminator::write_state(ModelCheckpoint& ckpt) {
  write_params(ckpt, params());
  write_params(ckpt, buffers());
}

void Discriminator::read_state(const ModelCheckpoint& ckpt) {
  read_params(ckpt, params());
  read_params(ckpt, buffers());
}

// ---------------------------------------------------------------------------
// Vae

Vae::Vae(std::string prefix, const VaeConfig& cfg, Rng& init_rng)
    : prefix_(std::move(prefix)), cfg_(cfg) {
  require(!cfg_.enc_convs.empty(), ErrorKind::InvalidArgument,
          "Vae: encoder convs must be non-empty");
  cfg_.decoder.sigmoid_head = true;
  cfg_.decoder.out_channels = cfg_.in_channels;
  require(cfg_.decoder.out_size() == cfg_.image_size,
          ErrorKind::InvalidArgument,
          "Vae: decoder output size does not match image size");

  int in_c = cfg_.in_channels;
  int h = cfg_.image_size;
  for (size_t i = 0; i < cfg_.enc_convs.size(); ++i) {
    const ConvSpec& s = cfg_.enc_convs[i];
    enc_convs_.push_back(std::make_unique<Conv2d>(
        prefix_ + ".enc.conv" + std::to_string(i + 1), in_c, s.width, s.k,
        s.stride, same_pad(s.k), false, init_rng));
    enc_acts_.emplace_back(cfg_.leaky_slope);
    h = enc_convs_.back()->out_h(h);
    require(h > 0, ErrorKind::InvalidArgument,
            "Vae: encoder feature map collapsed to zero");
    in_c = s.width;
  }
  feat_dim_ = in_c * h * h;
  int ld = cfg_.decoder.latent_dim;
  fc_mu_ = std::make_unique<Dense>(prefix_ + ".enc.fc_mu", feat_dim_, ld,
                                   false, init_rng);
  fc_logvar_ = std::make_unique<Dense>(prefix_ + ".enc.fc_logvar", feat_dim_,
                                       ld, false, init_rng);
  dec_ = std::make_unique<Generator>(prefix_ + ".dec", cfg_.decoder, init_rng);
}

VaeForward Vae::forward(const Tensor& x, const Tensor& eps, bool train) {
  require(x.rank() == 4 && x.dim(1) == cfg_.in_channels &&
              x.dim(2) == cfg_.image_size && x.dim(3) == cfg_.image_size,
          ErrorKind::ShapeMismatch, prefix_ + ": bad input shape");
  last_n_ = x.dim(0);
  require(eps.rank() == 2 && eps.dim(0) == last_n_ &&
              eps.dim(1) == cfg_.decoder.latent_dim,
          ErrorKind::ShapeMismatch, prefix_ + ": bad eps shape");
  eps_ = eps;

  Tensor h = x;
  for (size_t i = 0; i < enc_convs_.size(); ++i) {
    h = enc_convs_[i]->forward(h, train);
    h = enc_acts_[i].forward(h);
  }
  enc_feat_ = reshaped(h, {last_n_, feat_dim_});

  VaeForward out;
  out.mu = fc_mu_->forward(enc_feat_, train);
  Tensor logvar = fc_logvar_->forward(enc_feat_, train);
  out.sigma = Tensor(logvar.shape());
  for (size_t i = 0; i < logvar.size(); ++i) {
    float half = 0.5f * logvar[i];
    // keep sigma strictly positive and finite
    if (half < -20.0f) half = -20.0f;
    if (half > 20.0f) half = 20.0f;
    out.sigma[i] = std::exp(half);
  }
  sigma_ = out.sigma;

  Tensor z(out.mu.shape());
  for (size_t i = 0; i < z.size(); ++i)
    z[i] = out.mu[i] + out.sigma[i] * eps_[i];
  out.recon = dec_->forward(z, train);
  return out;
}

Tensor Vae::decode(const Tensor& z, bool train) {
  return dec_->forward(z, train);
}

void Vae::backward(const Tensor& grad_recon, const Tensor& grad_mu,
                   const Tensor& grad_sigma) {
  Tensor gz = dec_->backward(grad_recon);
  require(gz.same_shape(grad_mu) && gz.same_shape(grad_sigma),
          ErrorKind::ShapeMismatch, prefix_ + ": bad objective grad shapes");

  Tensor gmu(gz.shape());
  Tensor glogvar(gz.shape());
  for (size_t i = 0; i < gz.size(); ++i) {
    gmu[i] = gz[i] + grad_mu[i];
    float gsig = gz[i] * eps_[i] + grad_sigma[i];
    glogvar[i] = 0.5f * gsig * sigma_[i];
  }

  Tensor gfeat = fc_mu_->backward(gmu);
  gfeat += fc_logvar_->backward(glogvar);

  int h = cfg_.image_size;
  for (const ConvSpec& s : cfg_.enc_convs)
    h = (h + 2 * same_pad(s.k) - s.k) / s.stride + 1;
  Tensor g = reshaped(gfeat, {last_n_, cfg_.enc_convs.back().width, h, h});
  for (size_t i = enc_convs_.size(); i-- > 0;) {
    g = enc_acts_[i].backward(g);
    g = enc_convs_[i]->backward(g);
  }
}

std::vector<Param*> Vae::params() {
  std::vector<Param*> out;
  for (auto& c : enc_convs_)
    for (Param* p : c->params()) out.push_back(p);
  for (Param* p : fc_mu_->params()) out.push_back(p);
  for (Param* p : fc_logvar_->params()) out.push_back(p);
  for (Param* p : dec_->params()) out.push_back(p);
  return out;
}

std::vector<Param*> Vae::buffers() { return dec_->buffers(); }

void Vae::write_state(ModelCheckpoint& ckpt) {
  write_params(ckpt, params());
  write_params(ckpt, buffers());
}

void Vae::read_state(const ModelCheckpoint& ckpt) {
  read_params(ckpt, params());
  read_params(ckpt, buffers());
}

}  // namespace gmk::nn
