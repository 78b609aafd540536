#include "gmk/losses.hpp"

#include <cmath>

#include "gmk/error.hpp"
#include "gmk/rng.hpp"

namespace gmk {

SignLossResult sign_loss(const std::vector<float>& gammas,
                         const SignLossConfig& cfg, bool want_grad) {
  require(cfg.gamma0 > 0, ErrorKind::InvalidArgument,
          "sign_loss: gamma0 must be positive");
  require(gammas.size() >= cfg.target.length(), ErrorKind::InvalidArgument,
          "sign_loss: fewer scale factors (" + std::to_string(gammas.size()) +
              ") than signature bits (" + std::to_string(cfg.target.length()) +
              ")");
  SignLossResult r;
  if (want_grad) r.grad.assign(gammas.size(), 0.0f);
  for (size_t i = 0; i < cfg.target.length(); ++i) {
    double b = cfg.target.bits[i];
    double margin = cfg.gamma0 - static_cast<double>(gammas[i]) * b;
    if (margin > 0.0) {
      r.loss += margin;
      if (want_grad) r.grad[i] = static_cast<float>(-b);
    }
  }
  return r;
}

double compose_objective(double base, double lw, double ls,
                         const ObjectiveSpec& spec) {
  require(std::isfinite(base), ErrorKind::NumericFailure,
          "compose_objective: non-finite base loss");
  require(std::isfinite(lw), ErrorKind::NumericFailure,
          "compose_objective: non-finite reconstructive loss");
  require(std::isfinite(ls), ErrorKind::NumericFailure,
          "compose_objective: non-finite sign loss");
  require(spec.lambda >= 0, ErrorKind::InvalidArgument,
          "compose_objective: lambda must be >= 0");
  double total = base;
  if (spec.lambda != 0.0) total += spec.lambda * lw;
  if (spec.use_sign_loss) total += ls;
  return total;
}

double generator_hinge_loss(const std::vector<float>& d_scores_on_fake,
                            std::vector<float>* grad) {
  require(!d_scores_on_fake.empty(), ErrorKind::InvalidArgument,
          "generator_hinge_loss: empty batch");
  double n = static_cast<double>(d_scores_on_fake.size());
  double sum = 0.0;
  for (float s : d_scores_on_fake) sum += s;
  if (grad)
    grad->assign(d_scores_on_fake.size(), static_cast<float>(-1.0 / n));
  return -sum / n;
}

double discriminator_hinge_loss(const std::vector<float>& d_real,
                                const std::vector<float>& d_fake,
                                std::vector<float>* grad_real,
                                std::vector<float>* grad_fake) {
  require(!d_real.empty() && !d_fake.empty(), ErrorKind::InvalidArgument,
          "discriminator_hinge_loss: empty batch");
  double loss = 0.0;
  double nr = static_cast<double>(d_real.size());
  double nf = static_cast<double>(d_fake.size());
  if (grad_real) grad_real->assign(d_real.size(), 0.0f);
  if (grad_fake) grad_fake->assign(d_fake.size(), 0.0f);
  for (size_t i = 0; i < d_real.size(); ++i) {
    double m = 1.0 - d_real[i];
    if (m > 0.0) {
      loss += m / nr;
      if (grad_real) (*grad_real)[i] = static_cast<float>(-1.0 / nr);
    }
  }
  for (size_t i = 0; i < d_fake.size(); ++i) {
    double m = 1.0 + d_fake[i];
    if (m > 0.0) {
      loss += m / nf;
      if (grad_fake) (*grad_fake)[i] = static_cast<float>(1.0 / nf);
    }
  }
  return loss;
}

VaeElboResult vae_elbo_loss(const Tensor& x, const Tensor& recon,
                            const Tensor& mu, const Tensor& sigma,
                            bool want_grad) {
  require(x.same_shape(recon), ErrorKind::ShapeMismatch,
          "vae_elbo_loss: x/recon shape mismatch");
  require(mu.same_shape(sigma), ErrorKind::ShapeMismatch,
          "vae_elbo_loss: mu/sigma shape mismatch");
  require(x.rank() >= 1 && x.dim(0) > 0 && mu.dim(0) == x.dim(0),
          ErrorKind::ShapeMismatch, "vae_elbo_loss: batch dims disagree");
  for (size_t i = 0; i < sigma.size(); ++i)
    require(sigma[i] > 0.0f, ErrorKind::InvalidArgument,
            "vae_elbo_loss: sigma must be positive elementwise");

  int batch = x.dim(0);
  VaeElboResult r;
  if (want_grad) {
    r.grad_recon = Tensor(recon.shape());
    r.grad_mu = Tensor(mu.shape());
    r.grad_sigma = Tensor(sigma.shape());
  }

  double n_el = static_cast<double>(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    double d = static_cast<double>(recon[i]) - x[i];
    r.recon += d * d / n_el;
    if (want_grad) r.grad_recon[i] = static_cast<float>(2.0 * d / n_el);
  }

  double nb = static_cast<double>(batch);
  for (size_t i = 0; i < mu.size(); ++i) {
    double m = mu[i], s = sigma[i];
    r.kl += -0.5 * (1.0 + 2.0 * std::log(s) - m * m - s * s) / nb;
    if (want_grad) {
      r.grad_mu[i] = static_cast<float>(m / nb);
      r.grad_sigma[i] = static_cast<float>((s - 1.0 / s) / nb);
    }
  }

  r.loss = r.recon + r.kl;
  return r;
}

Eigen::MatrixXd uchida_projection(const UchidaSpec& spec, int weight_dim) {
  require(!spec.bits.empty(), ErrorKind::InvalidArgument,
          "uchida_projection: empty watermark");
  require(weight_dim > 0, ErrorKind::InvalidArgument,
          "uchida_projection: bad weight dim");
  Eigen::MatrixXd x(static_cast<Eigen::Index>(spec.bits.size()), weight_dim);
  Rng rng(spec.seed);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.normal();
  return x;
}

namespace {
Eigen::VectorXd logits_of(const std::vector<float>& wbar,
                          const Eigen::MatrixXd& projection) {
  require(projection.cols() == static_cast<Eigen::Index>(wbar.size()),
          ErrorKind::ShapeMismatch,
          "uchida: projection columns do not match weight dim");
  Eigen::VectorXd w(static_cast<Eigen::Index>(wbar.size()));
  for (size_t i = 0; i < wbar.size(); ++i)
    w(static_cast<Eigen::Index>(i)) = wbar[i];
  return projection * w;
}
}  // namespace

double uchida_embed_loss(const std::vector<float>& wbar, const UchidaSpec& spec,
                         const Eigen::MatrixXd& projection,
                         std::vector<float>* grad) {
  require(projection.rows() == static_cast<Eigen::Index>(spec.bits.size()),
          ErrorKind::ShapeMismatch,
          "uchida_embed_loss: projection rows do not match bit count");
  Eigen::VectorXd logits = logits_of(wbar, projection);
  double loss = 0.0;
  Eigen::VectorXd dlogits(logits.size());
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    double t = spec.bits[static_cast<size_t>(i)] ? 1.0 : 0.0;
    double z = logits(i);
    // numerically stable BCE-with-logits
    loss += std::max(z, 0.0) - z * t + std::log1p(std::exp(-std::abs(z)));
    double p = 1.0 / (1.0 + std::exp(-z));
    dlogits(i) = (p - t);
  }
  loss *= spec.strength;
  if (grad) {
    Eigen::VectorXd g = spec.strength * (projection.transpose() * dlogits);
    grad->resize(wbar.size());
    for (size_t i = 0; i < wbar.size(); ++i)
      (*grad)[i] = static_cast<float>(g(static_cast<Eigen::Index>(i)));
  }
  return loss;
}

std::vector<uint8_t> uchida_extract(const std::vector<float>& wbar,
                                    const Eigen::MatrixXd& projection,
                                    double threshold) {
  Eigen::VectorXd logits = logits_of(wbar, projection);
  std::vector<uint8_t> bits(static_cast<size_t>(logits.size()));
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    double p = 1.0 / (1.0 + std::exp(-logits(i)));
    bits[static_cast<size_t>(i)] = p >= threshold ? 1 : 0;
  }
  return bits;
}

}  // namespace gmk
