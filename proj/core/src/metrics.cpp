#include "gmk/metrics.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <vector>

#include "gmk/error.hpp"
#include "gmk/rng.hpp"

namespace gmk {

namespace {

std::vector<double> gaussian_window(int size, double sigma) {
  std::vector<double> w(static_cast<size_t>(size) * size);
  double half = (size - 1) / 2.0;
  double sum = 0.0;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      double dy = y - half, dx = x - half;
      double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      w[static_cast<size_t>(y) * size + x] = v;
      sum += v;
    }
  }
  for (auto& v : w) v /= sum;
  return w;
}

void check_ssim_inputs(const Tensor& a, const Tensor& b, const SsimConfig& cfg) {
  require(a.same_shape(b), ErrorKind::ShapeMismatch, "ssim: shape mismatch");
  require(a.rank() == 3, ErrorKind::ShapeMismatch, "ssim: expected CHW images");
  require(cfg.window_size >= 3 && cfg.window_size % 2 == 1,
          ErrorKind::InvalidArgument, "ssim: window_size must be odd and >= 3");
  require(cfg.k1 > 0 && cfg.k2 > 0 && cfg.dynamic_range > 0,
          ErrorKind::InvalidArgument, "ssim: k1, k2, L must be positive");
  require(a.dim(1) >= cfg.window_size && a.dim(2) >= cfg.window_size,
          ErrorKind::InvalidArgument, "ssim: image smaller than window");
}

// Valid correlation of a HxW plane with a KxK window.
void correlate_valid(const double* img, int h, int w,
                     const std::vector<double>& win, int k, double* out) {
  int oh = h - k + 1, ow = w - k + 1;
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int ky = 0; ky < k; ++ky) {
        const double* row = img + (y + ky) * w + x;
        const double* wrow = win.data() + ky * k;
        for (int kx = 0; kx < k; ++kx) acc += row[kx] * wrow[kx];
      }
      out[y * ow + x] = acc;
    }
  }
}

// Adjoint of correlate_valid: scatter window-level gradients back to pixels.
void scatter_valid(const double* grad_out, int h, int w,
                   const std::vector<double>& win, int k, double* grad_img) {
  int oh = h - k + 1, ow = w - k + 1;
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double g = grad_out[y * ow + x];
      if (g == 0.0) continue;
      for (int ky = 0; ky < k; ++ky) {
        double* row = grad_img + (y + ky) * w + x;
        const double* wrow = win.data() + ky * k;
        for (int kx = 0; kx < k; ++kx) row[kx] += g * wrow[kx];
      }
    }
  }
}

double ssim_impl(const Tensor& a, const Tensor& b, Tensor* grad_a,
                 const SsimConfig& cfg) {
  check_ssim_inputs(a, b, cfg);
  int channels = a.dim(0), h = a.dim(1), w = a.dim(2);
  int k = cfg.window_size;
  int oh = h - k + 1, ow = w - k + 1;
  size_t plane = static_cast<size_t>(h) * w;
  size_t oplane = static_cast<size_t>(oh) * ow;
  auto win = gaussian_window(k, cfg.window_sigma);

  double c1 = cfg.k1 * cfg.dynamic_range * cfg.k1 * cfg.dynamic_range;
  double c2 = cfg.k2 * cfg.dynamic_range * cfg.k2 * cfg.dynamic_range;
  double n_total = static_cast<double>(channels) * static_cast<double>(oplane);

  if (grad_a) {
    *grad_a = Tensor(a.shape());
  }

  std::vector<double> x(plane), y(plane), xx(plane), xy(plane);
  std::vector<double> mu_x(oplane), mu_y(oplane), m_xx(oplane), m_xy(oplane),
      m_yy(oplane), yy(plane);
  std::vector<double> g_u1(oplane), g_u2(oplane), g_u3(oplane), gx(plane);

  double total = 0.0;
  for (int ch = 0; ch < channels; ++ch) {
    const float* pa = a.data() + static_cast<size_t>(ch) * plane;
    const float* pb = b.data() + static_cast<size_t>(ch) * plane;
    for (size_t i = 0; i < plane; ++i) {
      x[i] = pa[i];
      y[i] = pb[i];
      xx[i] = x[i] * x[i];
      xy[i] = x[i] * y[i];
      yy[i] = y[i] * y[i];
    }
    correlate_valid(x.data(), h, w, win, k, mu_x.data());
    correlate_valid(y.data(), h, w, win, k, mu_y.data());
    correlate_valid(xx.data(), h, w, win, k, m_xx.data());
    correlate_valid(xy.data(), h, w, win, k, m_xy.data());
    correlate_valid(yy.data(), h, w, win, k, m_yy.data());

    if (grad_a) {
      std::fill(g_u1.begin(), g_u1.end(), 0.0);
      std::fill(g_u2.begin(), g_u2.end(), 0.0);
      std::fill(g_u3.begin(), g_u3.end(), 0.0);
    }

    for (size_t i = 0; i < oplane; ++i) {
      double ux = mu_x[i], uy = mu_y[i];
      double sx = m_xx[i] - ux * ux;
      double sy = m_yy[i] - uy * uy;
      double sxy = m_xy[i] - ux * uy;
      double a1 = 2.0 * ux * uy + c1, b1 = ux * ux + uy * uy + c1;
      double a2 = 2.0 * sxy + c2, b2 = sx + sy + c2;
      double l = a1 / b1, cs = a2 / b2;
      total += l * cs;
      if (grad_a) {
        // u1 = mu_x, u2 = w*(x^2), u3 = w*(x*y); sx and sxy depend on u1
        double dl_dux = (2.0 * uy * b1 - a1 * 2.0 * ux) / (b1 * b1);
        double dcs_dsx = -a2 / (b2 * b2);
        double dcs_dsxy = 2.0 / b2;
        double dS_dux = cs * dl_dux;
        double dS_dsx = l * dcs_dsx;
        double dS_dsxy = l * dcs_dsxy;
        g_u1[i] = dS_dux + dS_dsx * (-2.0 * ux) + dS_dsxy * (-uy);
        g_u2[i] = dS_dsx;
        g_u3[i] = dS_dsxy;
      }
    }

    if (grad_a) {
      std::fill(gx.begin(), gx.end(), 0.0);
      scatter_valid(g_u1.data(), h, w, win, k, gx.data());
      // route u2 through 2x and u3 through y
      std::vector<double> tmp(plane, 0.0);
      scatter_valid(g_u2.data(), h, w, win, k, tmp.data());
      for (size_t i = 0; i < plane; ++i) gx[i] += tmp[i] * 2.0 * x[i];
      std::fill(tmp.begin(), tmp.end(), 0.0);
      scatter_valid(g_u3.data(), h, w, win, k, tmp.data());
      for (size_t i = 0; i < plane; ++i) gx[i] += tmp[i] * y[i];
      float* pg = grad_a->data() + static_cast<size_t>(ch) * plane;
      for (size_t i = 0; i < plane; ++i)
        pg[i] = static_cast<float>(gx[i] / n_total);
    }
  }
  return total / n_total;
}

}  // namespace

double ssim(const Tensor& a, const Tensor& b, const SsimConfig& cfg) {
  return ssim_impl(a, b, nullptr, cfg);
}

double ssim_with_grad(const Tensor& a, const Tensor& b, Tensor* grad_a,
                      const SsimConfig& cfg) {
  return ssim_impl(a, b, grad_a, cfg);
}

ReconstructiveLoss reconstructive_loss(const Tensor& gen, const Tensor& target,
                                       const SsimConfig& cfg, bool want_grad) {
  require(gen.same_shape(target), ErrorKind::ShapeMismatch,
          "reconstructive_loss: shape mismatch");
  require(gen.rank() == 4, ErrorKind::ShapeMismatch,
          "reconstructive_loss: expected [N,C,H,W] batches");
  int n = gen.dim(0);
  require(n > 0, ErrorKind::InvalidArgument, "reconstructive_loss: empty batch");
  size_t stride = gen.size() / static_cast<size_t>(n);
  std::vector<int> chw{gen.dim(1), gen.dim(2), gen.dim(3)};

  ReconstructiveLoss out;
  if (want_grad) out.grad_gen = Tensor(gen.shape());
  double mean_ssim = 0.0;
  Tensor ga(chw), gb(chw), grad_single;
  for (int s = 0; s < n; ++s) {
    std::copy(gen.data() + s * stride, gen.data() + (s + 1) * stride, ga.data());
    std::copy(target.data() + s * stride, target.data() + (s + 1) * stride,
              gb.data());
    double v = want_grad ? ssim_with_grad(ga, gb, &grad_single, cfg)
                         : ssim(ga, gb, cfg);
    mean_ssim += v;
    if (want_grad) {
      // d(1 - mean ssim)/d(gen_s) = -grad_single / n
      float* pg = out.grad_gen.data() + s * stride;
      for (size_t i = 0; i < stride; ++i)
        pg[i] = -grad_single[i] / static_cast<float>(n);
    }
  }
  mean_ssim /= n;
  out.loss = 1.0 - mean_ssim;
  return out;
}

double psnr(const Tensor& a, const Tensor& b, double peak) {
  require(a.same_shape(b), ErrorKind::ShapeMismatch, "psnr: shape mismatch");
  require(peak > 0, ErrorKind::InvalidArgument, "psnr: peak must be positive");
  double mse = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    double d = static_cast<double>(a[i]) - b[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

Tensor crop(const Tensor& image, const Region& r) {
  require(image.rank() == 3, ErrorKind::ShapeMismatch, "crop: expected CHW");
  require(r.row >= 0 && r.col >= 0 && r.row + r.h <= image.dim(1) &&
              r.col + r.w <= image.dim(2),
          ErrorKind::InvalidArgument, "crop: region out of bounds");
  int c = image.dim(0), H = image.dim(1), W = image.dim(2);
  Tensor out({c, r.h, r.w});
  for (int ch = 0; ch < c; ++ch)
    for (int y = 0; y < r.h; ++y)
      for (int x = 0; x < r.w; ++x)
        out[(static_cast<size_t>(ch) * r.h + y) * r.w + x] =
            image[(static_cast<size_t>(ch) * H + r.row + y) * W + r.col + x];
  return out;
}

QwmResult qwm(const Tensor& model_output_on_trigger, const Tensor& expected,
              const WatermarkAsset* asset, const SsimConfig& cfg,
              double threshold) {
  QwmResult r;
  r.threshold = threshold;
  r.full_image = ssim(model_output_on_trigger, expected, cfg);
  r.verdict = r.full_image >= threshold;
  if (asset && asset->paste_region.h >= cfg.window_size &&
      asset->paste_region.w >= cfg.window_size) {
    Tensor region = crop(model_output_on_trigger, asset->paste_region);
    r.region_only = ssim(region, asset->image, cfg);
  }
  return r;
}

double frechet_proxy(const Tensor& real_batch, const Tensor& gen_batch,
                     const FrechetProxyConfig& cfg) {
  require(cfg.feature_dim >= 2, ErrorKind::InvalidArgument,
          "frechet_proxy: feature_dim must be >= 2");
  require(real_batch.rank() == 4 && gen_batch.rank() == 4,
          ErrorKind::ShapeMismatch, "frechet_proxy: expected [N,C,H,W]");
  require(real_batch.size() / real_batch.dim(0) ==
              gen_batch.size() / gen_batch.dim(0),
          ErrorKind::ShapeMismatch, "frechet_proxy: sample shapes differ");
  int n1 = real_batch.dim(0), n2 = gen_batch.dim(0);
  require(n1 >= cfg.feature_dim + 1 && n2 >= cfg.feature_dim + 1,
          ErrorKind::InvalidArgument,
          "frechet_proxy: need at least feature_dim+1 samples per batch");

  size_t d_in = real_batch.size() / static_cast<size_t>(n1);
  int fd = cfg.feature_dim;

  // Seeded Gaussian projection, fixed for the lifetime of the config.
  Eigen::MatrixXd proj(fd, static_cast<Eigen::Index>(d_in));
  Rng rng(cfg.projection_seed);
  double scale = 1.0 / std::sqrt(static_cast<double>(d_in));
  for (int i = 0; i < fd; ++i)
    for (size_t j = 0; j < d_in; ++j)
      proj(i, static_cast<Eigen::Index>(j)) = rng.normal() * scale;

  auto features = [&](const Tensor& batch, int n) {
    Eigen::MatrixXd f(n, fd);
    Eigen::VectorXd xv(static_cast<Eigen::Index>(d_in));
    for (int s = 0; s < n; ++s) {
      const float* p = batch.data() + static_cast<size_t>(s) * d_in;
      for (size_t j = 0; j < d_in; ++j) xv(static_cast<Eigen::Index>(j)) = p[j];
      Eigen::VectorXd y = (proj * xv).cwiseMax(0.0);  // half-rectified
      f.row(s) = y.transpose();
    }
    return f;
  };

  Eigen::MatrixXd f1 = features(real_batch, n1);
  Eigen::MatrixXd f2 = features(gen_batch, n2);

  Eigen::VectorXd mu1 = f1.colwise().mean();
  Eigen::VectorXd mu2 = f2.colwise().mean();
  Eigen::MatrixXd c1 = (f1.rowwise() - mu1.transpose()).transpose() *
                       (f1.rowwise() - mu1.transpose()) / (n1 - 1);
  Eigen::MatrixXd c2 = (f2.rowwise() - mu2.transpose()).transpose() *
                       (f2.rowwise() - mu2.transpose()) / (n2 - 1);
  c1.diagonal().array() += cfg.eps;
  c2.diagonal().array() += cfg.eps;

  // tr((c1 c2)^(1/2)) = sum sqrt(eig(sqrt(c1) c2 sqrt(c1)))
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es1(c1);
  require(es1.info() == Eigen::Success, ErrorKind::NumericFailure,
          "frechet_proxy: eigendecomposition of first covariance failed");
  Eigen::VectorXd ev1 = es1.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXd s1 =
      es1.eigenvectors() * ev1.cwiseSqrt().asDiagonal() *
      es1.eigenvectors().transpose();
  Eigen::MatrixXd m = s1 * c2 * s1;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es2(m);
  require(es2.info() == Eigen::Success, ErrorKind::NumericFailure,
          "frechet_proxy: eigendecomposition of product failed");
  double tr_sqrt = es2.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();

  double dist = (mu1 - mu2).squaredNorm() + c1.trace() + c2.trace() -
                2.0 * tr_sqrt;
  require(std::isfinite(dist), ErrorKind::NumericFailure,
          "frechet_proxy: non-finite distance (trace sqrt " +
              std::to_string(tr_sqrt) + ")");
  return std::max(dist, 0.0);
}

Tensor to_unit_range(const Tensor& t, double lo, double hi) {
  require(hi > lo, ErrorKind::InvalidArgument, "to_unit_range: hi <= lo");
  Tensor out = t;
  float offset = static_cast<float>(-lo);
  float scale = static_cast<float>(1.0 / (hi - lo));
  for (size_t i = 0; i < out.size(); ++i) out[i] = (out[i] + offset) * scale;
  return out;
}

}  // namespace gmk
