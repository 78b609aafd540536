#include "gmk/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "gmk/error.hpp"
#include "gmk/metrics.hpp"
#include "gmk/rng.hpp"

namespace gmk {

namespace {

using nlohmann::json;

double blackbox_qwm(nn::Generator& gen, const OwnerBundle& bundle,
                    int n_queries, uint64_t seed) {
  QueryFn query = [&gen](const Tensor& z) {
    return to_unit_range(gen.forward(z, false), -1.0, 1.0);
  };
  BlackboxSection bb = verify_blackbox(query, bundle.trigger, bundle.watermark,
                                       n_queries, 0.75, seed);
  return bb.qwm_mean;
}

double fidelity_proxy(nn::Generator& gen, const Tensor& data, uint64_t seed) {
  int n = std::min(data.dim(0), 256);
  require(n >= 65, ErrorKind::InvalidArgument,
          "evaluate: too few reference images for the Frechet proxy");
  Rng rng(seed ^ 0x5eedf1de11723ULL);
  Tensor z({n, gen.config().latent_dim});
  for (size_t i = 0; i < z.size(); ++i)
    z[i] = static_cast<float>(rng.normal());
  Tensor gen01 = to_unit_range(gen.forward(z, false), -1.0, 1.0);
  Tensor sub({n, data.dim(1), data.dim(2), data.dim(3)});
  std::copy(data.data(), data.data() + sub.size(), sub.data());
  return frechet_proxy(sub, gen01);
}

json metrics_json(const AttackMetrics& m) {
  return json{{"fidelity_proxy", m.fidelity},
              {"qwm_mean", m.qwm_mean},
              {"ber", m.ber}};
}

}  // namespace

AttackMetrics evaluate_dcgan(const ModelCheckpoint& checkpoint,
                             const EvalContext& eval) {
  nn::Generator gen = load_generator(eval.gen_cfg, checkpoint);
  AttackMetrics m;
  m.qwm_mean = blackbox_qwm(gen, eval.owner, eval.n_queries, eval.seed);
  m.fidelity = fidelity_proxy(gen, eval.data, eval.seed);
  WhiteboxSection wb = verify_whitebox(checkpoint, eval.owner.signature);
  require(wb.error.empty(), ErrorKind::InvalidArgument,
          "evaluate: white-box extraction failed: " + wb.error);
  m.ber = wb.ber.ber;
  return m;
}

std::string AttackReport::to_json() const {
  json j;
  j["kind"] = kind;
  j["params"] = params;
  j["pre"] = metrics_json(pre);
  j["post"] = metrics_json(post);
  j["seed"] = seed;
  j["steps"] = steps;
  j["diverged"] = diverged;
  if (!variant.empty()) j["variant"] = variant;
  if (attacker_qwm_post) j["attacker_qwm_post"] = *attacker_qwm_post;
  return j.dump(2);
}

std::string AttackReport::csv_header() {
  return "kind,variant,steps,seed,pre_fidelity,pre_qwm,pre_ber,"
         "post_fidelity,post_qwm,post_ber,attacker_qwm\n";
}

std::string AttackReport::csv_row() const {
  std::ostringstream os;
  os << kind << ',' << variant << ',' << steps << ',' << seed << ','
     << pre.fidelity << ',' << pre.qwm_mean << ',' << pre.ber << ','
     << post.fidelity << ',' << post.qwm_mean << ',' << post.ber << ',';
  if (attacker_qwm_post) os << *attacker_qwm_post;
  os << '\n';
  return os.str();
}

AttackOutcome finetune_attack(const ModelCheckpoint& checkpoint,
                              const nn::DiscriminatorConfig& disc_cfg,
                              const Tensor& dataset, int steps, uint64_t seed,
                              const TrainConfig& base_train,
                              const EvalContext& eval) {
  require(steps >= 0, ErrorKind::InvalidArgument,
          "finetune_attack: negative step count");
  AttackOutcome out;
  out.report.kind = "finetune";
  out.report.seed = seed;
  out.report.steps = steps;
  out.report.pre = evaluate_dcgan(checkpoint, eval);
  if (steps == 0) {
    out.checkpoint = checkpoint;
    out.report.post = out.report.pre;
    return out;
  }
  TrainConfig cfg = base_train;
  cfg.steps = steps;
  cfg.seed = seed;
  cfg.objective.lambda = 0.0;
  cfg.objective.use_sign_loss = false;
  TrainResult tr = train_dcgan(eval.gen_cfg, disc_cfg, dataset, cfg,
                               &checkpoint);
  out.checkpoint = tr.checkpoint;
  out.log_csv = tr.log_csv;
  out.report.diverged = tr.diverged;
  out.report.post = evaluate_dcgan(out.checkpoint, eval);
  return out;
}

AttackOutcome overwrite_attack(const ModelCheckpoint& checkpoint,
                               const nn::DiscriminatorConfig& disc_cfg,
                               const Tensor& dataset,
                               const OwnerBundle& attacker,
                               bool attacker_sign_loss, int steps,
                               uint64_t seed, const TrainConfig& base_train,
                               const EvalContext& eval) {
  require(steps > 0, ErrorKind::InvalidArgument,
          "overwrite_attack: steps must be positive");
  require(attacker.trigger.to_json() != eval.owner.trigger.to_json(),
          ErrorKind::InvalidArgument,
          "overwrite_attack: attacker trigger equals the owner trigger");
  AttackOutcome out;
  out.report.kind = "overwrite";
  out.report.variant = attacker_sign_loss ? "with_attacker_sign_loss"
                                          : "without_attacker_sign_loss";
  out.report.seed = seed;
  out.report.steps = steps;
  out.report.pre = evaluate_dcgan(checkpoint, eval);

  TrainConfig cfg = base_train;
  cfg.steps = steps;
  cfg.seed = seed;
  cfg.trigger = attacker.trigger;
  cfg.watermark = attacker.watermark;
  require(cfg.objective.lambda > 0.0, ErrorKind::InvalidArgument,
          "overwrite_attack: embedding lambda must be positive");
  cfg.objective.use_sign_loss = attacker_sign_loss;
  cfg.signature = attacker.signature;
  TrainResult tr = train_dcgan(eval.gen_cfg, disc_cfg, dataset, cfg,
                               &checkpoint);
  out.checkpoint = tr.checkpoint;
  out.log_csv = tr.log_csv;
  out.report.diverged = tr.diverged;
  out.report.post = evaluate_dcgan(out.checkpoint, eval);
  nn::Generator gen = load_generator(eval.gen_cfg, out.checkpoint);
  out.report.attacker_qwm_post =
      blackbox_qwm(gen, attacker, eval.n_queries, eval.seed);
  return out;
}

AttackOutcome flip_signs_attack(const ModelCheckpoint& checkpoint, double p,
                                uint64_t seed, const EvalContext& eval) {
  require(p >= 0.0 && p <= 1.0, ErrorKind::InvalidArgument,
          "flip_signs_attack: fraction must be in [0,1]");
  size_t n_sig = eval.owner.signature.target.length();
  require(n_sig > 0, ErrorKind::InvalidArgument,
          "flip_signs_attack: owner signature is empty");
  const SignPlacement& placement = eval.owner.signature.placement;
  require(!placement.layer_names.empty(), ErrorKind::InvalidArgument,
          "flip_signs_attack: placement missing");

  AttackOutcome out;
  out.report.kind = "flip_signs";
  out.report.params["p"] = p;
  out.report.seed = seed;
  out.report.pre = evaluate_dcgan(checkpoint, eval);

  size_t count = static_cast<size_t>(std::floor(p * static_cast<double>(n_sig)));
  std::vector<size_t> idx(n_sig);
  for (size_t i = 0; i < n_sig; ++i) idx[i] = i;
  Rng rng(seed);
  for (size_t i = 0; i < count; ++i) {
    size_t j = i + rng.below(n_sig - i);
    std::swap(idx[i], idx[j]);
  }
  std::vector<uint8_t> flip(n_sig, 0);
  for (size_t i = 0; i < count; ++i) flip[idx[i]] = 1;

  out.checkpoint = checkpoint;
  size_t global = 0;
  for (size_t li = 0; li < placement.layer_names.size(); ++li) {
    std::string name = placement.layer_names[li] + ".gamma";
    require(out.checkpoint.has(name), ErrorKind::NotFound,
            "flip_signs_attack: checkpoint missing " + name);
    Tensor& g = out.checkpoint.get(name);
    for (size_t c = 0; c < g.size() && global < n_sig; ++c, ++global)
      if (flip[global]) g[c] = -g[c];
  }

  out.report.post = evaluate_dcgan(out.checkpoint, eval);
  return out;
}

std::string flip_sweep(const ModelCheckpoint& checkpoint,
                       const std::vector<double>& fractions,
                       const std::vector<uint64_t>& seeds,
                       const EvalContext& eval) {
  std::ostringstream os;
  os << "p,seed,fidelity_proxy,qwm_mean,ber\n";
  for (double p : fractions) {
    for (uint64_t s : seeds) {
      AttackOutcome a = flip_signs_attack(checkpoint, p, s, eval);
      os << p << ',' << s << ',' << a.report.post.fidelity << ','
         << a.report.post.qwm_mean << ',' << a.report.post.ber << '\n';
    }
  }
  return os.str();
}

std::vector<float> uchida_mean_kernel(const ModelCheckpoint& checkpoint,
                                      const std::string& tensor_name) {
  require(checkpoint.has(tensor_name), ErrorKind::NotFound,
          "uchida_mean_kernel: checkpoint missing " + tensor_name);
  const Tensor& w = checkpoint.get(tensor_name);
  require(w.rank() == 4, ErrorKind::ShapeMismatch,
          "uchida_mean_kernel: expected a 4-D conv weight");
  int out_c = w.dim(0);
  size_t kdim = w.size() / static_cast<size_t>(out_c);
  std::vector<float> mean(kdim, 0.0f);
  for (int oc = 0; oc < out_c; ++oc)
    for (size_t i = 0; i < kdim; ++i)
      mean[i] += w[static_cast<size_t>(oc) * kdim + i];
  for (float& v : mean) v /= static_cast<float>(out_c);
  return mean;
}

UchidaForgeResult uchida_forge(const std::vector<float>& wbar,
                               const std::vector<uint8_t>& forged_bits,
                               uint64_t seed, int budget_steps, double lr) {
  require(!wbar.empty() && !forged_bits.empty(), ErrorKind::InvalidArgument,
          "uchida_forge: empty inputs");
  Eigen::Index nb = static_cast<Eigen::Index>(forged_bits.size());
  Eigen::Index nd = static_cast<Eigen::Index>(wbar.size());
  Eigen::VectorXd w(nd);
  for (Eigen::Index i = 0; i < nd; ++i) w(i) = wbar[static_cast<size_t>(i)];
  double wn2 = w.squaredNorm();

  UchidaForgeResult res;
  Rng rng(seed);
  res.projection = Eigen::MatrixXd(nb, nd);
  for (Eigen::Index i = 0; i < nb; ++i)
    for (Eigen::Index j = 0; j < nd; ++j)
      res.projection(i, j) = 0.01 * rng.normal();

  if (wn2 <= 0.0) {
    // zero weights: every logit is stuck at 0, the forgery cannot move
    res.final_loss = std::log(2.0) * static_cast<double>(nb);
    res.success = false;
  } else {
    double step = lr / wn2;
    for (int it = 0; it < budget_steps; ++it) {
      Eigen::VectorXd logits = res.projection * w;
      double loss = 0.0;
      Eigen::VectorXd dlogits(nb);
      for (Eigen::Index i = 0; i < nb; ++i) {
        double t = forged_bits[static_cast<size_t>(i)] ? 1.0 : 0.0;
        double z = logits(i);
        loss += std::max(z, 0.0) - z * t + std::log1p(std::exp(-std::abs(z)));
        dlogits(i) = 1.0 / (1.0 + std::exp(-z)) - t;
      }
      res.final_loss = loss;
      if (loss < 1e-4) break;
      res.projection.noalias() -= step * (dlogits * w.transpose());
    }
  }

  // score the forgery exactly as extraction would
  Eigen::VectorXd logits = res.projection * w;
  res.ber.total = static_cast<size_t>(nb);
  for (Eigen::Index i = 0; i < nb; ++i) {
    double prob = 1.0 / (1.0 + std::exp(-logits(i)));
    uint8_t bit = prob >= 0.5 ? 1 : 0;
    if (bit != forged_bits[static_cast<size_t>(i)]) ++res.ber.mismatches;
  }
  res.ber.ber =
      static_cast<double>(res.ber.mismatches) / static_cast<double>(res.ber.total);
  res.success = res.ber.ber <= 0.01;
  return res;
}

}  // namespace gmk
