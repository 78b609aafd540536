#include "gmk/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "gmk/error.hpp"
#include "gmk/hash.hpp"
#include "gmk/metrics.hpp"

namespace gmk {

namespace fs = std::filesystem;

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& path, const std::string& msg) {
  throw Error(ErrorKind::BadFormat, "config: " + path + " " + msg);
}

const json* child(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double num_at(const json& j, const char* key, const std::string& path,
              double fallback) {
  const json* c = child(j, key);
  if (!c) return fallback;
  if (!c->is_number()) bad(path, "must be a number");
  return c->get<double>();
}

int int_at(const json& j, const char* key, const std::string& path,
           int fallback) {
  const json* c = child(j, key);
  if (!c) return fallback;
  if (!c->is_number_integer()) bad(path, "must be an integer");
  return c->get<int>();
}

uint64_t seed_at(const json& j, const char* key, const std::string& path,
                 uint64_t fallback) {
  const json* c = child(j, key);
  if (!c) return fallback;
  if (!c->is_number_integer() || c->get<int64_t>() < 0)
    bad(path, "must be a non-negative integer");
  return c->get<uint64_t>();
}

bool bool_at(const json& j, const char* key, const std::string& path,
             bool fallback) {
  const json* c = child(j, key);
  if (!c) return fallback;
  if (!c->is_boolean()) bad(path, "must be a boolean");
  return c->get<bool>();
}

std::string str_at(const json& j, const char* key, const std::string& path,
                   const std::string& fallback) {
  const json* c = child(j, key);
  if (!c) return fallback;
  if (!c->is_string()) bad(path, "must be a string");
  return c->get<std::string>();
}

Region region_at(const json& j, const char* key, const std::string& path,
                 Region fallback) {
  const json* c = child(j, key);
  if (!c) return fallback;
  if (!c->is_array() || c->size() != 4) bad(path, "must be [row,col,h,w]");
  Region r;
  int* f[4] = {&r.row, &r.col, &r.h, &r.w};
  for (size_t i = 0; i < 4; ++i) {
    if (!(*c)[i].is_number_integer()) bad(path, "must hold integers");
    *f[i] = (*c)[i].get<int>();
  }
  if (r.row < 0 || r.col < 0 || r.h <= 0 || r.w <= 0)
    bad(path, "must describe a non-empty region");
  return r;
}

std::vector<nn::ConvSpec> convs_at(const json& j, const char* key,
                                   const std::string& path,
                                   std::vector<nn::ConvSpec> fallback) {
  const json* c = child(j, key);
  if (!c) return fallback;
  if (!c->is_array() || c->empty()) bad(path, "must be a non-empty array");
  std::vector<nn::ConvSpec> out;
  for (size_t i = 0; i < c->size(); ++i) {
    const json& e = (*c)[i];
    std::string ep = path + "[" + std::to_string(i) + "]";
    if (!e.is_array() || e.size() != 3) bad(ep, "must be [k,stride,width]");
    nn::ConvSpec s;
    s.k = e[0].get<int>();
    s.stride = e[1].get<int>();
    s.width = e[2].get<int>();
    if (s.k <= 0 || s.stride <= 0 || s.width <= 0)
      bad(ep, "entries must be positive");
    out.push_back(s);
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  require(f.good(), ErrorKind::Io, "cannot write " + path);
  f << text;
  require(f.good(), ErrorKind::Io, "write failed: " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(f.good(), ErrorKind::Io, "cannot read " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

std::string variant_label(const ExperimentConfig& cfg) {
  std::string base = cfg.model_kind;
  if (cfg.train.objective.lambda > 0.0 && cfg.train.objective.use_sign_loss)
    return base + "_ws";
  if (cfg.train.objective.lambda > 0.0) return base + "_w";
  return base;
}

AttackMetrics evaluate_vae(const ExperimentConfig& cfg,
                           const ModelCheckpoint& ckpt, const Tensor& data) {
  nn::VaeConfig vc;
  vc.enc_convs = cfg.vae_enc_convs;
  vc.image_size = cfg.generator.out_size();
  vc.decoder = cfg.generator;
  auto vae = std::make_shared<nn::Vae>(load_vae(vc, ckpt));
  QueryFn query = [vae](const Tensor& x) {
    Tensor eps({x.dim(0), vae->config().decoder.latent_dim});
    return vae->forward(x, eps, false).recon;
  };
  OwnerBundle owner = owner_bundle(cfg);
  AttackMetrics m;
  BlackboxSection bb =
      verify_blackbox(query, owner.trigger, owner.watermark, cfg.verify_queries,
                      cfg.verify_threshold, cfg.train.seed + 101,
                      cfg.histogram_bins, &data);
  m.qwm_mean = bb.qwm_mean;
  int n = std::min(data.dim(0), 256);
  Tensor sub({n, data.dim(1), data.dim(2), data.dim(3)});
  std::copy(data.data(), data.data() + sub.size(), sub.data());
  Tensor eps({n, vc.decoder.latent_dim});
  Tensor recon = vae->forward(sub, eps, false).recon;
  m.fidelity = frechet_proxy(sub, recon);
  WhiteboxSection wb = verify_whitebox(ckpt, owner.signature);
  require(wb.error.empty(), ErrorKind::InvalidArgument,
          "evaluate: white-box extraction failed: " + wb.error);
  m.ber = wb.ber.ber;
  return m;
}

AttackMetrics evaluate_any(const ExperimentConfig& cfg,
                           const ModelCheckpoint& ckpt, const Tensor& data) {
  if (cfg.model_kind == "vae") return evaluate_vae(cfg, ckpt, data);
  return evaluate_dcgan(ckpt, eval_context(cfg, data));
}

std::string metrics_csv(const std::string& variant, const AttackMetrics& m) {
  std::ostringstream os;
  os << "variant,fidelity_proxy,qwm_mean,ber\n"
     << variant << ',' << m.fidelity << ',' << m.qwm_mean << ',' << m.ber
     << '\n';
  return os.str();
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json j = json::parse(json_text, nullptr, false);
  if (j.is_discarded())
    throw Error(ErrorKind::BadFormat, "config: not valid JSON");
  if (!j.is_object()) throw Error(ErrorKind::BadFormat, "config: not an object");

  ExperimentConfig cfg;
  cfg.raw_json = json_text;
  {
    // Hash the experiment semantics, not the output location: the same
    // config run into two directories must yield byte-identical checkpoints.
    nlohmann::json semantic = j;
    semantic.erase("out_dir");
    cfg.config_hash = sha256_hex(semantic.dump());
  }

  cfg.model_kind = str_at(j, "model", "model", cfg.model_kind);
  if (cfg.model_kind != "dcgan" && cfg.model_kind != "vae")
    bad("model", "must be \"dcgan\" or \"vae\"");
  cfg.out_dir = str_at(j, "out_dir", "out_dir", cfg.out_dir);

  if (const json* d = child(j, "dataset")) {
    cfg.dataset.kind = str_at(*d, "kind", "dataset.kind", cfg.dataset.kind);
    if (cfg.dataset.kind == "shapes") {
      cfg.dataset.shapes.resolution = int_at(*d, "resolution",
                                             "dataset.resolution",
                                             cfg.dataset.shapes.resolution);
      if (cfg.dataset.shapes.resolution < 8)
        bad("dataset.resolution", "must be >= 8");
      cfg.dataset.shapes.n_samples =
          int_at(*d, "n_samples", "dataset.n_samples",
                 cfg.dataset.shapes.n_samples);
      if (cfg.dataset.shapes.n_samples <= 0)
        bad("dataset.n_samples", "must be positive");
      cfg.dataset.shapes.seed =
          seed_at(*d, "seed", "dataset.seed", cfg.dataset.shapes.seed);
      cfg.dataset.shapes.palette_size =
          int_at(*d, "palette_size", "dataset.palette_size",
                 cfg.dataset.shapes.palette_size);
      if (cfg.dataset.shapes.palette_size < 2)
        bad("dataset.palette_size", "must be >= 2");
    } else if (cfg.dataset.kind == "cifar") {
      cfg.dataset.cifar_path = str_at(*d, "path", "dataset.path", "");
      if (cfg.dataset.cifar_path.empty()) bad("dataset.path", "is required");
    } else {
      bad("dataset.kind", "must be \"shapes\" or \"cifar\"");
    }
  }

  if (const json* g = child(j, "generator")) {
    cfg.generator.latent_dim =
        int_at(*g, "latent_dim", "generator.latent_dim",
               cfg.generator.latent_dim);
    if (cfg.generator.latent_dim <= 0)
      bad("generator.latent_dim", "must be positive");
    cfg.generator.base_map =
        int_at(*g, "base_map", "generator.base_map", cfg.generator.base_map);
    if (cfg.generator.base_map <= 0)
      bad("generator.base_map", "must be positive");
    if (const json* w = child(*g, "widths")) {
      if (!w->is_array() || w->empty())
        bad("generator.widths", "must be a non-empty array");
      cfg.generator.widths.clear();
      for (size_t i = 0; i < w->size(); ++i) {
        if (!(*w)[i].is_number_integer() || (*w)[i].get<int>() <= 0)
          bad("generator.widths[" + std::to_string(i) + "]",
              "must be a positive integer");
        cfg.generator.widths.push_back((*w)[i].get<int>());
      }
    }
  }

  if (const json* d = child(j, "discriminator")) {
    cfg.discriminator.convs = convs_at(*d, "convs", "discriminator.convs",
                                       cfg.discriminator.convs);
    cfg.discriminator.leaky_slope = static_cast<float>(
        num_at(*d, "leaky_slope", "discriminator.leaky_slope",
               cfg.discriminator.leaky_slope));
    cfg.discriminator.spectral_norm =
        bool_at(*d, "spectral_norm", "discriminator.spectral_norm",
                cfg.discriminator.spectral_norm);
  }
  cfg.discriminator.image_size = cfg.generator.out_size();

  if (const json* v = child(j, "vae"))
    cfg.vae_enc_convs = convs_at(*v, "enc_convs", "vae.enc_convs",
                                 cfg.vae_enc_convs);

  if (const json* t = child(j, "train")) {
    cfg.train.steps = int_at(*t, "steps", "train.steps", cfg.train.steps);
    if (cfg.train.steps <= 0) bad("train.steps", "must be positive");
    cfg.train.batch_size =
        int_at(*t, "batch_size", "train.batch_size", cfg.train.batch_size);
    if (cfg.train.batch_size <= 0) bad("train.batch_size", "must be positive");
    cfg.train.lr = num_at(*t, "lr", "train.lr", cfg.train.lr);
    if (cfg.train.lr <= 0) bad("train.lr", "must be positive");
    cfg.train.beta1 = num_at(*t, "beta1", "train.beta1", cfg.train.beta1);
    cfg.train.beta2 = num_at(*t, "beta2", "train.beta2", cfg.train.beta2);
    cfg.train.d_steps = int_at(*t, "d_steps", "train.d_steps",
                               cfg.train.d_steps);
    if (cfg.train.d_steps <= 0) bad("train.d_steps", "must be positive");
    cfg.train.seed = seed_at(*t, "seed", "train.seed", cfg.train.seed);
    cfg.train.log_every =
        int_at(*t, "log_every", "train.log_every", cfg.train.log_every);
    if (cfg.train.log_every <= 0) bad("train.log_every", "must be positive");
  }

  if (const json* o = child(j, "objective")) {
    cfg.train.objective.lambda =
        num_at(*o, "lambda", "objective.lambda", cfg.train.objective.lambda);
    if (cfg.train.objective.lambda < 0) bad("objective.lambda", "must be >= 0");
    cfg.train.objective.use_sign_loss =
        bool_at(*o, "use_sign_loss", "objective.use_sign_loss",
                cfg.train.objective.use_sign_loss);
    cfg.train.objective.trigger_batch_ratio =
        num_at(*o, "trigger_batch_ratio", "objective.trigger_batch_ratio",
               cfg.train.objective.trigger_batch_ratio);
    if (cfg.train.objective.trigger_batch_ratio <= 0 ||
        cfg.train.objective.trigger_batch_ratio > 1)
      bad("objective.trigger_batch_ratio", "must be in (0,1]");
  }

  if (const json* t = child(j, "trigger")) {
    cfg.trigger_kind = str_at(*t, "kind", "trigger.kind", cfg.trigger_kind);
    if (cfg.trigger_kind != "latent" && cfg.trigger_kind != "image")
      bad("trigger.kind", "must be \"latent\" or \"image\"");
    cfg.trigger_n = int_at(*t, "n", "trigger.n", cfg.trigger_n);
    if (cfg.trigger_n <= 0 || cfg.trigger_n > cfg.generator.latent_dim)
      bad("trigger.n", "must be in [1, latent_dim]");
    cfg.trigger_c = num_at(*t, "c", "trigger.c", cfg.trigger_c);
    cfg.trigger_region =
        region_at(*t, "region", "trigger.region", cfg.trigger_region);
    cfg.trigger_seed = seed_at(*t, "seed", "trigger.seed", cfg.trigger_seed);
  }
  if (cfg.model_kind == "vae" && cfg.train.objective.lambda > 0 &&
      cfg.trigger_kind != "image")
    bad("trigger.kind", "must be \"image\" for VAE models");

  if (const json* w = child(j, "watermark")) {
    cfg.watermark_kind = str_at(*w, "kind", "watermark.kind",
                                cfg.watermark_kind);
    if (cfg.watermark_kind != "procedural" && cfg.watermark_kind != "png")
      bad("watermark.kind", "must be \"procedural\" or \"png\"");
    cfg.watermark_variant = int_at(*w, "variant", "watermark.variant",
                                   cfg.watermark_variant);
    cfg.watermark_path = str_at(*w, "path", "watermark.path",
                                cfg.watermark_path);
    if (cfg.watermark_kind == "png" && cfg.watermark_path.empty())
      bad("watermark.path", "is required for png watermarks");
    cfg.watermark_region = region_at(*w, "region", "watermark.region",
                                     cfg.watermark_region);
  }
  {
    int res = cfg.generator.out_size();
    if (cfg.watermark_region.row + cfg.watermark_region.h > res ||
        cfg.watermark_region.col + cfg.watermark_region.w > res)
      bad("watermark.region", "does not fit the generator output");
  }

  if (const json* s = child(j, "signature")) {
    cfg.signature_text = str_at(*s, "text", "signature.text",
                                cfg.signature_text);
    if (cfg.signature_text.empty()) bad("signature.text", "must be non-empty");
    cfg.gamma0 = num_at(*s, "gamma0", "signature.gamma0", cfg.gamma0);
    if (cfg.gamma0 <= 0) bad("signature.gamma0", "must be positive");
  }
  {
    int cap = 0;
    for (int wdt : cfg.generator.widths) cap += wdt;
    if (static_cast<int>(cfg.signature_text.size()) * 8 > cap)
      bad("signature.text", "needs more bits than the placement capacity");
  }

  if (const json* v = child(j, "verify")) {
    cfg.verify_queries = int_at(*v, "n_queries", "verify.n_queries",
                                cfg.verify_queries);
    if (cfg.verify_queries <= 0) bad("verify.n_queries", "must be positive");
    cfg.verify_threshold = num_at(*v, "threshold", "verify.threshold",
                                  cfg.verify_threshold);
    if (cfg.verify_threshold <= 0 || cfg.verify_threshold > 1)
      bad("verify.threshold", "must be in (0,1]");
    cfg.histogram_bins = int_at(*v, "histogram_bins", "verify.histogram_bins",
                                cfg.histogram_bins);
    if (cfg.histogram_bins <= 0) bad("verify.histogram_bins", "must be positive");
  }

  if (const json* a = child(j, "attack")) {
    cfg.attack_steps_fraction =
        num_at(*a, "steps_fraction", "attack.steps_fraction",
               cfg.attack_steps_fraction);
    if (cfg.attack_steps_fraction <= 0 || cfg.attack_steps_fraction > 1)
      bad("attack.steps_fraction", "must be in (0,1]");
    cfg.attack_flip_p = num_at(*a, "flip_p", "attack.flip_p", cfg.attack_flip_p);
    if (cfg.attack_flip_p < 0 || cfg.attack_flip_p > 1)
      bad("attack.flip_p", "must be in [0,1]");
    cfg.attacker_signature_text =
        str_at(*a, "signature_text", "attack.signature_text",
               cfg.attacker_signature_text);
  }

  cfg.train.config_hash = cfg.config_hash;
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return parse_experiment_config(read_text(path));
}

Tensor load_dataset(const ExperimentConfig& cfg) {
  if (cfg.dataset.kind == "cifar")
    return read_cifar_binary(cfg.dataset.cifar_path);
  return generate_shapes(cfg.dataset.shapes);
}

TriggerSpec build_trigger(const ExperimentConfig& cfg) {
  TriggerSpec t;
  if (cfg.trigger_kind == "latent") {
    t.kind = TriggerSpec::Kind::Latent;
    t.latent = LatentTriggerSpec::generate(cfg.generator.latent_dim,
                                           cfg.trigger_n, cfg.trigger_c,
                                           cfg.trigger_seed);
  } else {
    t.kind = TriggerSpec::Kind::Image;
    t.image = ImageTriggerSpec::generate(3, cfg.trigger_region,
                                         cfg.trigger_seed);
  }
  return t;
}

WatermarkAsset build_watermark(const ExperimentConfig& cfg) {
  if (cfg.watermark_kind == "png")
    return WatermarkAsset::load_png(cfg.watermark_path, cfg.watermark_region,
                                    "logo");
  WatermarkAsset a;
  a.image = make_logo(cfg.watermark_region.h, cfg.watermark_region.w,
                      cfg.watermark_variant);
  a.paste_region = cfg.watermark_region;
  a.name = "logo-v" + std::to_string(cfg.watermark_variant);
  return a;
}

SignPlacement placement_for(const ExperimentConfig& cfg) {
  SignPlacement p;
  std::string prefix = cfg.model_kind == "vae" ? "vae.dec" : "gen";
  for (size_t i = 0; i < cfg.generator.widths.size(); ++i) {
    p.layer_names.push_back(prefix + ".bn" + std::to_string(i + 1));
    p.channel_counts.push_back(cfg.generator.widths[i]);
  }
  return p;
}

OwnerBundle owner_bundle(const ExperimentConfig& cfg) {
  OwnerBundle b;
  b.trigger = build_trigger(cfg);
  b.watermark = build_watermark(cfg);
  b.signature.gamma0 = cfg.gamma0;
  b.signature.target = encode_text(cfg.signature_text);
  b.signature.placement = placement_for(cfg);
  return b;
}

TrainConfig build_train_config(const ExperimentConfig& cfg) {
  TrainConfig tc = cfg.train;
  OwnerBundle b = owner_bundle(cfg);
  tc.trigger = b.trigger;
  tc.watermark = b.watermark;
  tc.signature = b.signature;
  tc.config_hash = cfg.config_hash;
  return tc;
}

EvalContext eval_context(const ExperimentConfig& cfg, const Tensor& dataset) {
  EvalContext e;
  e.gen_cfg = cfg.generator;
  e.data = dataset;
  e.owner = owner_bundle(cfg);
  e.n_queries = cfg.verify_queries;
  e.seed = cfg.train.seed + 101;
  return e;
}

QueryFn make_query(const ExperimentConfig& cfg, const ModelCheckpoint& ckpt) {
  if (cfg.model_kind == "vae") {
    nn::VaeConfig vc;
    vc.enc_convs = cfg.vae_enc_convs;
    vc.image_size = cfg.generator.out_size();
    vc.decoder = cfg.generator;
    auto vae = std::make_shared<nn::Vae>(load_vae(vc, ckpt));
    return [vae](const Tensor& x) {
      Tensor eps({x.dim(0), vae->config().decoder.latent_dim});
      return vae->forward(x, eps, false).recon;
    };
  }
  auto gen = std::make_shared<nn::Generator>(load_generator(cfg.generator, ckpt));
  return [gen](const Tensor& z) {
    return to_unit_range(gen->forward(z, false), -1.0, 1.0);
  };
}

RunArtifacts run_embed(const ExperimentConfig& cfg) {
  Tensor data = load_dataset(cfg);
  TrainConfig tc = build_train_config(cfg);

  TrainResult tr;
  if (cfg.model_kind == "vae") {
    nn::VaeConfig vc;
    vc.enc_convs = cfg.vae_enc_convs;
    vc.image_size = cfg.generator.out_size();
    vc.decoder = cfg.generator;
    tr = train_vae(vc, data, tc);
  } else {
    tr = train_dcgan(cfg.generator, cfg.discriminator, data, tc);
  }

  RunArtifacts out;
  out.run_dir = cfg.out_dir;
  out.diverged = tr.diverged;
  fs::create_directories(cfg.out_dir);
  write_text(cfg.out_dir + "/config.json", cfg.raw_json);
  out.checkpoint_path = cfg.out_dir + "/checkpoint.gmk";
  tr.checkpoint.save(out.checkpoint_path);
  tc.trigger.save(cfg.out_dir + "/trigger.json");
  write_text(cfg.out_dir + "/log.csv", tr.log_csv);

  out.metrics = evaluate_any(cfg, tr.checkpoint, data);
  write_text(cfg.out_dir + "/metrics.csv",
             metrics_csv(variant_label(cfg), out.metrics));

  VerifyOptions vo;
  vo.n_queries = cfg.verify_queries;
  vo.threshold = cfg.verify_threshold;
  vo.histogram_bins = cfg.histogram_bins;
  vo.seed = cfg.train.seed + 101;
  vo.base_inputs = cfg.model_kind == "vae" ? &data : nullptr;
  vo.checkpoint_hash = sha256_file(out.checkpoint_path);
  out.report = full_report(make_query(cfg, tr.checkpoint), tr.checkpoint,
                           owner_bundle(cfg), vo);
  write_text(cfg.out_dir + "/report.json", out.report.to_json());
  write_text(cfg.out_dir + "/qwm.csv", out.report.qwm_csv());
  write_text(cfg.out_dir + "/summary.txt", out.report.summary());
  write_manifest(cfg.out_dir);
  return out;
}

VerificationReport run_verify(const ExperimentConfig& cfg,
                              const std::string& checkpoint_path) {
  ModelCheckpoint ckpt = ModelCheckpoint::load(checkpoint_path);
  Tensor data;
  VerifyOptions vo;
  vo.n_queries = cfg.verify_queries;
  vo.threshold = cfg.verify_threshold;
  vo.histogram_bins = cfg.histogram_bins;
  vo.seed = cfg.train.seed + 101;
  if (cfg.model_kind == "vae") {
    data = load_dataset(cfg);
    vo.base_inputs = &data;
  }
  vo.checkpoint_hash = sha256_file(checkpoint_path);
  VerificationReport report =
      full_report(make_query(cfg, ckpt), ckpt, owner_bundle(cfg), vo);
  fs::create_directories(cfg.out_dir);
  write_text(cfg.out_dir + "/report.json", report.to_json());
  write_text(cfg.out_dir + "/qwm.csv", report.qwm_csv());
  write_text(cfg.out_dir + "/summary.txt", report.summary());
  write_manifest(cfg.out_dir);
  return report;
}

std::vector<AttackOutcome> run_attack(const std::string& kind,
                                      const ExperimentConfig& cfg,
                                      const std::string& checkpoint_path) {
  require(cfg.model_kind == "dcgan", ErrorKind::InvalidArgument,
          "attacks operate on DCGAN checkpoints");
  ModelCheckpoint ckpt = ModelCheckpoint::load(checkpoint_path);
  Tensor data = load_dataset(cfg);
  EvalContext eval = eval_context(cfg, data);
  TrainConfig tc = build_train_config(cfg);
  int steps = std::max(
      1, static_cast<int>(std::lround(cfg.attack_steps_fraction *
                                      cfg.train.steps)));
  uint64_t seed = cfg.train.seed + 7000;

  std::vector<AttackOutcome> outcomes;
  if (kind == "finetune") {
    outcomes.push_back(finetune_attack(ckpt, cfg.discriminator, data, steps,
                                       seed, tc, eval));
  } else if (kind == "overwrite") {
    ExperimentConfig att = cfg;
    att.trigger_seed = cfg.trigger_seed + 1;
    att.watermark_variant = cfg.watermark_variant + 1;
    att.signature_text = cfg.attacker_signature_text;
    OwnerBundle attacker = owner_bundle(att);
    for (bool sign_loss : {false, true})
      outcomes.push_back(overwrite_attack(ckpt, cfg.discriminator, data,
                                          attacker, sign_loss, steps, seed, tc,
                                          eval));
  } else if (kind == "flip") {
    outcomes.push_back(flip_signs_attack(ckpt, cfg.attack_flip_p, seed, eval));
  } else {
    throw Error(ErrorKind::InvalidArgument,
                "unknown attack kind: " + kind +
                    " (expected finetune, overwrite, or flip)");
  }

  for (size_t i = 0; i < outcomes.size(); ++i) {
    const AttackOutcome& a = outcomes[i];
    std::string dir = cfg.out_dir + "/attack_" + kind;
    if (!a.report.variant.empty()) dir += "_" + a.report.variant;
    fs::create_directories(dir);
    a.checkpoint.save(dir + "/attacked.gmk");
    write_text(dir + "/report.json", a.report.to_json());
    write_text(dir + "/report.csv",
               AttackReport::csv_header() + a.report.csv_row());
    if (!a.log_csv.empty()) write_text(dir + "/log.csv", a.log_csv);
    write_manifest(dir);
  }
  return outcomes;
}

std::string run_flip_sweep(const ExperimentConfig& cfg,
                           const std::string& checkpoint_path,
                           const std::vector<double>& fractions,
                           const std::vector<uint64_t>& seeds) {
  require(cfg.model_kind == "dcgan", ErrorKind::InvalidArgument,
          "sweep-flips operates on DCGAN checkpoints");
  ModelCheckpoint ckpt = ModelCheckpoint::load(checkpoint_path);
  Tensor data = load_dataset(cfg);
  EvalContext eval = eval_context(cfg, data);
  std::string csv = flip_sweep(ckpt, fractions, seeds, eval);
  fs::create_directories(cfg.out_dir);
  write_text(cfg.out_dir + "/sweep_flips.csv", csv);
  write_manifest(cfg.out_dir);
  return csv;
}

std::string ablate_lambda(const ExperimentConfig& cfg,
                          const std::vector<double>& lambdas) {
  Tensor data = load_dataset(cfg);
  std::ostringstream os;
  os << "lambda,fidelity_proxy,qwm_mean,ber\n";
  for (double lambda : lambdas) {
    require(lambda >= 0, ErrorKind::InvalidArgument,
            "ablate_lambda: lambda must be >= 0");
    ExperimentConfig c = cfg;
    c.train.objective.lambda = lambda;
    TrainConfig tc = build_train_config(c);
    TrainResult tr = train_dcgan(c.generator, c.discriminator, data, tc);
    AttackMetrics m = evaluate_any(c, tr.checkpoint, data);
    os << lambda << ',' << m.fidelity << ',' << m.qwm_mean << ',' << m.ber
       << '\n';
  }
  fs::create_directories(cfg.out_dir);
  write_text(cfg.out_dir + "/ablate_lambda.csv", os.str());
  return os.str();
}

std::string ablate_c(const ExperimentConfig& cfg,
                     const std::vector<double>& c_values) {
  Tensor data = load_dataset(cfg);
  std::ostringstream os;
  os << "c,qwm_mean,control_qwm_mean,separation\n";
  for (double cval : c_values) {
    ExperimentConfig c = cfg;
    c.trigger_c = cval;
    TrainConfig tc = build_train_config(c);
    TrainResult tr = train_dcgan(c.generator, c.discriminator, data, tc);
    OwnerBundle owner = owner_bundle(c);
    QueryFn query = make_query(c, tr.checkpoint);
    BlackboxSection bb =
        verify_blackbox(query, owner.trigger, owner.watermark,
                        c.verify_queries, c.verify_threshold,
                        c.train.seed + 101, c.histogram_bins);
    os << cval << ',' << bb.qwm_mean << ',' << bb.control_qwm_mean << ','
       << bb.separation << '\n';
  }
  fs::create_directories(cfg.out_dir);
  write_text(cfg.out_dir + "/ablate_c.csv", os.str());
  return os.str();
}

std::string emit_tables(const std::vector<std::string>& run_dirs) {
  std::ostringstream os;
  os << "run,variant,fidelity_proxy,qwm_mean,ber\n";
  for (const std::string& dir : run_dirs) {
    std::string path = dir + "/metrics.csv";
    if (!fs::exists(path)) {
      os << dir << ",null,null,null,null\n";
      continue;
    }
    std::istringstream in(read_text(path));
    std::string line;
    std::getline(in, line);  // header
    if (std::getline(in, line) && !line.empty())
      os << dir << ',' << line << '\n';
    else
      os << dir << ",null,null,null,null\n";
  }
  return os.str();
}

void write_manifest(const std::string& dir) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string name = e.path().filename().string();
    if (name == "MANIFEST") continue;
    names.push_back(name);
  }
  std::sort(names.begin(), names.end());
  std::ostringstream os;
  for (const std::string& name : names)
    os << sha256_file(dir + "/" + name) << "  " << name << '\n';
  write_text(dir + "/MANIFEST", os.str());
}

}  // namespace gmk
