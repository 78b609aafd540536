#include "gmk/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "gmk/error.hpp"
#include "gmk/hash.hpp"
#include "gmk/metrics.hpp"
#include "gmk/rng.hpp"

namespace gmk {

namespace {

using nlohmann::json;

Tensor slice_image(const Tensor& batch, int i) {
  int c = batch.dim(1), h = batch.dim(2), w = batch.dim(3);
  Tensor out({c, h, w});
  size_t stride = out.size();
  std::copy(batch.data() + i * stride, batch.data() + (i + 1) * stride,
            out.data());
  return out;
}

std::vector<double> score_batch(const Tensor& outputs,
                                const WatermarkAsset& watermark,
                                double threshold) {
  const Region& r = watermark.paste_region;
  require(outputs.rank() == 4 && r.row + r.h <= outputs.dim(2) &&
              r.col + r.w <= outputs.dim(3),
          ErrorKind::InvalidArgument,
          "verify_blackbox: model resolution does not fit the watermark "
          "region");
  std::vector<double> scores;
  scores.reserve(static_cast<size_t>(outputs.dim(0)));
  for (int i = 0; i < outputs.dim(0); ++i) {
    Tensor y = slice_image(outputs, i);
    Tensor expected = paste_watermark(y, watermark);
    scores.push_back(qwm(y, expected, &watermark, {}, threshold).full_image);
  }
  return scores;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string iso_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[80];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec);
  return buf;
}

json blackbox_json(const BlackboxSection& b) {
  json j;
  j["n_queries"] = b.n_queries;
  j["qwm_mean"] = b.qwm_mean;
  j["qwm_std"] = b.qwm_std;
  j["qwm_histogram"] = b.histogram;
  j["threshold"] = b.threshold;
  j["verdict"] = b.verdict;
  j["control_qwm_mean"] = b.control_qwm_mean;
  j["separation"] = b.separation;
  if (!b.error.empty()) j["error"] = b.error;
  return j;
}

json whitebox_json(const WhiteboxSection& w) {
  json j;
  j["extracted_text"] = w.extracted_text;
  j["ber"] = w.ber.ber;
  j["mismatches"] = w.ber.mismatches;
  j["total_bits"] = w.ber.total;
  j["verdict"] = w.verdict;
  if (!w.error.empty()) j["error"] = w.error;
  return j;
}

}  // namespace

BlackboxSection verify_blackbox(const QueryFn& query,
                                const TriggerSpec& trigger,
                                const WatermarkAsset& watermark, int n_queries,
                                double threshold, uint64_t seed,
                                int histogram_bins, const Tensor* base_inputs) {
  require(n_queries > 0, ErrorKind::InvalidArgument,
          "verify_blackbox: n_queries must be positive");
  require(histogram_bins > 0, ErrorKind::InvalidArgument,
          "verify_blackbox: histogram needs at least one bin");
  Rng rng(seed);

  Tensor control_inputs;
  if (trigger.kind == TriggerSpec::Kind::Latent) {
    control_inputs = Tensor({n_queries, trigger.latent.latent_dim});
    for (size_t i = 0; i < control_inputs.size(); ++i)
      control_inputs[i] = static_cast<float>(rng.normal());
  } else {
    require(base_inputs && base_inputs->rank() == 4 && base_inputs->dim(0) > 0,
            ErrorKind::InvalidArgument,
            "verify_blackbox: image triggers need a base input pool");
    int c = base_inputs->dim(1), h = base_inputs->dim(2),
        w = base_inputs->dim(3);
    control_inputs = Tensor({n_queries, c, h, w});
    size_t stride = static_cast<size_t>(c) * h * w;
    for (int i = 0; i < n_queries; ++i) {
      int src = static_cast<int>(
          rng.below(static_cast<uint64_t>(base_inputs->dim(0))));
      std::copy(base_inputs->data() + src * stride,
                base_inputs->data() + (src + 1) * stride,
                control_inputs.data() + i * stride);
    }
  }
  Tensor trigger_inputs = build_trigger_batch(control_inputs, trigger);

  BlackboxSection out;
  out.n_queries = n_queries;
  out.threshold = threshold;

  Tensor y_trig = query(trigger_inputs);
  Tensor y_ctrl = query(control_inputs);
  out.per_sample = score_batch(y_trig, watermark, threshold);
  out.control_per_sample = score_batch(y_ctrl, watermark, threshold);

  out.qwm_mean = mean_of(out.per_sample);
  out.qwm_std = std_of(out.per_sample, out.qwm_mean);
  out.control_qwm_mean = mean_of(out.control_per_sample);
  out.separation = out.qwm_mean - out.control_qwm_mean;
  out.verdict = out.qwm_mean >= threshold;

  out.histogram.assign(static_cast<size_t>(histogram_bins), 0);
  for (double q : out.per_sample) {
    double clamped = q < 0.0 ? 0.0 : (q > 1.0 ? 1.0 : q);
    int bin = static_cast<int>(clamped * histogram_bins);
    if (bin == histogram_bins) bin = histogram_bins - 1;
    ++out.histogram[static_cast<size_t>(bin)];
  }
  return out;
}

WhiteboxSection verify_whitebox(const ModelCheckpoint& checkpoint,
                                const SignLossConfig& signature) {
  WhiteboxSection out;
  try {
    require(signature.target.length() > 0, ErrorKind::InvalidArgument,
            "verify_whitebox: empty owner signature");
    BitSignature extracted = extract_signs(checkpoint, signature.placement,
                                           signature.target.length());
    out.ber = ber(extracted, signature.target);
    bool unprintable = false;
    out.extracted_text = decode_bits(extracted, &unprintable);
    out.verdict = out.ber.mismatches == 0;
  } catch (const Error& e) {
    out.error = e.what();
    out.verdict = false;
  }
  return out;
}

std::string VerificationReport::to_json() const {
  json j;
  j["schema"] = schema;
  j["blackbox"] = blackbox_json(blackbox);
  j["whitebox"] = whitebox_json(whitebox);
  j["checkpoint_hash"] = checkpoint_hash;
  j["trigger_hash"] = trigger_hash;
  j["watermark_hash"] = watermark_hash;
  j["timestamp"] = timestamp;
  return j.dump(2);
}

std::string VerificationReport::summary() const {
  std::ostringstream os;
  os << "black-box: Q_wm " << blackbox.qwm_mean << " +/- " << blackbox.qwm_std
     << " over " << blackbox.n_queries << " queries (threshold "
     << blackbox.threshold << ", control " << blackbox.control_qwm_mean
     << ") -> " << (blackbox.verdict ? "POSITIVE" : "negative") << "\n";
  os << "white-box: BER " << whitebox.ber.ber << " (" << whitebox.ber.mismatches
     << "/" << whitebox.ber.total << "), text \"" << whitebox.extracted_text
     << "\" -> " << (whitebox.verdict ? "POSITIVE" : "negative") << "\n";
  if (!blackbox.error.empty()) os << "black-box error: " << blackbox.error << "\n";
  if (!whitebox.error.empty()) os << "white-box error: " << whitebox.error << "\n";
  return os.str();
}

std::string VerificationReport::qwm_csv() const {
  std::ostringstream os;
  os << "index,qwm,control_qwm\n";
  size_t n = std::max(blackbox.per_sample.size(),
                      blackbox.control_per_sample.size());
  for (size_t i = 0; i < n; ++i) {
    os << i << ',';
    if (i < blackbox.per_sample.size()) os << blackbox.per_sample[i];
    os << ',';
    if (i < blackbox.control_per_sample.size())
      os << blackbox.control_per_sample[i];
    os << '\n';
  }
  return os.str();
}

int VerificationReport::exit_code() const {
  if (blackbox.verdict && whitebox.verdict) return 0;
  if (blackbox.verdict) return 2;
  if (whitebox.verdict) return 3;
  return 4;
}

VerificationReport full_report(const QueryFn& query,
                               const ModelCheckpoint& checkpoint,
                               const OwnerBundle& owner,
                               const VerifyOptions& opts) {
  VerificationReport report;
  try {
    report.blackbox = verify_blackbox(query, owner.trigger, owner.watermark,
                                      opts.n_queries, opts.threshold,
                                      opts.seed, opts.histogram_bins,
                                      opts.base_inputs);
  } catch (const Error& e) {
    report.blackbox.error = e.what();
    report.blackbox.verdict = false;
  }
  report.whitebox = verify_whitebox(checkpoint, owner.signature);
  report.checkpoint_hash = opts.checkpoint_hash;
  report.trigger_hash = sha256_hex(owner.trigger.to_json());
  {
    const Tensor& img = owner.watermark.image;
    std::string bytes(reinterpret_cast<const char*>(img.data()),
                      img.size() * sizeof(float));
    report.watermark_hash = sha256_hex(bytes);
  }
  report.timestamp = iso_timestamp();
  return report;
}

}  // namespace gmk
