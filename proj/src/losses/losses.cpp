#include <algorithm>
#include <limits>

#include "sphereloc/losses.hpp"

namespace sphereloc {

double gan_loss(const GanBatch& batch) {
  if (batch.d_real.size() == 0 || batch.d_fake.size() == 0) throw InvalidInput("gan_loss: empty batch");
  if (!batch.d_real.allFinite() || !batch.d_fake.allFinite()) throw InvalidInput("gan_loss: non-finite probability");
  const auto clamp = [](double p) { return std::clamp(p, kGanEpsilon, 1.0 - kGanEpsilon); };
  double real = 0.0, fake = 0.0;
  for (double p : batch.d_real) real += std::log(clamp(p));
  for (double p : batch.d_fake) fake += std::log(1.0 - clamp(p));
  return real / double(batch.d_real.size()) + fake / double(batch.d_fake.size());
}

double recon_loss(const SphericalImaged& x, const SphericalImaged& x_hat) {
  if (x.band_limit() != x_hat.band_limit() || x.channels() != x_hat.channels())
    throw ShapeError("recon_loss: image shapes differ");
  if (x.empty()) throw InvalidInput("recon_loss: empty image");
  double acc = 0.0;
  for (int c = 0; c < x.channels(); ++c) acc += (x.channel(c) - x_hat.channel(c)).cwiseAbs().sum();
  return acc / (double(x.size()) * x.size() * x.channels());
}

double cdtm_loss(double gan, double orth, double recon) { return gan + orth + recon; }

void LossParams::validate() const {
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0) || !(lambda3 >= 0.0)) throw ConfigError("loss margins must be >= 0");
}

TripletTuple TripletTuple::from_descriptors(const PlaceDescriptor& anchor, const std::vector<PlaceDescriptor>& rotated,
                                            const std::vector<PlaceDescriptor>& positives,
                                            const std::vector<PlaceDescriptor>& negatives) {
  auto values = [](const std::vector<PlaceDescriptor>& in) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(in.size());
    for (const auto& d : in) out.push_back(d.values);
    return out;
  };
  return TripletTuple{anchor.values, values(rotated), values(positives), values(negatives)};
}

double euclidean_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw ShapeError("euclidean_distance: dimensions differ");
  return (a - b).norm();
}

double hardest_hinge(const Eigen::VectorXd& anchor, const std::vector<Eigen::VectorXd>& positives,
                     const std::vector<Eigen::VectorXd>& negatives, double margin, const DescriptorMetric& d) {
  if (positives.empty() || negatives.empty()) throw InvalidInput("triplet loss: positives and negatives must be non-empty");
  // max over (i, j) of margin + d_pos_i - d_neg_j separates into max d_pos and min d_neg.
  double far_pos = -std::numeric_limits<double>::infinity();
  for (const auto& p : positives) far_pos = std::max(far_pos, d(anchor, p));
  double near_neg = std::numeric_limits<double>::infinity();
  for (const auto& n : negatives) near_neg = std::min(near_neg, d(anchor, n));
  return std::max(0.0, margin + far_pos - near_neg);
}

double individual_loss(const TripletTuple& t, const LossParams& p, const DescriptorMetric& d) {
  p.validate();
  double loss = hardest_hinge(t.anchor, t.positives, t.negatives, p.lambda1, d);
  double rotated = 0.0;
  for (const auto& r : t.rotated) rotated = std::max(rotated, hardest_hinge(r, t.positives, t.negatives, p.lambda2, d));
  return loss + rotated;
}

double cross_domain_loss(const TripletTuple& t, const LossParams& p, const DescriptorMetric& d) {
  p.validate();
  return hardest_hinge(t.anchor, t.positives, t.negatives, p.lambda3, d);
}

double pem_loss(double individual_camera, double individual_simulated, double cross_domain) {
  return individual_camera + individual_simulated + cross_domain;
}

}  // namespace sphereloc
