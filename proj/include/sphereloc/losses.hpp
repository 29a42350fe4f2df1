#pragma once

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <vector>

#include "sphereloc/descriptor.hpp"
#include "sphereloc/errors.hpp"
#include "sphereloc/sphere.hpp"

namespace sphereloc {

/// Geometric feature z_g and condition feature z_c of one image.
struct FeaturePair {
  Eigen::VectorXd z_g;
  Eigen::VectorXd z_c;
};

enum class OrthVariant {
  one_minus_cos,  ///< 1 - cos(z_g, z_c), range [0, 2]
  abs_cos,        ///< |cos(z_g, z_c)|, zero for orthogonal features
};

template <typename A, typename B>
double orth_loss(const Eigen::MatrixBase<A>& z_g, const Eigen::MatrixBase<B>& z_c,
                 OrthVariant variant = OrthVariant::one_minus_cos) {
  if (z_g.size() != z_c.size()) throw ShapeError("orth_loss: feature dimensions differ");
  const double ng = z_g.norm();
  const double nc = z_c.norm();
  if (!(ng > 0.0) || !(nc > 0.0)) throw DegenerateInput("orth_loss: zero feature vector");
  const double cos = z_g.dot(z_c) / (ng * nc);
  return variant == OrthVariant::one_minus_cos ? 1.0 - cos : std::abs(cos);
}

inline double orth_loss(const FeaturePair& pair, OrthVariant variant = OrthVariant::one_minus_cos) {
  return orth_loss(pair.z_g, pair.z_c, variant);
}

/// Discriminator outputs on real (y) and generated (y_hat) overhead images.
struct GanBatch {
  Eigen::VectorXd d_real;
  Eigen::VectorXd d_fake;
};

inline constexpr double kGanEpsilon = 1e-7;

/// mean(log d_real) + mean(log(1 - d_fake)), probabilities clamped to [eps, 1 - eps].
double gan_loss(const GanBatch& batch);

/// Mean absolute per-sample difference (L1 reconstruction).
double recon_loss(const SphericalImaged& x, const SphericalImaged& x_hat);

double cdtm_loss(double gan, double orth, double recon);

struct LossParams {
  double lambda1 = 0.5;
  double lambda2 = 0.5;
  double lambda3 = 1.0;

  void validate() const;
};

/// Tuple [S_k, {S_rot}, {S_pos}, {S_neg}] of descriptor vectors.
struct TripletTuple {
  Eigen::VectorXd anchor;
  std::vector<Eigen::VectorXd> rotated;
  std::vector<Eigen::VectorXd> positives;
  std::vector<Eigen::VectorXd> negatives;

  static TripletTuple from_descriptors(const PlaceDescriptor& anchor, const std::vector<PlaceDescriptor>& rotated,
                                       const std::vector<PlaceDescriptor>& positives,
                                       const std::vector<PlaceDescriptor>& negatives);
};

using DescriptorMetric = std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

double euclidean_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Hardest-pair hinge max_{i,j} [margin + d(a, pos_i) - d(a, neg_j)]_+.
double hardest_hinge(const Eigen::VectorXd& anchor, const std::vector<Eigen::VectorXd>& positives,
                     const std::vector<Eigen::VectorXd>& negatives, double margin,
                     const DescriptorMetric& d = euclidean_distance);

/// Anchor term with margin lambda1 plus rotated-anchor term with margin lambda2.
double individual_loss(const TripletTuple& t, const LossParams& p = {},
                       const DescriptorMetric& d = euclidean_distance);

/**
 * Cross-domain term: anchor from the camera domain, positives and negatives
 * from the simulated domain, margin lambda3.  `rotated` is ignored.
 */
double cross_domain_loss(const TripletTuple& t, const LossParams& p = {},
                         const DescriptorMetric& d = euclidean_distance);

double pem_loss(double individual_camera, double individual_simulated, double cross_domain);

}  // namespace sphereloc
