#include "syncnav/lie.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "syncnav/errors.hpp"

namespace syncnav {

namespace {

constexpr double kSmallAngle = 1e-6;
constexpr double kExpmScaledNorm = 0.25;
constexpr int kExpmTaylorTerms = 10;

Mat2 checked_inverse(const Mat2& a) {
  const double det = a.determinant();
  if (!(std::abs(det) >= kDeterminantFloor)) {
    throw SingularAuxiliaryError(det);
  }
  Mat2 inv;
  inv << a(1, 1), -a(0, 1), -a(1, 0), a(0, 0);
  return inv / det;
}

}  // namespace

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Vec3 unskew(const Mat3& m) {
  const Mat3 sym = 0.5 * (m + m.transpose());
  if (sym.norm() > 1e-6) {
    throw std::invalid_argument("unskew: matrix is not antisymmetric");
  }
  const Mat3 anti = 0.5 * (m - m.transpose());
  return {anti(2, 1), anti(0, 2), anti(1, 0)};
}

Mat3 so3_left_jacobian(const Vec3& omega) {
  const double theta = omega.norm();
  const Mat3 w = skew(omega);
  const Mat3 w2 = w * w;
  if (theta < kSmallAngle) {
    return Mat3::Identity() + 0.5 * w + (1.0 / 6.0) * w2 + (1.0 / 24.0) * w2 * w;
  }
  const double theta2 = theta * theta;
  return Mat3::Identity() + ((1.0 - std::cos(theta)) / theta2) * w +
         ((theta - std::sin(theta)) / (theta2 * theta)) * w2;
}

Mat5 expm(const Mat5& a) {
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > kExpmScaledNorm) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / kExpmScaledNorm)));
  }
  const Mat5 scaled = a / std::ldexp(1.0, squarings);

  Mat5 result = Mat5::Identity();
  Mat5 term = Mat5::Identity();
  for (int k = 1; k <= kExpmTaylorTerms; ++k) {
    term = (term * scaled) / static_cast<double>(k);
    result += term;
  }
  for (int i = 0; i < squarings; ++i) {
    result = (result * result).eval();
  }
  return result;
}

// --- Rot3 -------------------------------------------------------------------

Rot3 Rot3::exp(const Vec3& omega) {
  const double theta = omega.norm();
  const Mat3 w = skew(omega);
  if (theta < kSmallAngle) {
    return Rot3(Mat3::Identity() + w + 0.5 * w * w);
  }
  return Rot3(Mat3::Identity() + (std::sin(theta) / theta) * w +
              ((1.0 - std::cos(theta)) / (theta * theta)) * w * w);
}

Rot3 Rot3::from_matrix(const Mat3& m) {
  if (!m.allFinite()) {
    throw std::invalid_argument("Rot3: non-finite entries");
  }
  const double orth = (m.transpose() * m - Mat3::Identity()).norm();
  const double det = m.determinant();
  if (orth > kOrthogonalityTolerance || std::abs(det - 1.0) > kOrthogonalityTolerance) {
    throw std::invalid_argument("Rot3: matrix is not a rotation");
  }
  return Rot3(m);
}

Rot3 Rot3::project(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return Rot3(svd.matrixU() * d * svd.matrixV().transpose());
}

double Rot3::orthogonality_error() const {
  return (m_.transpose() * m_ - Mat3::Identity()).norm();
}

Rot3 Rot3::renormalized() const {
  if (orthogonality_error() > kOrthogonalityTolerance) {
    return project(m_);
  }
  return *this;
}

// --- tangents ---------------------------------------------------------------

Mat5 SE23Tangent::matrix() const {
  Mat5 m = Mat5::Zero();
  m.topLeftCorner<3, 3>() = skew(omega);
  m.topRightCorner<3, 2>() = wblock;
  return m;
}

SE23Tangent SE23Tangent::from_matrix(const Mat5& m) {
  return {unskew(m.topLeftCorner<3, 3>()), m.topRightCorner<3, 2>()};
}

SE23Tangent& SE23Tangent::operator+=(const SE23Tangent& o) {
  omega += o.omega;
  wblock += o.wblock;
  return *this;
}

SE23Tangent operator-(const SE23Tangent& a, const SE23Tangent& b) {
  return {a.omega - b.omega, a.wblock - b.wblock};
}

SE23Tangent operator*(double s, const SE23Tangent& a) { return {s * a.omega, s * a.wblock}; }

Mat5 SIM23Tangent::matrix() const {
  Mat5 m = Mat5::Zero();
  m.topLeftCorner<3, 3>() = skew(omega);
  m.topRightCorner<3, 2>() = wblock;
  m.bottomRightCorner<2, 2>() = sblock;
  return m;
}

SIM23Tangent SIM23Tangent::from_matrix(const Mat5& m) {
  return {unskew(m.topLeftCorner<3, 3>()), m.topRightCorner<3, 2>(), m.bottomRightCorner<2, 2>()};
}

SIM23Tangent& SIM23Tangent::operator+=(const SIM23Tangent& o) {
  omega += o.omega;
  wblock += o.wblock;
  sblock += o.sblock;
  return *this;
}

SIM23Tangent operator-(const SIM23Tangent& a, const SIM23Tangent& b) {
  return {a.omega - b.omega, a.wblock - b.wblock, a.sblock - b.sblock};
}

SIM23Tangent operator*(double s, const SIM23Tangent& a) {
  return {s * a.omega, s * a.wblock, s * a.sblock};
}

// --- group elements -----------------------------------------------------------

Mat5 SE23::matrix() const {
  Mat5 m = Mat5::Identity();
  m.topLeftCorner<3, 3>() = rotation.matrix();
  m.topRightCorner<3, 2>() = vblock;
  return m;
}

SE23 SE23::from_matrix(const Mat5& m) {
  Eigen::Matrix<double, 2, 5> bottom;
  bottom << 0, 0, 0, 1, 0,
            0, 0, 0, 0, 1;
  if ((m.bottomRows<2>() - bottom).cwiseAbs().maxCoeff() > kOrthogonalityTolerance) {
    throw std::invalid_argument("SE23: bottom rows must be [0 I2]");
  }
  return {Rot3::from_matrix(m.topLeftCorner<3, 3>()), m.topRightCorner<3, 2>()};
}

Mat5 SIM23::matrix() const {
  Mat5 m = Mat5::Zero();
  m.topLeftCorner<3, 3>() = rotation.matrix();
  m.topRightCorner<3, 2>() = vblock;
  m.bottomRightCorner<2, 2>() = ablock;
  return m;
}

SIM23 SIM23::from_matrix(const Mat5& m) {
  if (m.bottomLeftCorner<2, 3>().cwiseAbs().maxCoeff() > kOrthogonalityTolerance) {
    throw std::invalid_argument("SIM23: bottom-left block must be zero");
  }
  return {Rot3::from_matrix(m.topLeftCorner<3, 3>()), m.topRightCorner<3, 2>(),
          m.bottomRightCorner<2, 2>()};
}

double SIM23::condition_number() const {
  Eigen::JacobiSVD<Mat2> svd(ablock);
  const auto& s = svd.singularValues();
  return s(1) > 0.0 ? s(0) / s(1) : std::numeric_limits<double>::infinity();
}

SE23 exp_se23(const SE23Tangent& xi) {
  return {Rot3::exp(xi.omega), so3_left_jacobian(xi.omega) * xi.wblock};
}

SIM23 exp_sim23(const SIM23Tangent& xi) {
  const Mat5 e = expm(xi.matrix());
  // The rotation block of a block-triangular exponential is exp(omega^x);
  // Rodrigues keeps it orthonormal to machine precision.
  return {Rot3::exp(xi.omega), e.topRightCorner<3, 2>(), e.bottomRightCorner<2, 2>()};
}

SE23 compose(const SE23& a, const SE23& b) {
  return {a.rotation * b.rotation, a.rotation.matrix() * b.vblock + a.vblock};
}

SIM23 compose(const SIM23& a, const SIM23& b) {
  return {a.rotation * b.rotation, a.rotation.matrix() * b.vblock + a.vblock * b.ablock,
          a.ablock * b.ablock};
}

SE23 inverse(const SE23& a) {
  const Rot3 rt = a.rotation.transpose();
  return {rt, -(rt.matrix() * a.vblock)};
}

SIM23 inverse(const SIM23& a) {
  const Mat2 ainv = checked_inverse(a.ablock);
  const Rot3 rt = a.rotation.transpose();
  return {rt, -(rt.matrix() * a.vblock * ainv), ainv};
}

SE23 conjugate(const SIM23& z, const SE23& x) {
  const Mat2 ainv = checked_inverse(z.ablock);
  const Rot3 r = z.rotation * x.rotation * z.rotation.transpose();
  const Mat32 v = (Mat3::Identity() - r.matrix()) * z.vblock * ainv +
                  z.rotation.matrix() * x.vblock * ainv;
  return {r, v};
}

SE23Tangent adjoint(const SIM23& z, const SE23Tangent& delta) {
  const Mat2 ainv = checked_inverse(z.ablock);
  const Vec3 omega = z.rotation * delta.omega;
  const Mat32 w = (z.rotation.matrix() * delta.wblock - skew(omega) * z.vblock) * ainv;
  return {omega, w};
}

}  // namespace syncnav
