#pragma once

// Matrix Lie group core: SO(3), the extended pose group SE2(3) and its
// automorphism group SIM2(3), together with their Lie algebras.
//
// SE2(3) elements embed as 5x5 matrices
//
//     | R  V |        R in SO(3), V = [v p] in R^{3x2}
//     | 0  I |
//
// and SIM2(3) elements replace the bottom-right identity with an invertible
// 2x2 block A. Conjugation by SIM2(3) maps SE2(3) to itself.

#include <Eigen/Core>

namespace syncnav {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat32 = Eigen::Matrix<double, 3, 2>;
using Mat5 = Eigen::Matrix<double, 5, 5>;

inline constexpr double kOrthogonalityTolerance = 1e-9;
inline constexpr double kDeterminantFloor = 1e-12;

/// Skew-symmetric matrix with skew(v) * w == v.cross(w).
Mat3 skew(const Vec3& v);

/// Inverse of skew(). Throws std::invalid_argument when the symmetric part of
/// m has norm above 1e-6.
Vec3 unskew(const Mat3& m);

/// Left Jacobian of SO(3), J(w) = sum_k (w^x)^k / (k+1)!.
Mat3 so3_left_jacobian(const Vec3& omega);

/// Dense matrix exponential by scaling and squaring with a 10-term Taylor
/// kernel. Intended for the small block-triangular matrices used here.
Mat5 expm(const Mat5& a);

class Rot3 {
 public:
  Rot3() : m_(Mat3::Identity()) {}

  static Rot3 identity() { return Rot3(); }
  /// Rodrigues exponential.
  static Rot3 exp(const Vec3& omega);
  /// Validating constructor: throws std::invalid_argument unless m is
  /// orthonormal with unit determinant within kOrthogonalityTolerance.
  static Rot3 from_matrix(const Mat3& m);
  /// Nearest rotation in Frobenius norm (polar decomposition).
  static Rot3 project(const Mat3& m);
  /// Caller guarantees that m is a rotation.
  static Rot3 unchecked(const Mat3& m) { return Rot3(m); }

  const Mat3& matrix() const { return m_; }
  Rot3 transpose() const { return Rot3(m_.transpose()); }
  Rot3 inverse() const { return transpose(); }
  double trace() const { return m_.trace(); }

  /// ||R^T R - I||_F.
  double orthogonality_error() const;
  /// Re-projects onto SO(3) when the orthogonality error exceeds the
  /// tolerance; otherwise returns *this unchanged.
  Rot3 renormalized() const;

  Rot3 operator*(const Rot3& other) const { return Rot3(m_ * other.m_); }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

 private:
  explicit Rot3(const Mat3& m) : m_(m) {}
  Mat3 m_;
};

/// Element of se2(3): omega^x in the rotation block, W in the 3x2 block.
struct SE23Tangent {
  Vec3 omega = Vec3::Zero();
  Mat32 wblock = Mat32::Zero();

  static SE23Tangent zero() { return {}; }
  Mat5 matrix() const;
  /// Reads the se2(3) blocks of m. The bottom 2x5 rows are ignored.
  static SE23Tangent from_matrix(const Mat5& m);

  SE23Tangent& operator+=(const SE23Tangent& o);
  friend SE23Tangent operator+(SE23Tangent a, const SE23Tangent& b) { return a += b; }
  friend SE23Tangent operator-(const SE23Tangent& a, const SE23Tangent& b);
  friend SE23Tangent operator*(double s, const SE23Tangent& a);
  friend SE23Tangent operator-(const SE23Tangent& a) { return -1.0 * a; }
};

/// Element of sim2(3): adds a general 2x2 block S in the bottom-right.
struct SIM23Tangent {
  Vec3 omega = Vec3::Zero();
  Mat32 wblock = Mat32::Zero();
  Mat2 sblock = Mat2::Zero();

  static SIM23Tangent zero() { return {}; }
  static SIM23Tangent from(const SE23Tangent& xi) { return {xi.omega, xi.wblock, Mat2::Zero()}; }
  Mat5 matrix() const;
  static SIM23Tangent from_matrix(const Mat5& m);

  SIM23Tangent& operator+=(const SIM23Tangent& o);
  friend SIM23Tangent operator+(SIM23Tangent a, const SIM23Tangent& b) { return a += b; }
  friend SIM23Tangent operator-(const SIM23Tangent& a, const SIM23Tangent& b);
  friend SIM23Tangent operator*(double s, const SIM23Tangent& a);
  friend SIM23Tangent operator-(const SIM23Tangent& a) { return -1.0 * a; }
};

/// Extended pose. vblock column 0 is velocity, column 1 is position.
struct SE23 {
  Rot3 rotation;
  Mat32 vblock = Mat32::Zero();

  static SE23 identity() { return {}; }
  /// Throws std::invalid_argument unless the bottom rows are [0 I2] and the
  /// rotation block is valid.
  static SE23 from_matrix(const Mat5& m);

  Vec3 velocity() const { return vblock.col(0); }
  Vec3 position() const { return vblock.col(1); }
  Mat5 matrix() const;
};

/// Element of the extended similarity group.
struct SIM23 {
  Rot3 rotation;
  Mat32 vblock = Mat32::Zero();
  Mat2 ablock = Mat2::Identity();

  static SIM23 identity() { return {}; }
  static SIM23 from(const SE23& x) { return {x.rotation, x.vblock, Mat2::Identity()}; }
  /// Throws std::invalid_argument unless the bottom-left block is zero and
  /// the rotation block is valid.
  static SIM23 from_matrix(const Mat5& m);

  Mat5 matrix() const;
  /// Drops the scaling block, forcing it to I2. Used after products whose
  /// scaling blocks cancel analytically.
  SE23 to_se23() const { return {rotation, vblock}; }
  /// Spectral condition number of the scaling block.
  double condition_number() const;
};

SE23 exp_se23(const SE23Tangent& xi);
SIM23 exp_sim23(const SIM23Tangent& xi);

SE23 compose(const SE23& a, const SE23& b);
SIM23 compose(const SIM23& a, const SIM23& b);
inline SE23 operator*(const SE23& a, const SE23& b) { return compose(a, b); }
inline SIM23 operator*(const SIM23& a, const SIM23& b) { return compose(a, b); }

SE23 inverse(const SE23& a);
/// Throws SingularAuxiliaryError when |det A| < kDeterminantFloor.
SIM23 inverse(const SIM23& a);

/// Z X Z^{-1}, evaluated blockwise; the result is exactly in SE2(3).
SE23 conjugate(const SIM23& z, const SE23& x);

/// Z Delta Z^{-1} for Delta in se2(3); the result is again in se2(3).
SE23Tangent adjoint(const SIM23& z, const SE23Tangent& delta);

}  // namespace syncnav
