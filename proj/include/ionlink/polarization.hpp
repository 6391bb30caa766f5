#pragma once

#include <vector>

#include "ionlink/linalg.hpp"

namespace ionlink {

// Jones-calculus convention used throughout: right-circular light is
// |R> = (|H> - i|V>)/sqrt(2), and a retarder delays its slow axis, i.e.
// U = R(theta) diag(1, e^{i delta}) R(-theta) with theta the fast-axis angle.

enum class PhotonBasis { H, D, R };

inline Vec2 jones_h() { return Vec2(1.0, 0.0); }
inline Vec2 jones_v() { return Vec2(0.0, 1.0); }
inline Vec2 jones_d() { return Vec2(1.0, 1.0) / std::sqrt(2.0); }
inline Vec2 jones_a() { return Vec2(1.0, -1.0) / std::sqrt(2.0); }
inline Vec2 jones_r() { return Vec2(1.0, cxd(0.0, -1.0)) / std::sqrt(2.0); }
inline Vec2 jones_l() { return Vec2(1.0, cxd(0.0, 1.0)) / std::sqrt(2.0); }

Vec2 basis_state(PhotonBasis b);
const char* basis_name(PhotonBasis b);
PhotonBasis photon_basis_from_name(const std::string& s);

struct WaveplateSetting {
    double retardance_rad = 0.0;
    double fast_axis_rad = 0.0;
};

Mat2 waveplate_unitary(const WaveplateSetting& w);

// Waveplate angles (quarter, half, quarter in beam order) that map the
// requested analysis basis state onto H ahead of the polarizing splitter.
std::vector<WaveplateSetting> analysis_setting(PhotonBasis basis);

// Composite Jones operator of an analysis_setting stack.
Mat2 analysis_unitary(PhotonBasis basis);

}  // namespace ionlink
