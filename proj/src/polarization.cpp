#include "ionlink/polarization.hpp"

#include <stdexcept>
#include <string>

namespace ionlink {

Vec2 basis_state(PhotonBasis b) {
    switch (b) {
        case PhotonBasis::H: return jones_h();
        case PhotonBasis::D: return jones_d();
        case PhotonBasis::R: return jones_r();
    }
    throw std::logic_error("unknown photon basis");
}

const char* basis_name(PhotonBasis b) {
    switch (b) {
        case PhotonBasis::H: return "H";
        case PhotonBasis::D: return "D";
        case PhotonBasis::R: return "R";
    }
    throw std::logic_error("unknown photon basis");
}

PhotonBasis photon_basis_from_name(const std::string& s) {
    if (s == "H") return PhotonBasis::H;
    if (s == "D") return PhotonBasis::D;
    if (s == "R") return PhotonBasis::R;
    throw std::invalid_argument("photon basis must be H, D or R");
}

Mat2 waveplate_unitary(const WaveplateSetting& w) {
    const double c = std::cos(w.fast_axis_rad);
    const double s = std::sin(w.fast_axis_rad);
    Mat2 rot;
    rot << c, -s, s, c;
    Mat2 retard;
    retard << 1.0, 0.0, 0.0, std::exp(kI * w.retardance_rad);
    return rot * retard * rot.adjoint();
}

std::vector<WaveplateSetting> analysis_setting(PhotonBasis basis) {
    const double q = kPi / 2.0;
    const double h = kPi;
    switch (basis) {
        case PhotonBasis::H:
            return {{q, 0.0}, {h, 0.0}, {q, 0.0}};
        case PhotonBasis::D:
            return {{q, kPi / 4.0}, {h, kPi / 8.0}, {q, 0.0}};
        case PhotonBasis::R:
            return {{q, 0.0}, {h, kPi / 8.0}, {q, 0.0}};
    }
    throw std::logic_error("unknown photon basis");
}

Mat2 analysis_unitary(PhotonBasis basis) {
    Mat2 u = Mat2::Identity();
    for (const auto& w : analysis_setting(basis)) u = waveplate_unitary(w) * u;
    return u;
}

}  // namespace ionlink
