// SPDX-License-Identifier: Apache-2.0
#include "risopt/channel_gen.hpp"

#include "risopt/errors.hpp"
#include "risopt/linalg.hpp"

#include <bit>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <string>

namespace risopt {

double path_loss(double d, const PathLossModel& model) {
    if (!(d > 0.0) || !std::isfinite(d)) {
        throw DomainError("path_loss: distance must be > 0, got " + std::to_string(d));
    }
    const bool los = model.kind == LinkKind::Los;
    const double intercept = los ? 35.95 : 33.05;
    const double exponent = los ? 2.2 : 3.67;
    return std::pow(10.0, (model.gt_dbi + model.gr_dbi - intercept) / 10.0) /
           std::pow(d, exponent);
}

LosAngleSet LosAngleSet::draw(int M, int N, Rng& rng) {
    std::uniform_real_distribution<double> elevation(0.0, std::numbers::pi);
    std::uniform_real_distribution<double> azimuth(0.0, kTwoPi);
    LosAngleSet a;
    a.theta_los1.resize(N);
    a.phi_los1.resize(N);
    a.theta_los2.resize(M);
    a.phi_los2.resize(M);
    for (int n = 0; n < N; ++n) {
        a.theta_los1[n] = elevation(rng);
        a.phi_los1[n] = azimuth(rng);
    }
    for (int m = 0; m < M; ++m) {
        a.theta_los2[m] = elevation(rng);
        a.phi_los2[m] = azimuth(rng);
    }
    return a;
}

MatrixXcd los_steering_matrix(int M, int N, const LosAngleSet& angles, double d_bs_over_lambda,
                              double d_ris_over_lambda) {
    if (!(d_bs_over_lambda > 0.0) || !(d_ris_over_lambda > 0.0)) {
        throw ConfigError("los_steering_matrix: spacings must be > 0");
    }
    if (angles.theta_los1.size() != N || angles.phi_los1.size() != N ||
        angles.theta_los2.size() != M || angles.phi_los2.size() != M) {
        throw ConfigError("los_steering_matrix: angle set does not match M x N");
    }
    MatrixXcd H(M, N);
    for (int m = 0; m < M; ++m) {
        for (int n = 0; n < N; ++n) {
            const double path =
                m * d_bs_over_lambda * std::sin(angles.theta_los1[n]) * std::sin(angles.phi_los1[n]) +
                n * d_ris_over_lambda * std::sin(angles.theta_los2[m]) * std::sin(angles.phi_los2[m]);
            H(m, n) = std::polar(1.0, kTwoPi * path);
        }
    }
    return H;
}

std::vector<Point2> sample_user_positions(const SystemConfig& config, Rng& rng, int count) {
    if (!(config.r_min < config.r_max)) throw ConfigError("r_min must be < r_max");
    std::vector<Point2> users;
    users.reserve(static_cast<std::size_t>(std::max(count, 0)));
    // Uniform in area: r^2 uniform between the squared radii.
    std::uniform_real_distribution<double> r2(config.r_min * config.r_min,
                                              config.r_max * config.r_max);
    std::uniform_real_distribution<double> angle(0.0, std::numbers::pi / 2.0);
    for (int k = 0; k < count; ++k) {
        const double r = std::sqrt(r2(rng));
        const double a = angle(rng);
        users.push_back({std::max(0.0, r * std::cos(a)), std::max(0.0, r * std::sin(a))});
    }
    return users;
}

MatrixXcd exponential_correlation(int N, double rho) {
    MatrixXcd R(N, N);
    for (int a = 0; a < N; ++a) {
        for (int b = 0; b < N; ++b) {
            R(a, b) = a == b ? 1.0 : std::pow(rho, std::abs(a - b));
        }
    }
    return R;
}

MatrixXcd complex_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    MatrixXcd X(rows, cols);
    // Column-major fill; the draw order is part of the reproducibility contract.
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            X(r, c) = cd(re, im);
        }
    }
    return X;
}

ChannelRealization sample_channel(const SystemConfig& config, Rng& rng) {
    config.validate();
    const int M = config.M;
    const int N = config.N;
    const int K = config.K;

    const LosAngleSet angles = LosAngleSet::draw(M, N, rng);
    const MatrixXcd H1_los =
        los_steering_matrix(M, N, angles, config.d_bs_over_lambda, config.d_ris_over_lambda);
    const MatrixXcd H1_nlos = complex_normal(M, N, rng);

    const double d_rb = std::hypot(config.ris_position.x, config.ris_position.y);
    const double pl_rb =
        path_loss(d_rb, {LinkKind::Los, config.gains.ris_dbi, config.gains.bs_dbi});
    const double k = config.kappa;

    ChannelRealization chan;
    chan.H1 = std::sqrt(pl_rb / N) *
              (std::sqrt(k / (k + 1.0)) * H1_los + std::sqrt(1.0 / (k + 1.0)) * H1_nlos);
    chan.R_ris_sqrt = config.ris_correlation == 0.0
                          ? MatrixXcd(MatrixXcd::Identity(N, N))
                          : linalg::hermitian_sqrt(exponential_correlation(N, config.ris_correlation));

    chan.user_positions = sample_user_positions(config, rng, K);
    chan.H2 = complex_normal(N, K, rng);
    for (int u = 0; u < K; ++u) {
        const Point2& p = chan.user_positions[static_cast<std::size_t>(u)];
        const double d_ur = std::hypot(p.x - config.ris_position.x, p.y - config.ris_position.y);
        const double pl =
            path_loss(d_ur, {LinkKind::Nlos, config.gains.user_dbi, config.gains.ris_dbi});
        chan.H2.col(u) *= std::sqrt(pl);
    }
    return chan;
}

namespace {

void write_matrix(std::ostream& os, const char* name, const MatrixXcd& A) {
    os << name << ' ' << A.rows() << ' ' << A.cols() << '\n';
    for (Eigen::Index r = 0; r < A.rows(); ++r) {
        for (Eigen::Index c = 0; c < A.cols(); ++c) {
            os << A(r, c).real() << ' ' << A(r, c).imag() << '\n';
        }
    }
}

MatrixXcd read_matrix(std::istream& is, const std::string& name) {
    std::string tag;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    if (!(is >> tag >> rows >> cols) || tag != name || rows < 0 || cols < 0) {
        throw ConfigError("channel record: expected '" + name + " <rows> <cols>'");
    }
    MatrixXcd A(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            double re = 0.0;
            double im = 0.0;
            if (!(is >> re >> im)) throw ConfigError("channel record: truncated " + name);
            A(r, c) = cd(re, im);
        }
    }
    return A;
}

}  // namespace

void write_channel(std::ostream& os, const ChannelRealization& chan) {
    chan.check_dimensions();
    const auto old_precision = os.precision(17);
    os << "ris-channel 1\n";
    os << "M " << chan.antennas() << "\nN " << chan.elements() << "\nK " << chan.users() << '\n';
    write_matrix(os, "H1", chan.H1);
    write_matrix(os, "R_RIS_sqrt", chan.R_ris_sqrt);
    write_matrix(os, "H2", chan.H2);
    os << "positions " << chan.user_positions.size() << '\n';
    for (const Point2& p : chan.user_positions) os << p.x << ' ' << p.y << '\n';
    os.precision(old_precision);
}

ChannelRealization read_channel(std::istream& is) {
    std::string tag;
    int version = 0;
    if (!(is >> tag >> version) || tag != "ris-channel" || version != 1) {
        throw ConfigError("channel record: missing 'ris-channel 1' header");
    }
    int dims[3] = {0, 0, 0};
    const char* names[3] = {"M", "N", "K"};
    for (int i = 0; i < 3; ++i) {
        if (!(is >> tag >> dims[i]) || tag != names[i]) {
            throw ConfigError(std::string("channel record: expected '") + names[i] + " <n>'");
        }
    }
    ChannelRealization chan;
    chan.H1 = read_matrix(is, "H1");
    chan.R_ris_sqrt = read_matrix(is, "R_RIS_sqrt");
    chan.H2 = read_matrix(is, "H2");
    std::size_t count = 0;
    if (!(is >> tag >> count) || tag != "positions") {
        throw ConfigError("channel record: expected 'positions <n>'");
    }
    chan.user_positions.resize(count);
    for (Point2& p : chan.user_positions) {
        if (!(is >> p.x >> p.y)) throw ConfigError("channel record: truncated positions");
    }
    if (chan.antennas() != dims[0] || chan.elements() != dims[1] || chan.users() != dims[2]) {
        throw ConfigError("channel record: header dimensions disagree with matrices");
    }
    chan.check_dimensions();
    return chan;
}

std::uint64_t channel_hash(const ChannelRealization& chan) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&](double v) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xffU;
            h *= 0x100000001b3ULL;
        }
    };
    for (const MatrixXcd* A : {&chan.H1, &chan.R_ris_sqrt, &chan.H2}) {
        mix(static_cast<double>(A->rows()));
        mix(static_cast<double>(A->cols()));
        for (Eigen::Index i = 0; i < A->size(); ++i) {
            mix(A->data()[i].real());
            mix(A->data()[i].imag());
        }
    }
    return h;
}

}  // namespace risopt
