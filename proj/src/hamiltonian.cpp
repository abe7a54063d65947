#include "pspin/hamiltonian.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "pspin/numeric.hpp"

namespace pspin {

SpherePoint SpherePoint::project(Eigen::VectorXd v) {
    double norm = v.norm();
    if (!(norm > 0.0)) throw std::invalid_argument("SpherePoint: zero vector");
    v *= std::sqrt(static_cast<double>(v.size())) / norm;
    return SpherePoint{std::move(v)};
}

SpherePoint SpherePoint::uniform(int N, Rng& rng) {
    Eigen::VectorXd v(N);
    for (int i = 0; i < N; ++i) v[i] = rng.normal();
    return project(std::move(v));
}

SpherePoint SpherePoint::north_pole(int N) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(N);
    v[N - 1] = std::sqrt(static_cast<double>(N));
    return SpherePoint{std::move(v)};
}

double overlap(const SpherePoint& a, const SpherePoint& b) {
    return a.coords.dot(b.coords) / a.dim();
}

namespace {

std::uint64_t checked_tensor_size(const ModelParams& params, std::uint64_t budget) {
    std::uint64_t size = 1;
    for (int k = 0; k < params.p; ++k) {
        size *= static_cast<std::uint64_t>(params.N);
        if (size > budget) {
            throw resource_error("disorder tensor would exceed the entry budget (" +
                                 std::to_string(budget) + "); reduce N or p");
        }
    }
    return size;
}

// out[j] = sum_i in[j*N + i] s_i   (contract last index)
void contract_last(const double* in, std::size_t rows, int N, const double* s, double* out) {
    for (std::size_t j = 0; j < rows; ++j) {
        const double* row = in + j * N;
        double acc = 0.0;
        for (int i = 0; i < N; ++i) acc += row[i] * s[i];
        out[j] = acc;
    }
}

// out[j] = sum_i in[i*M + j] s_i   (contract first index); out must not alias in
void contract_first(const double* in, std::size_t M, int N, const double* s, double* out) {
    std::memset(out, 0, M * sizeof(double));
    for (int i = 0; i < N; ++i) {
        const double* block = in + static_cast<std::size_t>(i) * M;
        double w = s[i];
        for (std::size_t j = 0; j < M; ++j) out[j] += w * block[j];
    }
}

}  // namespace

DisorderTensor sample_disorder(const ModelParams& params, std::uint64_t seed,
                               std::uint64_t entry_budget) {
    params.validate();
    std::uint64_t size = checked_tensor_size(params, entry_budget);
    DisorderTensor J;
    J.params = params;
    J.seed = seed;
    J.coefficients.resize(size);
    Rng rng(seed, StreamKind::disorder, 0);
    for (std::uint64_t i = 0; i < size; ++i) J.coefficients[i] = rng.normal();
    return J;
}

double evaluate(const DisorderTensor& J, const SpherePoint& sigma) {
    FieldEvaluator f(J);
    return f.value(sigma.coords);
}

FieldEvaluator::FieldEvaluator(const DisorderTensor& J)
    : J_(&J), N_(J.params.N), p_(J.params.p) {
    scale_ = std::pow(static_cast<double>(N_), -0.5 * (p_ - 1));
    // suffix_off_[k] is the offset of the rank-k stage (slots 1..k, N^k entries), 1 <= k <= p-1
    suffix_off_.assign(p_, 0);
    std::size_t total = 0;
    for (int k = p_ - 1; k >= 1; --k) {
        std::size_t size = 1;
        for (int j = 0; j < k; ++j) size *= N_;
        suffix_off_[k] = total;
        total += size;
    }
    suffix_.resize(total);
    std::size_t big = 1;
    for (int j = 0; j < p_ - 1; ++j) big *= N_;
    work_a_.resize(big);
    work_b_.resize(big);
    chain_[0].resize(big);
    chain_[1].resize(big);
}

// stage k holds J with the last p-k indices contracted against sigma
void FieldEvaluator::build_suffix_stack(const double* sigma) const {
    std::size_t rows = 1;
    for (int j = 0; j < p_ - 1; ++j) rows *= N_;
    contract_last(J_->coefficients.data(), rows, N_, sigma, suffix_.data() + suffix_off_[p_ - 1]);
    for (int k = p_ - 2; k >= 1; --k) {
        rows /= N_;
        contract_last(suffix_.data() + suffix_off_[k + 1], rows, N_, sigma,
                      suffix_.data() + suffix_off_[k]);
    }
}

double FieldEvaluator::value(const Eigen::VectorXd& sigma) const {
    const double* s = sigma.data();
    std::size_t rows = 1;
    for (int j = 0; j < p_ - 1; ++j) rows *= N_;
    const double* cur = J_->coefficients.data();
    double* buf = work_a_.data();
    for (int k = 0; k < p_ - 1; ++k) {
        contract_last(cur, rows, N_, s, buf);
        cur = buf;
        rows /= N_;
        buf = (buf == work_a_.data()) ? work_b_.data() : work_a_.data();
    }
    double acc = 0.0;
    for (int i = 0; i < N_; ++i) acc += cur[i] * s[i];
    return scale_ * acc;
}

double FieldEvaluator::value_grad(const Eigen::VectorXd& sigma, Eigen::VectorXd& grad) const {
    const double* s = sigma.data();
    build_suffix_stack(s);
    grad.setZero(N_);

    // slot-1 term is the rank-1 stage itself; slot m >= 2 prefix-contracts the rank-m stage
    const double* c1 = suffix_.data() + suffix_off_[1];
    double hval = 0.0;
    for (int i = 0; i < N_; ++i) {
        grad[i] += c1[i];
        hval += c1[i] * s[i];
    }
    for (int m = 2; m <= p_; ++m) {
        std::size_t size = 1;
        for (int j = 0; j < m; ++j) size *= N_;
        const double* cur = (m == p_) ? J_->coefficients.data() : suffix_.data() + suffix_off_[m];
        double* buf = work_a_.data();
        for (int c = 0; c < m - 1; ++c) {
            std::size_t out_size = size / N_;
            contract_first(cur, out_size, N_, s, buf);
            cur = buf;
            size = out_size;
            buf = (buf == work_a_.data()) ? work_b_.data() : work_a_.data();
        }
        for (int i = 0; i < N_; ++i) grad[i] += cur[i];
    }
    grad *= scale_;
    return scale_ * hval;
}

double FieldEvaluator::value_grad_hess(const Eigen::VectorXd& sigma, Eigen::VectorXd& grad,
                                       Eigen::MatrixXd& hess) const {
    double hval = value_grad(sigma, grad);  // leaves the suffix stack in place
    const double* s = sigma.data();
    hess.setZero(N_, N_);

    // pair (m, l), m < l: prefix-contract the rank-l stage m-1 times, then for each
    // leading index a contract the middle slots down to the trailing slot l
    for (int l = 2; l <= p_; ++l) {
        std::size_t cur_size = 1;
        for (int j = 0; j < l; ++j) cur_size *= N_;
        const double* cur = (l == p_) ? J_->coefficients.data() : suffix_.data() + suffix_off_[l];
        int toggle = 0;
        for (int m = 1; m < l; ++m) {
            std::size_t M = cur_size / N_;  // block size per leading index
            for (int a = 0; a < N_; ++a) {
                const double* c2 = cur + static_cast<std::size_t>(a) * M;
                std::size_t sz = M;
                double* wb = work_b_.data();
                for (int c = 0; c < l - m - 1; ++c) {
                    std::size_t out_sz = sz / N_;
                    contract_first(c2, out_sz, N_, s, wb);
                    c2 = wb;
                    wb += out_sz;
                    sz = out_sz;
                }
                for (int b = 0; b < N_; ++b) {
                    double v = c2[b];
                    hess(a, b) += v;
                    hess(b, a) += v;
                }
            }
            if (m < l - 1) {
                double* next = chain_[toggle].data();
                toggle ^= 1;
                contract_first(cur, M, N_, s, next);
                cur = next;
                cur_size = M;
            }
        }
    }
    hess *= scale_;
    return hval;
}

PerturbedEvaluator::PerturbedEvaluator(const DisorderTensor& base, const DisorderTensor& perturb)
    : base_(base), perturb_(perturb), weight_(1.0 / std::sqrt(static_cast<double>(base.params.N))) {
    if (base.params.N != perturb.params.N || base.params.p != perturb.params.p) {
        throw std::invalid_argument("PerturbedEvaluator: mismatched (p, N)");
    }
}

double PerturbedEvaluator::value(const Eigen::VectorXd& sigma) const {
    return base_.value(sigma) + weight_ * perturb_.value(sigma);
}

double PerturbedEvaluator::value_grad(const Eigen::VectorXd& sigma, Eigen::VectorXd& grad) const {
    Eigen::VectorXd g2;
    double v = base_.value_grad(sigma, grad);
    double v2 = perturb_.value_grad(sigma, g2);
    grad += weight_ * g2;
    return v + weight_ * v2;
}

double PerturbedEvaluator::value_grad_hess(const Eigen::VectorXd& sigma, Eigen::VectorXd& grad,
                                           Eigen::MatrixXd& hess) const {
    Eigen::VectorXd g2;
    Eigen::MatrixXd h2;
    double v = base_.value_grad_hess(sigma, grad, hess);
    double v2 = perturb_.value_grad_hess(sigma, g2, h2);
    grad += weight_ * g2;
    hess += weight_ * h2;
    return v + weight_ * v2;
}

void euclidean_grad_hess(const DisorderTensor& J, const SpherePoint& sigma,
                         Eigen::VectorXd& grad, Eigen::MatrixXd& hess) {
    FieldEvaluator f(J);
    f.value_grad_hess(sigma.coords, grad, hess);
}

LocalFrame LocalFrame::householder(const SpherePoint& base) {
    int N = base.dim();
    Eigen::VectorXd u = base.coords / base.coords.norm();
    Eigen::MatrixXd basis(N, N - 1);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(N);
    w[N - 1] = 1.0;
    w -= u;
    double wn2 = w.squaredNorm();
    if (wn2 < 1e-24) {
        basis = Eigen::MatrixXd::Identity(N, N).leftCols(N - 1);
    } else {
        for (int j = 0; j < N - 1; ++j) {
            Eigen::VectorXd e = Eigen::VectorXd::Zero(N);
            e[j] = 1.0;
            basis.col(j) = e - (2.0 * w[j] / wn2) * w;
        }
    }
    return LocalFrame{base, std::move(basis)};
}

LocalFrame LocalFrame::randomized(const SpherePoint& base, Rng& rng) {
    int N = base.dim();
    Eigen::VectorXd u = base.coords / base.coords.norm();
    Eigen::MatrixXd basis(N, N - 1);
    int col = 0;
    while (col < N - 1) {
        Eigen::VectorXd v(N);
        for (int i = 0; i < N; ++i) v[i] = rng.normal();
        v -= u * u.dot(v);
        for (int j = 0; j < col; ++j) v -= basis.col(j) * basis.col(j).dot(v);
        double n = v.norm();
        if (n < 1e-8) continue;
        basis.col(col++) = v / n;
    }
    return LocalFrame{base, std::move(basis)};
}

void riemannian_grad_hess(const DisorderTensor& J, const SpherePoint& sigma,
                          const LocalFrame& frame, Eigen::VectorXd& grad,
                          Eigen::MatrixXd& hess) {
    FieldEvaluator f(J);
    Eigen::VectorXd ge;
    Eigen::MatrixXd he;
    double h = f.value_grad_hess(sigma.coords, ge, he);
    const Eigen::MatrixXd& B = frame.tangent_basis;
    grad = B.transpose() * ge;
    hess = B.transpose() * he * B;
    hess -= (J.params.p * h / J.params.N) * Eigen::MatrixXd::Identity(B.cols(), B.cols());
}

double w_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    return x.dot(y) + std::sqrt(1.0 - x.squaredNorm()) * std::sqrt(1.0 - y.squaredNorm());
}

namespace {

// chart derivatives of the unit-variance field at the north pole, from the euclidean
// derivatives of H at sqrt(N) n:
//   fbar(0) = H/sqrt(N),  d_i fbar(0) = (grad H)_i,
//   d2_{ij} fbar(0) = sqrt(N) (hess H)_{ij} - delta_{ij} (grad H)_N
struct ChartDerivs {
    double f0;
    Eigen::VectorXd d1;
    Eigen::MatrixXd d2;
};

ChartDerivs chart_derivs_north(const FieldEvaluator& f, const SpherePoint& pole) {
    int N = f.N();
    Eigen::VectorXd g;
    Eigen::MatrixXd h;
    double val = f.value_grad_hess(pole.coords, g, h);
    ChartDerivs out;
    out.f0 = val / std::sqrt(static_cast<double>(N));
    out.d1 = g.head(N - 1);
    out.d2 = std::sqrt(static_cast<double>(N)) * h.topLeftCorner(N - 1, N - 1);
    out.d2 -= g[N - 1] * Eigen::MatrixXd::Identity(N - 1, N - 1);
    return out;
}

}  // namespace

CovarianceReport verify_covariance_structure(const ModelParams& params, int trials,
                                             std::uint64_t seed) {
    params.validate();
    if (trials < 1) throw std::invalid_argument("verify_covariance_structure: trials >= 1");
    if (params.N < 4) throw std::invalid_argument("verify_covariance_structure: need N >= 4");
    const int p = params.p;
    CovarianceReport report;
    report.params = params;
    report.trials = trials;

    SpherePoint pole = SpherePoint::north_pole(params.N);

    RunningStats var_f, var_d0, var_h00, var_h01;
    RunningStats cov_f_h00, cov_f_h01, cov_d0_f, cov_d0_h01, cov_d0_d1, cov_h00_h11, cov_h01_h02;
    for (int t = 0; t < trials; ++t) {
        DisorderTensor J = sample_disorder(params, mix_stream_id(seed, StreamKind::instance, t));
        FieldEvaluator f(J);
        ChartDerivs d = chart_derivs_north(f, pole);
        var_f.add(d.f0 * d.f0);
        var_d0.add(d.d1[0] * d.d1[0]);
        var_h00.add(d.d2(0, 0) * d.d2(0, 0));
        var_h01.add(d.d2(0, 1) * d.d2(0, 1));
        cov_f_h00.add(d.f0 * d.d2(0, 0));
        cov_f_h01.add(d.f0 * d.d2(0, 1));
        cov_d0_f.add(d.d1[0] * d.f0);
        cov_d0_h01.add(d.d1[0] * d.d2(0, 1));
        cov_d0_d1.add(d.d1[0] * d.d1[1]);
        cov_h00_h11.add(d.d2(0, 0) * d.d2(1, 1));
        cov_h01_h02.add(d.d2(0, 1) * d.d2(0, 2));
    }
    auto push_mc = [&](const std::string& name, double target, const RunningStats& s) {
        double z = s.se() > 0 ? (s.mean() - target) / s.se() : 0.0;
        report.monte_carlo.push_back({name, target, s.mean(), s.se(), z});
    };
    double dp = static_cast<double>(p);
    push_mc("var(f)", 1.0, var_f);
    push_mc("var(d_i f)", dp, var_d0);
    push_mc("var(d2_ii f)", 3.0 * dp * (dp - 1.0) + dp, var_h00);
    push_mc("var(d2_ij f)", dp * (dp - 1.0), var_h01);
    push_mc("cov(f, d2_ii f)", -dp, cov_f_h00);
    push_mc("cov(f, d2_ij f)", 0.0, cov_f_h01);
    push_mc("cov(d_i f, f)", 0.0, cov_d0_f);
    push_mc("cov(d_i f, d2_jk f)", 0.0, cov_d0_h01);
    push_mc("cov(d_i f, d_j f)", 0.0, cov_d0_d1);
    push_mc("cov(d2_ii f, d2_jj f)", dp * (dp - 1.0) + dp, cov_h00_h11);
    push_mc("cov(d2_ij f, d2_ik f)", 0.0, cov_h01_h02);

    // mixed central differences of W(x,y)^p at x=y=0 against the same entries, with one
    // Richardson step to reach the 1e-6 scale
    const int dim = 3;
    auto K = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
        return std::pow(w_kernel(x, y), p);
    };
    auto fd_entry = [&](const std::vector<int>& xd, const std::vector<int>& yd, double h) {
        struct Node {
            Eigen::VectorXd dx, dy;
            double w;
        };
        std::vector<Node> nodes{{Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Zero(dim), 1.0}};
        auto apply_dir = [&](bool on_x, int d) {
            std::vector<Node> next;
            next.reserve(nodes.size() * 2);
            for (const Node& nd : nodes) {
                Node plus = nd, minus = nd;
                (on_x ? plus.dx[d] : plus.dy[d]) += h;
                plus.w = nd.w / (2.0 * h);
                (on_x ? minus.dx[d] : minus.dy[d]) -= h;
                minus.w = -nd.w / (2.0 * h);
                next.push_back(std::move(plus));
                next.push_back(std::move(minus));
            }
            nodes = std::move(next);
        };
        for (int d : xd) apply_dir(true, d);
        for (int d : yd) apply_dir(false, d);
        double acc = 0.0;
        for (const Node& nd : nodes) acc += nd.w * K(nd.dx, nd.dy);
        return acc;
    };
    auto push_fd = [&](const std::string& name, double target, const std::vector<int>& xd,
                       const std::vector<int>& yd) {
        // two Richardson levels on the h^2 series; roundoff stays below ~1e-6 at h/4
        double h = 0.02;
        double f1 = fd_entry(xd, yd, h);
        double f2 = fd_entry(xd, yd, 0.5 * h);
        double f4 = fd_entry(xd, yd, 0.25 * h);
        double r1 = (4.0 * f2 - f1) / 3.0;
        double r2 = (4.0 * f4 - f2) / 3.0;
        double est = (16.0 * r2 - r1) / 15.0;
        report.finite_diff.push_back({name, target, est, 0.0, 0.0});
    };
    push_fd("K(0,0)", 1.0, {}, {});
    push_fd("dK/dy_i", 0.0, {}, {0});
    push_fd("d2K/dy_i dy_i", -dp, {}, {0, 0});
    push_fd("d2K/dy_i dy_j", 0.0, {}, {0, 1});
    push_fd("d2K/dx_i dy_i", dp, {0}, {0});
    push_fd("d2K/dx_i dy_j", 0.0, {0}, {1});
    push_fd("d3K/dx_k dy_i dy_j", 0.0, {2}, {0, 1});
    push_fd("d4K/dx_ii dy_ii", 3.0 * dp * (dp - 1.0) + dp, {0, 0}, {0, 0});
    push_fd("d4K/dx_ij dy_ij", dp * (dp - 1.0), {0, 1}, {0, 1});
    push_fd("d4K/dx_ii dy_jj", dp * (dp - 1.0) + dp, {0, 0}, {1, 1});
    push_fd("d4K/dx_ij dy_ik", 0.0, {0, 1}, {0, 2});
    return report;
}

namespace {

template <typename T>
void write_raw(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_raw(std::ifstream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
}

}  // namespace

void write_disorder_file(const std::string& path, const DisorderTensor& J) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.write("PSPN", 4);
    write_raw<std::uint16_t>(out, 1);
    write_raw<std::uint16_t>(out, static_cast<std::uint16_t>(J.params.p));
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(J.params.N));
    write_raw<std::uint64_t>(out, J.seed);
    out.write(reinterpret_cast<const char*>(J.coefficients.data()),
              static_cast<std::streamsize>(J.coefficients.size() * sizeof(double)));
    if (!out) throw std::runtime_error("short write: " + path);
}

DisorderTensor read_disorder_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "PSPN", 4) != 0) {
        throw std::runtime_error("not a PSPN disorder file: " + path);
    }
    std::uint16_t version = 0, p = 0;
    std::uint32_t N = 0;
    std::uint64_t seed = 0;
    read_raw(in, version);
    if (version != 1) throw std::runtime_error("unsupported PSPN version");
    read_raw(in, p);
    read_raw(in, N);
    read_raw(in, seed);
    DisorderTensor J;
    J.params = ModelParams{static_cast<int>(p), static_cast<int>(N)};
    J.params.validate();
    J.seed = seed;
    std::uint64_t size = checked_tensor_size(J.params, kDefaultEntryBudget);
    J.coefficients.resize(size);
    in.read(reinterpret_cast<char*>(J.coefficients.data()),
            static_cast<std::streamsize>(size * sizeof(double)));
    if (!in) throw std::runtime_error("short read: " + path);
    return J;
}

}  // namespace pspin
