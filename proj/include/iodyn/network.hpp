#pragma once

// Input-output networks: the row-stochastic matrix of intermediate-input
// shares that wires firms together, plus constructors and spectral helpers.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"

namespace iodyn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CVector = Eigen::VectorXcd;

enum class Normality { normal, non_normal, unknown };

inline constexpr double kRowSumTolerance = 1e-12;

/// Row-stochastic input-output matrix. w(i, j) is the share of good j in the
/// production of good i. Immutable once built; eigenvalues are computed on
/// first request and cached (thread-safe).
class IONetwork {
public:
    IONetwork(Matrix w, Normality normality = Normality::unknown)
        : w_(std::move(w)), normality_(normality), cache_(std::make_shared<Cache>()) {
        validate();
    }

    int n() const { return static_cast<int>(w_.rows()); }
    const Matrix& w() const { return w_; }
    Normality normal_flag() const { return normality_; }

    /// Eigenvalues of w, sorted by decreasing modulus.
    const CVector& eigenvalues() const {
        std::call_once(cache_->once, [this] {
            Eigen::EigenSolver<Matrix> es(w_, false);
            CVector ev = es.eigenvalues();
            std::vector<std::complex<double>> v(ev.data(), ev.data() + ev.size());
            std::stable_sort(v.begin(), v.end(), [](auto x, auto y) { return std::abs(x) > std::abs(y); });
            cache_->eigenvalues = Eigen::Map<CVector>(v.data(), static_cast<Eigen::Index>(v.size()));
        });
        return cache_->eigenvalues;
    }

private:
    struct Cache {
        std::once_flag once;
        CVector eigenvalues;
    };

    void validate() const {
        if (w_.rows() == 0 || w_.rows() != w_.cols())
            throw ConfigError("input-output matrix must be square and non-empty");
        if (!w_.allFinite()) throw ConfigError("input-output matrix has non-finite entries");
        if ((w_.array() < 0.0).any()) throw ConfigError("negative input share");
        for (Eigen::Index i = 0; i < w_.rows(); ++i) {
            if (std::abs(w_.row(i).sum() - 1.0) > kRowSumTolerance)
                throw ConfigError("row " + std::to_string(i) + " of the input-output matrix does not sum to 1");
        }
    }

    Matrix w_;
    Normality normality_;
    std::shared_ptr<Cache> cache_;
};

/// w(i, j) = 1/n for all i, j.
inline IONetwork build_plain_network(int n) {
    if (n < 1) throw ConfigError("network size must be at least 1");
    return IONetwork(Matrix::Constant(n, n, 1.0 / n), Normality::normal);
}

/// I.i.d. unit-mean exponential entries, each row normalized to sum 1.
inline IONetwork build_random_exponential_network(int n, std::uint64_t seed) {
    if (n < 1) throw ConfigError("network size must be at least 1");
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> exp1(1.0);
    Matrix w(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) w(i, j) = exp1(rng);
        w.row(i) /= w.row(i).sum();
    }
    return IONetwork(std::move(w));
}

/// Build a network from an arbitrary nonnegative matrix by normalizing each row.
/// Rows whose sum differs from 1 by more than 1e-9 get a warning.
inline IONetwork normalize_rows(Matrix w, std::vector<std::string>* warnings = nullptr) {
    if (w.rows() == 0 || w.rows() != w.cols()) throw ConfigError("input-output matrix must be square and non-empty");
    if (!w.allFinite()) throw ConfigError("input-output matrix has non-finite entries");
    if ((w.array() < 0.0).any()) throw ConfigError("negative input share");
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        const double s = w.row(i).sum();
        if (s <= 0.0) throw ConfigError("row " + std::to_string(i) + " has no inputs (all-zero row)");
        if (std::abs(s - 1.0) > 1e-9 && warnings)
            warnings->push_back("row " + std::to_string(i) + " summed to " + std::to_string(s) + "; renormalized");
        w.row(i) /= s;
    }
    return IONetwork(std::move(w));
}

/// Parse CSV text: n lines of n comma-separated reals, no header.
inline IONetwork parse_network_csv(std::istream& in, std::vector<std::string>* warnings = nullptr) {
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            std::size_t pos = 0;
            double v = 0.0;
            try {
                v = std::stod(cell, &pos);
            } catch (const std::exception&) {
                throw ConfigError("malformed CSV at line " + std::to_string(lineno) + ": '" + cell + "'");
            }
            if (cell.find_first_not_of(" \t", pos) != std::string::npos)
                throw ConfigError("malformed CSV at line " + std::to_string(lineno) + ": '" + cell + "'");
            row.push_back(v);
        }
        if (!line.empty() && line.back() == ',')
            throw ConfigError("malformed CSV at line " + std::to_string(lineno) + ": trailing comma");
        rows.push_back(std::move(row));
    }
    const auto n = rows.size();
    if (n == 0) throw ConfigError("empty network file");
    Matrix w(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].size() != n) throw ConfigError("network matrix is not square");
        for (std::size_t j = 0; j < n; ++j) w(i, j) = rows[i][j];
    }
    return normalize_rows(std::move(w), warnings);
}

inline IONetwork load_network(const std::string& path, std::vector<std::string>* warnings = nullptr) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open network file: " + path);
    return parse_network_csv(in, warnings);
}

/// True iff max |W W^T - W^T W| < tol.
inline bool is_normal(const IONetwork& net, double tol = 1e-10) {
    const Matrix& w = net.w();
    const Matrix comm = w * w.transpose() - w.transpose() * w;
    return comm.cwiseAbs().maxCoeff() < tol;
}

/// Orthonormal basis (n x (n-1)) of the complement of the all-ones vector.
inline Matrix ones_complement_basis(int n) {
    Eigen::HouseholderQR<Matrix> qr(Matrix::Ones(n, 1));
    const Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    return q.rightCols(n - 1);
}

// Network recipes used by configs and sweeps.
enum class NetworkKind { plain, random_exp, file };

struct NetworkSpec {
    NetworkKind kind = NetworkKind::plain;
    int n = 64;
    std::uint64_t seed = 1;
    std::string path;
};

inline IONetwork make_network(const NetworkSpec& spec, std::vector<std::string>* warnings = nullptr) {
    switch (spec.kind) {
        case NetworkKind::plain: return build_plain_network(spec.n);
        case NetworkKind::random_exp: return build_random_exponential_network(spec.n, spec.seed);
        case NetworkKind::file: return load_network(spec.path, warnings);
    }
    throw ConfigError("unknown network kind");
}

}  // namespace iodyn
