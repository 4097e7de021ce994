/*
 * Copyright 2026 The Dyadic Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace dyadic {

/// Integer wavevector on the periodic unit box. Ordered lexicographically,
/// which is preserved by translation: (m + k) < (n + k) iff m < n.
struct Wavevector {
    int x = 0;
    int y = 0;
    int z = 0;

    auto operator<=>(const Wavevector&) const = default;
    bool operator==(const Wavevector&) const = default;

    Wavevector operator+(const Wavevector& o) const noexcept { return {x + o.x, y + o.y, z + o.z}; }
    Wavevector operator-(const Wavevector& o) const noexcept { return {x - o.x, y - o.y, z - o.z}; }
    Wavevector operator-() const noexcept { return {-x, -y, -z}; }

    bool is_zero() const noexcept { return x == 0 && y == 0 && z == 0; }
    int norm_inf() const noexcept;
    long norm2() const noexcept { return long(x) * x + long(y) * y + long(z) * z; }
};

using Vec3 = std::array<double, 3>;
using CVec3 = std::array<std::complex<double>, 3>;

double dot(const Vec3& a, const Wavevector& m) noexcept;

/// Sparse Fourier coefficients of a vector field, sorted by wavevector, with
/// every mode inside the cube |m|_inf <= radius.
class FourierField {
public:
    struct Mode {
        Wavevector m;
        CVec3 value;
    };

    FourierField() = default;
    explicit FourierField(int radius);

    int radius() const noexcept { return radius_; }
    std::size_t size() const noexcept { return modes_.size(); }
    std::span<const Mode> modes() const noexcept { return modes_; }

    /// Adds `value` to mode m (inserting it). Throws for m = 0 or m outside the radius.
    void add(const Wavevector& m, const CVec3& value);
    std::optional<CVec3> find(const Wavevector& m) const;
    CVec3 at(const Wavevector& m) const;  ///< zero when absent

    /// Builds a field from modes already sorted and unique; used by the
    /// translation-based operators.
    static FourierField from_sorted(int radius, std::vector<Mode> modes);

    /// this + scale * other, merged in one pass.
    void axpy(double scale, const FourierField& other);
    FourierField scaled(double s) const;

    /// Sum of Re(conj(a_m) . b_m) over modes; the real L2 pairing up to a constant.
    static double inner(const FourierField& a, const FourierField& b);
    double norm() const { return std::sqrt(inner(*this, *this)); }
    double max_abs() const;

    /// max_m |xi_{-m} - conj(xi_m)|, absent modes counting as zero.
    double conjugate_asymmetry() const;
    /// max_m |m . xi_m|.
    double max_divergence() const;

    /// Keeps only the modes inside a smaller cube.
    FourierField restricted(int radius) const;

private:
    int radius_ = 0;
    std::vector<Mode> modes_;
};

/// Delta symbol in this convention: (Delta xi)_m = -4 pi^2 |m|^2 xi_m.
FourierField laplacian(const FourierField& field);

/// Leray projection P_m = I - m m^T / |m|^2 applied mode by mode.
FourierField leray_project(const FourierField& field);
CVec3 leray_project(const Wavevector& m, const CVec3& v) noexcept;

/// Orthonormal basis of k-perp: a1 = normalize(k x u), a2 = normalize(k x a1),
/// u = z-hat unless k is parallel to z-hat, then x-hat. alpha is 0 or 1.
Vec3 polarization(const Wavevector& k, int alpha);

/// Coefficients sigma_{k,alpha} of the transport noise, finitely supported.
struct SigmaTable {
    struct Entry {
        Wavevector k;
        int alpha = 0;
        double sigma = 0.0;
    };
    std::vector<Entry> entries;  ///< sorted by (k, alpha)

    double sum_sigma2() const;
    int max_norm_inf() const;
    /// Throws InvalidArgument for k = 0, alpha not in {0,1}, negative sigma,
    /// duplicates, or sigma_{-k} != sigma_k.
    void validate() const;
    /// True when sigma depends only on |k|.
    bool radially_constant() const;
};

/// Output modes m + k receive 2 pi i (a . m) xi_m; modes beyond out_radius are
/// dropped and counted (none are when |k|_inf + radius <= out_radius).
struct AdvectResult {
    FourierField field;
    std::size_t dropped = 0;
};
AdvectResult advect_by(const FourierField& field, const Wavevector& k, const Vec3& a, int out_radius);
AdvectResult advect(const FourierField& field, const Wavevector& k, int alpha, int out_radius);

struct CorrectorOptions {
    bool project = true;
    unsigned threads = 1;
    std::size_t chunk = 64;  ///< (k, alpha) terms per partial sum; fixed for determinism
};

struct CorrectorResult {
    FourierField field;
    std::size_t dropped = 0;  ///< modes lost to the output truncation
    int intermediate_radius = 0;
};

/// 1/2 sum sigma^2 Pi(e . grad Pi(conj(e) . grad xi)) with each e_{k,alpha}
/// paired with its conjugate; with project = false both Pi are omitted.
/// The intermediate truncation is radius + 2 max|k|_inf, the result is
/// restricted back to the field radius. For a conjugate-symmetric input the
/// output symmetry is asserted (OracleMismatch on failure).
CorrectorResult corrector_apply(const FourierField& field, const SigmaTable& sigma,
                                const CorrectorOptions& options = {});

/// Closed-form multiplier of the unprojected corrector on mode m:
/// -4 pi^2 * 1/2 * sum sigma^2 (a . m)^2.
double single_mode_multiplier(const SigmaTable& sigma, const Wavevector& m);

struct NuSigmaProbe {
    double mean = 0.0;
    double relative_spread = 0.0;           ///< (max - min) / |mean| over the test modes
    std::vector<Wavevector> modes;
    std::vector<double> values;             ///< per-mode extracted nu
};

/// Operational extraction: unit single-mode fields through the unprojected
/// corrector, multiplier divided by -4 pi^2 |m|^2.
NuSigmaProbe probe_nu_sigma(const SigmaTable& sigma, unsigned threads = 1);

/// Extracted nu_sigma; throws InvalidArgument when the multipliers vary by
/// more than 1e-10 relative across the test modes.
double nu_sigma(const SigmaTable& sigma, unsigned threads = 1);

/// Modes with N <= |k| < 2N; both polarizations. The half-open shell makes
/// consecutive dyadic shells disjoint.
std::vector<Wavevector> shell_modes(int n);

/// Constant sigma on shell_modes(N) with sum_k (a.m)^2 = 2 n |m|^2 / 3, so
/// nu_sigma = s^2 n / 3 and s^2 = 3 nu_target / n.
SigmaTable shell_sigma(int n, double nu_target);

/// Random conjugate-symmetric divergence-free field on 0 < |m| <= radius.
FourierField random_solenoidal_field(double radius, std::uint64_t seed, std::uint64_t stream = 0);

struct RemainderFit {
    double c_hat = 0.0;
    double residual = 0.0;   ///< |R - c Delta xi| / |R| summed over fields, 0 when R = 0
    double nu_sigma = 0.0;
    std::size_t dropped = 0;
};

/// Least-squares c minimizing sum |R xi - c Delta xi|^2 with
/// R = S_sigma - nu_sigma Delta. nu_sigma is the mean operational
/// multiplier, so anisotropic tables are accepted for diagnostics.
RemainderFit remainder_fit(const SigmaTable& sigma, std::span<const FourierField> test_fields,
                           unsigned threads = 1);

struct SweepRow {
    int n = 0;
    double nu_sigma = 0.0;
    double c_hat = 0.0;
    double residual = 0.0;
};

void write_field_csv(std::ostream& out, const FourierField& field);
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

} // namespace dyadic
