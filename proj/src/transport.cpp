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
#include "dyadic/transport.hpp"

#include "dyadic/error.hpp"
#include "dyadic/parallel.hpp"
#include "dyadic/philox.hpp"
#include "dyadic/text.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <ostream>

namespace dyadic {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kFourPiSq = 4.0 * std::numbers::pi * std::numbers::pi;

Vec3 to_vec(const Wavevector& m)
{
    return {double(m.x), double(m.y), double(m.z)};
}

Vec3 cross(const Vec3& a, const Vec3& b)
{
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

Vec3 normalized(const Vec3& v)
{
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    return {v[0] / n, v[1] / n, v[2] / n};
}

double cabs(const CVec3& v)
{
    return std::sqrt(std::norm(v[0]) + std::norm(v[1]) + std::norm(v[2]));
}

bool mode_less(const FourierField::Mode& a, const Wavevector& m)
{
    return a.m < m;
}

} // namespace

int Wavevector::norm_inf() const noexcept
{
    return std::max({std::abs(x), std::abs(y), std::abs(z)});
}

double dot(const Vec3& a, const Wavevector& m) noexcept
{
    return a[0] * m.x + a[1] * m.y + a[2] * m.z;
}

FourierField::FourierField(int radius)
    : radius_(radius)
{
    require(radius >= 0, "truncation radius must be nonnegative");
}

void FourierField::add(const Wavevector& m, const CVec3& value)
{
    require(!m.is_zero(), "the zero mode is not part of a field");
    require(m.norm_inf() <= radius_, "mode lies outside the truncation radius");
    auto it = std::lower_bound(modes_.begin(), modes_.end(), m, mode_less);
    if (it != modes_.end() && it->m == m) {
        for (int i = 0; i < 3; ++i) {
            it->value[i] += value[i];
        }
    } else {
        modes_.insert(it, Mode{m, value});
    }
}

std::optional<CVec3> FourierField::find(const Wavevector& m) const
{
    auto it = std::lower_bound(modes_.begin(), modes_.end(), m, mode_less);
    if (it != modes_.end() && it->m == m) {
        return it->value;
    }
    return std::nullopt;
}

CVec3 FourierField::at(const Wavevector& m) const
{
    return find(m).value_or(CVec3{});
}

FourierField FourierField::from_sorted(int radius, std::vector<Mode> modes)
{
    FourierField f(radius);
    f.modes_ = std::move(modes);
    return f;
}

void FourierField::axpy(double scale, const FourierField& other)
{
    std::vector<Mode> merged;
    merged.reserve(modes_.size() + other.modes_.size());
    auto a = modes_.begin();
    auto b = other.modes_.begin();
    while (a != modes_.end() || b != other.modes_.end()) {
        if (b == other.modes_.end() || (a != modes_.end() && a->m < b->m)) {
            merged.push_back(*a++);
        } else if (a == modes_.end() || b->m < a->m) {
            Mode mode{b->m, {}};
            for (int i = 0; i < 3; ++i) {
                mode.value[i] = scale * b->value[i];
            }
            merged.push_back(mode);
            ++b;
        } else {
            Mode mode = *a++;
            for (int i = 0; i < 3; ++i) {
                mode.value[i] += scale * b->value[i];
            }
            merged.push_back(mode);
            ++b;
        }
    }
    modes_ = std::move(merged);
    radius_ = std::max(radius_, other.radius_);
}

FourierField FourierField::scaled(double s) const
{
    FourierField out = *this;
    for (auto& mode : out.modes_) {
        for (auto& c : mode.value) {
            c *= s;
        }
    }
    return out;
}

double FourierField::inner(const FourierField& a, const FourierField& b)
{
    std::vector<double> terms;
    auto ia = a.modes_.begin();
    auto ib = b.modes_.begin();
    while (ia != a.modes_.end() && ib != b.modes_.end()) {
        if (ia->m < ib->m) {
            ++ia;
        } else if (ib->m < ia->m) {
            ++ib;
        } else {
            double s = 0.0;
            for (int i = 0; i < 3; ++i) {
                s += std::real(std::conj(ia->value[i]) * ib->value[i]);
            }
            terms.push_back(s);
            ++ia;
            ++ib;
        }
    }
    return pairwise_sum(terms);
}

double FourierField::max_abs() const
{
    double m = 0.0;
    for (const auto& mode : modes_) {
        m = std::max(m, cabs(mode.value));
    }
    return m;
}

double FourierField::conjugate_asymmetry() const
{
    double worst = 0.0;
    for (const auto& mode : modes_) {
        const CVec3 mirror = at(-mode.m);
        CVec3 diff;
        for (int i = 0; i < 3; ++i) {
            diff[i] = mirror[i] - std::conj(mode.value[i]);
        }
        worst = std::max(worst, cabs(diff));
    }
    return worst;
}

double FourierField::max_divergence() const
{
    double worst = 0.0;
    for (const auto& mode : modes_) {
        const std::complex<double> d =
            double(mode.m.x) * mode.value[0] + double(mode.m.y) * mode.value[1] + double(mode.m.z) * mode.value[2];
        worst = std::max(worst, std::abs(d));
    }
    return worst;
}

FourierField FourierField::restricted(int radius) const
{
    std::vector<Mode> kept;
    for (const auto& mode : modes_) {
        if (mode.m.norm_inf() <= radius) {
            kept.push_back(mode);
        }
    }
    return from_sorted(radius, std::move(kept));
}

FourierField laplacian(const FourierField& field)
{
    std::vector<FourierField::Mode> modes(field.modes().begin(), field.modes().end());
    for (auto& mode : modes) {
        const double symbol = -kFourPiSq * double(mode.m.norm2());
        for (auto& c : mode.value) {
            c *= symbol;
        }
    }
    return FourierField::from_sorted(field.radius(), std::move(modes));
}

CVec3 leray_project(const Wavevector& m, const CVec3& v) noexcept
{
    const double n2 = double(m.norm2());
    const std::complex<double> md = double(m.x) * v[0] + double(m.y) * v[1] + double(m.z) * v[2];
    const std::complex<double> s = md / n2;
    return {v[0] - s * double(m.x), v[1] - s * double(m.y), v[2] - s * double(m.z)};
}

FourierField leray_project(const FourierField& field)
{
    std::vector<FourierField::Mode> modes(field.modes().begin(), field.modes().end());
    for (auto& mode : modes) {
        mode.value = leray_project(mode.m, mode.value);
    }
    return FourierField::from_sorted(field.radius(), std::move(modes));
}

Vec3 polarization(const Wavevector& k, int alpha)
{
    require(!k.is_zero(), "polarization of the zero wavevector");
    require(alpha == 0 || alpha == 1, "polarization index must be 0 or 1");
    const Vec3 kv = to_vec(k);
    const Vec3 u = (k.x == 0 && k.y == 0) ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 0.0, 1.0};
    const Vec3 a1 = normalized(cross(kv, u));
    if (alpha == 0) {
        return a1;
    }
    return normalized(cross(kv, a1));
}

double SigmaTable::sum_sigma2() const
{
    std::vector<double> sq;
    sq.reserve(entries.size());
    for (const auto& e : entries) {
        sq.push_back(e.sigma * e.sigma);
    }
    return pairwise_sum(sq);
}

int SigmaTable::max_norm_inf() const
{
    int m = 0;
    for (const auto& e : entries) {
        m = std::max(m, e.k.norm_inf());
    }
    return m;
}

namespace {

bool entry_less(const SigmaTable::Entry& a, const SigmaTable::Entry& b)
{
    return a.k < b.k || (a.k == b.k && a.alpha < b.alpha);
}

const SigmaTable::Entry* find_entry(const SigmaTable& t, const Wavevector& k, int alpha)
{
    const SigmaTable::Entry probe{k, alpha, 0.0};
    auto it = std::lower_bound(t.entries.begin(), t.entries.end(), probe, entry_less);
    if (it != t.entries.end() && it->k == k && it->alpha == alpha) {
        return &*it;
    }
    return nullptr;
}

} // namespace

void SigmaTable::validate() const
{
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        require(!e.k.is_zero(), "sigma table contains the zero wavevector");
        require(e.alpha == 0 || e.alpha == 1, "sigma table polarization must be 0 or 1");
        require(std::isfinite(e.sigma) && e.sigma >= 0.0, "sigma values must be finite and nonnegative");
        if (i > 0) {
            require(entry_less(entries[i - 1], e), "sigma table must be sorted without duplicates");
        }
    }
    for (const auto& e : entries) {
        const Entry* mirror = find_entry(*this, -e.k, e.alpha);
        const double other = mirror ? mirror->sigma : 0.0;
        require(other == e.sigma, "sigma table must satisfy sigma_{-k} = sigma_k");
    }
}

bool SigmaTable::radially_constant() const
{
    std::vector<std::pair<long, double>> by_radius;
    for (const auto& e : entries) {
        by_radius.emplace_back(e.k.norm2(), e.sigma);
    }
    std::sort(by_radius.begin(), by_radius.end());
    for (std::size_t i = 1; i < by_radius.size(); ++i) {
        if (by_radius[i].first == by_radius[i - 1].first && by_radius[i].second != by_radius[i - 1].second) {
            return false;
        }
    }
    // A radius with some modes missing from the table is not isotropic either.
    for (std::size_t i = 0; i < by_radius.size();) {
        const long r2 = by_radius[i].first;
        std::size_t j = i;
        while (j < by_radius.size() && by_radius[j].first == r2) {
            ++j;
        }
        std::size_t expected = 0;
        const int r = static_cast<int>(std::ceil(std::sqrt(double(r2))));
        for (int x = -r; x <= r; ++x) {
            for (int y = -r; y <= r; ++y) {
                for (int z = -r; z <= r; ++z) {
                    if (long(x) * x + long(y) * y + long(z) * z == r2) {
                        expected += 2;
                    }
                }
            }
        }
        if (j - i != expected) {
            return false;
        }
        i = j;
    }
    return true;
}

AdvectResult advect_by(const FourierField& field, const Wavevector& k, const Vec3& a, int out_radius)
{
    AdvectResult result;
    std::vector<FourierField::Mode> out;
    out.reserve(field.size());
    for (const auto& mode : field.modes()) {
        const double am = dot(a, mode.m);
        if (am == 0.0) {
            continue;
        }
        const Wavevector target = mode.m + k;
        if (target.is_zero()) {
            continue;  // the mean mode carries no vorticity
        }
        if (target.norm_inf() > out_radius) {
            ++result.dropped;
            continue;
        }
        const std::complex<double> factor(0.0, kTwoPi * am);
        out.push_back({target, {factor * mode.value[0], factor * mode.value[1], factor * mode.value[2]}});
    }
    // Translation preserves the lexicographic order, so `out` is sorted.
    result.field = FourierField::from_sorted(out_radius, std::move(out));
    return result;
}

AdvectResult advect(const FourierField& field, const Wavevector& k, int alpha, int out_radius)
{
    return advect_by(field, k, polarization(k, alpha), out_radius);
}

CorrectorResult corrector_apply(const FourierField& field, const SigmaTable& sigma, const CorrectorOptions& options)
{
    sigma.validate();
    for (const auto& mode : field.modes()) {
        require(mode.m.norm_inf() <= field.radius(), "field modes exceed its truncation radius");
    }
    const int kmax = sigma.max_norm_inf();
    if (field.radius() > std::numeric_limits<int>::max() / 4 - 2 * kmax) {
        fail(ErrorCode::InvalidArgument, "field and sigma truncations are incompatible");
    }
    CorrectorResult result;
    result.intermediate_radius = field.radius() + 2 * kmax;
    result.field = FourierField(field.radius());

    const std::size_t chunk = std::max<std::size_t>(1, options.chunk);
    const std::size_t n_chunks = (sigma.entries.size() + chunk - 1) / chunk;
    struct Partial {
        FourierField field;
        std::size_t dropped = 0;
    };
    const auto partials = parallel_map(n_chunks, options.threads, [&](std::size_t c) {
        Partial partial{FourierField(field.radius()), 0};
        const std::size_t end = std::min(sigma.entries.size(), (c + 1) * chunk);
        for (std::size_t i = c * chunk; i < end; ++i) {
            const auto& e = sigma.entries[i];
            if (e.sigma == 0.0) {
                continue;
            }
            const Vec3 a = polarization(e.k, e.alpha);
            AdvectResult first = advect_by(field, e.k, a, result.intermediate_radius);
            FourierField mid = options.project ? leray_project(first.field) : std::move(first.field);
            AdvectResult second = advect_by(mid, -e.k, a, result.intermediate_radius);
            FourierField back = options.project ? leray_project(second.field) : std::move(second.field);
            const FourierField kept = back.restricted(field.radius());
            partial.dropped += first.dropped + second.dropped + (back.size() - kept.size());
            partial.field.axpy(0.5 * e.sigma * e.sigma, kept);
        }
        return partial;
    });
    for (const auto& partial : partials) {
        result.field.axpy(1.0, partial.field);
        result.dropped += partial.dropped;
    }

    const double in_scale = std::max(1.0, field.max_abs());
    if (field.conjugate_asymmetry() <= 1e-13 * in_scale) {
        const double out_scale = std::max(1.0, result.field.max_abs());
        if (result.field.conjugate_asymmetry() > 1e-13 * out_scale) {
            fail(ErrorCode::OracleMismatch, "corrector output lost conjugate symmetry");
        }
    }
    return result;
}

double single_mode_multiplier(const SigmaTable& sigma, const Wavevector& m)
{
    std::vector<double> terms;
    terms.reserve(sigma.entries.size());
    for (const auto& e : sigma.entries) {
        const double am = dot(polarization(e.k, e.alpha), m);
        terms.push_back(0.5 * e.sigma * e.sigma * am * am);
    }
    return -kFourPiSq * pairwise_sum(terms);
}

NuSigmaProbe probe_nu_sigma(const SigmaTable& sigma, unsigned threads)
{
    NuSigmaProbe probe;
    probe.modes = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0}, {1, -1, 2}, {2, 1, -1}, {1, 2, 3}, {3, -2, 1}};
    CorrectorOptions options;
    options.project = false;
    options.threads = threads;
    for (const auto& m : probe.modes) {
        FourierField unit(m.norm_inf());
        unit.add(m, CVec3{1.0, 0.0, 0.0});
        const CorrectorResult r = corrector_apply(unit, sigma, options);
        const CVec3 v = r.field.at(m);
        probe.values.push_back(v[0].real() / (-kFourPiSq * double(m.norm2())));
    }
    const auto [lo, hi] = std::minmax_element(probe.values.begin(), probe.values.end());
    probe.mean = pairwise_sum(probe.values) / double(probe.values.size());
    probe.relative_spread = probe.mean != 0.0 ? (*hi - *lo) / std::abs(probe.mean) : (*hi - *lo);
    return probe;
}

double nu_sigma(const SigmaTable& sigma, unsigned threads)
{
    require(sigma.radially_constant(), "sigma is not isotropic: it must depend on |k| only");
    const NuSigmaProbe probe = probe_nu_sigma(sigma, threads);
    require(probe.relative_spread <= 1e-10, "sigma is not isotropic: the Laplacian multiplier depends on the mode");
    return probe.mean;
}

std::vector<Wavevector> shell_modes(int n)
{
    require(n >= 1, "shell index must be at least 1");
    const long lo = long(n) * n;
    const long hi = 4 * lo;
    std::vector<Wavevector> modes;
    for (int x = -2 * n; x <= 2 * n; ++x) {
        for (int y = -2 * n; y <= 2 * n; ++y) {
            for (int z = -2 * n; z <= 2 * n; ++z) {
                const Wavevector k{x, y, z};
                if (k.norm2() >= lo && k.norm2() < hi) {
                    modes.push_back(k);
                }
            }
        }
    }
    return modes;
}

SigmaTable shell_sigma(int n, double nu_target)
{
    require(std::isfinite(nu_target) && nu_target > 0.0, "target viscosity must be positive");
    const auto modes = shell_modes(n);
    require(!modes.empty(), "empty shell");
    const double s = std::sqrt(3.0 * nu_target / double(modes.size()));
    SigmaTable table;
    table.entries.reserve(2 * modes.size());
    for (const auto& k : modes) {
        table.entries.push_back({k, 0, s});
        table.entries.push_back({k, 1, s});
    }
    return table;
}

FourierField random_solenoidal_field(double radius, std::uint64_t seed, std::uint64_t stream)
{
    require(radius >= 1.0, "test field radius must be at least 1");
    const int r = static_cast<int>(std::floor(radius));
    const double r2 = radius * radius;
    const auto key = philox_key(seed);
    FourierField field(r);
    std::uint32_t index = 0;
    for (int x = -r; x <= r; ++x) {
        for (int y = -r; y <= r; ++y) {
            for (int z = -r; z <= r; ++z) {
                const Wavevector m{x, y, z};
                if (!(Wavevector{} < m) || double(m.norm2()) > r2) {
                    continue;
                }
                CVec3 v;
                for (std::uint32_t c = 0; c < 3; ++c) {
                    const auto [re, im] = normal_pair(
                        {index, static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), c},
                        key);
                    v[c] = {re, im};
                }
                ++index;
                v = leray_project(m, v);
                field.add(m, v);
                field.add(-m, {std::conj(v[0]), std::conj(v[1]), std::conj(v[2])});
            }
        }
    }
    return field;
}

RemainderFit remainder_fit(const SigmaTable& sigma, std::span<const FourierField> test_fields, unsigned threads)
{
    RemainderFit fit;
    fit.nu_sigma = sigma.entries.empty() ? 0.0 : probe_nu_sigma(sigma, threads).mean;
    CorrectorOptions options;
    options.project = true;
    options.threads = threads;
    std::vector<double> num;
    std::vector<double> den;
    std::vector<FourierField> remainders;
    std::vector<FourierField> laplacians;
    for (const auto& xi : test_fields) {
        require(xi.max_divergence() <= 1e-12 * std::max(1.0, xi.max_abs()), "test fields must be divergence-free");
        const CorrectorResult s = corrector_apply(xi, sigma, options);
        fit.dropped += s.dropped;
        FourierField lap = laplacian(xi);
        FourierField rem = s.field;
        rem.axpy(-fit.nu_sigma, lap);
        num.push_back(FourierField::inner(rem, lap));
        den.push_back(FourierField::inner(lap, lap));
        remainders.push_back(std::move(rem));
        laplacians.push_back(std::move(lap));
    }
    const double d = pairwise_sum(den);
    require(d > 0.0, "degenerate test set: every Laplacian vanishes");
    fit.c_hat = pairwise_sum(num) / d;

    std::vector<double> misfit;
    std::vector<double> total;
    for (std::size_t i = 0; i < remainders.size(); ++i) {
        FourierField diff = remainders[i];
        diff.axpy(-fit.c_hat, laplacians[i]);
        misfit.push_back(FourierField::inner(diff, diff));
        total.push_back(FourierField::inner(remainders[i], remainders[i]));
    }
    const double t = pairwise_sum(total);
    fit.residual = t > 0.0 ? std::sqrt(pairwise_sum(misfit) / t) : 0.0;
    return fit;
}

void write_field_csv(std::ostream& out, const FourierField& field)
{
    out << "mx,my,mz,re1,im1,re2,im2,re3,im3\n";
    for (const auto& mode : field.modes()) {
        out << mode.m.x << ',' << mode.m.y << ',' << mode.m.z;
        for (const auto& c : mode.value) {
            out << ',' << format_real(c.real()) << ',' << format_real(c.imag());
        }
        out << '\n';
    }
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows)
{
    out << "N,nu_sigma,c_hat,residual\n";
    for (const auto& row : rows) {
        out << row.n << ',' << format_real(row.nu_sigma) << ',' << format_real(row.c_hat) << ','
            << format_real(row.residual) << '\n';
    }
}

} // namespace dyadic
