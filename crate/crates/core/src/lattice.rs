//! Symmetry-reduced Fourier lattice and symmetric fields.
//!
//! A field is stored as real coefficients of
//! `u(t,s) = Σ_k a_{0,k} cos ks + Σ_{j≥1,k} (a_{j,k} cos jt + i b_{j,k} sin jt) cos ks`
//! restricted to the ball `j + k < radius`.

use std::cmp::Ordering;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lattice point `(j, k, l)` with `l = ±1` selecting the eigen-branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeSite {
    pub j: usize,
    pub k: usize,
    pub l: i8,
}

impl LatticeSite {
    pub fn new(j: usize, k: usize, l: i8) -> Result<Self> {
        let site = LatticeSite { j, k, l };
        if site.is_member() {
            Ok(site)
        } else {
            Err(Error::InvalidParameter(format!("({j},{k},{l}) is not a lattice site")))
        }
    }

    pub fn is_member(&self) -> bool {
        match self.l {
            1 => true,
            -1 => self.j >= 1,
            _ => false,
        }
    }

    /// ℓ¹ length `j + k`.
    pub fn radius(&self) -> usize {
        self.j + self.k
    }

    /// ℓ¹ distance between the underlying `(j,k)` points.
    pub fn distance(&self, other: &LatticeSite) -> usize {
        self.j.abs_diff(other.j) + self.k.abs_diff(other.k)
    }

    fn key(&self) -> (usize, usize, usize, i8) {
        (self.j + self.k, self.j, self.k, -self.l)
    }
}

impl Ord for LatticeSite {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for LatticeSite {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All sites with `j + k < radius`, in canonical order.
pub fn build_lattice(radius: usize) -> Vec<LatticeSite> {
    let mut sites = Vec::new();
    for n in 0..radius {
        for j in 0..=n {
            let k = n - j;
            sites.push(LatticeSite { j, k, l: 1 });
            if j >= 1 {
                sites.push(LatticeSite { j, k, l: -1 });
            }
        }
    }
    sites
}

/// Sites with `inner <= j + k < outer`.
pub fn annulus(inner: usize, outer: usize) -> Vec<LatticeSite> {
    build_lattice(outer)
        .into_iter()
        .filter(|s| s.radius() >= inner)
        .collect()
}

/// Weight of the `(j,k)` block in the normalized L² inner product.
pub fn mode_weight(j: usize, k: usize) -> f64 {
    let wj = if j == 0 { 1.0 } else { 0.5 };
    let wk = if k == 0 { 1.0 } else { 0.5 };
    wj * wk
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NormParams {
    pub sigma: f64,
    pub s_weight: f64,
}

impl Default for NormParams {
    fn default() -> Self {
        NormParams { sigma: 0.1, s_weight: 2.0 }
    }
}

impl NormParams {
    pub fn new(sigma: f64, s_weight: f64) -> Result<Self> {
        if !(sigma >= 0.0) || !(s_weight > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "norm parameters need sigma >= 0 and s_weight > 1 (got {sigma}, {s_weight})"
            )));
        }
        Ok(NormParams { sigma, s_weight })
    }

    /// `e^{2σ(j+k)} (1+j²+k²)^s`, the squared weight of mode `(j,k)`.
    pub fn weight_sq(&self, j: usize, k: usize) -> f64 {
        let (jf, kf) = (j as f64, k as f64);
        (2.0 * self.sigma * (jf + kf)).exp() * (1.0 + jf * jf + kf * kf).powf(self.s_weight)
    }

    /// `e^{σ|Δ|} ⟨Δ⟩^s` for an index difference.
    pub fn offset_weight(&self, dj: usize, dk: usize) -> f64 {
        self.weight_sq(dj, dk).sqrt()
    }
}

/// Truncated Fourier series in the symmetric class.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricField {
    radius: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl SymmetricField {
    pub fn zeros(radius: usize) -> Self {
        let radius = radius.max(1);
        SymmetricField { radius, a: vec![0.0; radius * radius], b: vec![0.0; radius * radius] }
    }

    pub fn constant(c: f64, radius: usize) -> Self {
        let mut u = Self::zeros(radius);
        u.a[0] = c;
        u
    }

    /// `a cos jt cos ks + i b sin jt cos ks` as a single mode.
    pub fn mode(j: usize, k: usize, a: f64, b: f64, radius: usize) -> Self {
        let mut u = Self::zeros(radius.max(j + k + 1));
        u.set(j, k, a, b);
        u
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    #[inline]
    fn idx(&self, j: usize, k: usize) -> usize {
        j * self.radius + k
    }

    /// Coefficients `(a, b)` of mode `(j,k)`; zero outside the ball.
    #[inline]
    pub fn get(&self, j: usize, k: usize) -> (f64, f64) {
        if j + k < self.radius {
            let i = self.idx(j, k);
            (self.a[i], self.b[i])
        } else {
            (0.0, 0.0)
        }
    }

    /// Sets mode `(j,k)`; `b` is dropped for `j = 0`. Modes outside the ball are ignored.
    pub fn set(&mut self, j: usize, k: usize, a: f64, b: f64) {
        if j + k < self.radius {
            let i = self.idx(j, k);
            self.a[i] = a;
            self.b[i] = if j == 0 { 0.0 } else { b };
        }
    }

    #[inline]
    fn add_at(&mut self, j: usize, k: usize, a: f64, b: f64) {
        if j + k < self.radius {
            let i = self.idx(j, k);
            self.a[i] += a;
            self.b[i] += b;
        }
    }

    /// Nonzero modes as `(j, k, a, b)`.
    pub fn modes(&self) -> Vec<(usize, usize, f64, f64)> {
        let mut out = Vec::new();
        for n in 0..self.radius {
            for j in 0..=n {
                let (a, b) = self.get(j, n - j);
                if a != 0.0 || b != 0.0 {
                    out.push((j, n - j, a, b));
                }
            }
        }
        out
    }

    /// Smallest radius holding every nonzero mode.
    pub fn support_radius(&self) -> usize {
        self.modes().iter().map(|m| m.0 + m.1 + 1).max().unwrap_or(1)
    }

    /// Copy with a new radius (extended with zeros or truncated).
    pub fn with_radius(&self, radius: usize) -> Self {
        let mut out = Self::zeros(radius);
        for (j, k, a, b) in self.modes() {
            out.set(j, k, a, b);
        }
        out
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.a.iter_mut().for_each(|x| *x *= c);
        out.b.iter_mut().for_each(|x| *x *= c);
        out
    }

    /// `self + c·other` on the larger radius.
    pub fn axpy(&self, c: f64, other: &SymmetricField) -> Self {
        let mut out = self.with_radius(self.radius.max(other.radius));
        for (j, k, a, b) in other.modes() {
            out.add_at(j, k, c * a, c * b);
        }
        out
    }

    pub fn add(&self, other: &SymmetricField) -> Self {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &SymmetricField) -> Self {
        self.axpy(-1.0, other)
    }

    /// Complex conjugate: `b → −b`.
    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        out.b.iter_mut().for_each(|x| *x = -*x);
        out
    }

    /// `i ∂_t u`: `(a, b) → (−j b, −j a)`.
    pub fn i_dt(&self) -> Self {
        let mut out = Self::zeros(self.radius);
        for (j, k, a, b) in self.modes() {
            let jf = j as f64;
            out.set(j, k, -jf * b, -jf * a);
        }
        out
    }

    /// `−∂_ss u`: multiplies mode `k` by `k²`.
    pub fn neg_dss(&self) -> Self {
        let mut out = self.clone();
        for j in 0..self.radius {
            for k in 0..self.radius - j {
                let i = self.idx(j, k);
                let k2 = (k * k) as f64;
                out.a[i] *= k2;
                out.b[i] *= k2;
            }
        }
        out
    }

    /// Pointwise product truncated to the larger of the two radii.
    pub fn multiply(&self, other: &SymmetricField) -> Self {
        self.multiply_to(other, self.radius.max(other.radius))
    }

    /// Exact product on the doubled radius (no truncation).
    pub fn multiply_exact(&self, other: &SymmetricField) -> Self {
        self.multiply_to(other, self.support_radius() + other.support_radius() - 1)
    }

    /// Pointwise product keeping modes with `j + k < radius`.
    pub fn multiply_to(&self, other: &SymmetricField, radius: usize) -> Self {
        let mut out = Self::zeros(radius);
        let rhs: Vec<_> = other.modes().into_iter().map(|m| (m, m.2.abs() + m.3.abs())).collect();
        for (j1, k1, a1, b1) in self.modes() {
            let size = a1.abs() + b1.abs();
            for &((j2, k2, a2, b2), size2) in &rhs {
                if size * size2 < PRUNE || j1.abs_diff(j2) + k1.abs_diff(k2) >= radius {
                    continue;
                }
                accumulate_product(&mut out, (j1, k1, a1, b1), (j2, k2, a2, b2));
            }
        }
        out
    }

    /// Real inner product `⟨u, v⟩ = Re (4π²)⁻¹ ∫∫ u v̄`.
    pub fn inner(&self, other: &SymmetricField) -> f64 {
        let mut acc = 0.0;
        for (j, k, a, b) in self.modes() {
            let (a2, b2) = other.get(j, k);
            acc += mode_weight(j, k) * (a * a2 + b * b2);
        }
        acc
    }

    pub fn sigma_norm(&self, p: &NormParams) -> f64 {
        let mut acc = 0.0;
        for (j, k, a, b) in self.modes() {
            acc += mode_weight(j, k) * (a * a + b * b) * p.weight_sq(j, k);
        }
        acc.sqrt()
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.a.iter().chain(self.b.iter()).fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn evaluate(&self, t: f64, s: f64) -> Complex64 {
        let mut re = 0.0;
        let mut im = 0.0;
        for (j, k, a, b) in self.modes() {
            let cs = (k as f64 * s).cos();
            let jt = j as f64 * t;
            re += a * jt.cos() * cs;
            im += b * jt.sin() * cs;
        }
        Complex64::new(re, im)
    }

    pub fn to_file(&self, omega: Option<f64>) -> FieldFile {
        let mut entries = Vec::new();
        for n in 0..self.radius {
            for j in 0..=n {
                let (a, b) = self.get(j, n - j);
                if j == 0 {
                    entries.push(vec![0.0, (n - j) as f64, a]);
                } else {
                    entries.push(vec![j as f64, (n - j) as f64, a, b]);
                }
            }
        }
        FieldFile { radius: self.radius, omega, entries }
    }

    pub fn from_file(file: &FieldFile) -> Result<Self> {
        let mut u = Self::zeros(file.radius);
        for e in &file.entries {
            let bad = || Error::InvalidParameter(format!("malformed field entry {e:?}"));
            if e.len() < 3 || e[0] < 0.0 || e[1] < 0.0 || e[0].fract() != 0.0 || e[1].fract() != 0.0 {
                return Err(bad());
            }
            let (j, k) = (e[0] as usize, e[1] as usize);
            if j + k >= file.radius {
                return Err(bad());
            }
            let b = match (j, e.len()) {
                (0, 3) => 0.0,
                (_, 4) if j > 0 => e[3],
                _ => return Err(bad()),
            };
            u.set(j, k, e[2], b);
        }
        Ok(u)
    }
}

/// Pairs of modes whose coefficient product is below this are skipped.
const PRUNE: f64 = 1e-60;

#[inline]
pub(crate) fn accumulate_product(
    out: &mut SymmetricField,
    (j1, k1, a1, b1): (usize, usize, f64, f64),
    (j2, k2, a2, b2): (usize, usize, f64, f64),
) {
    // temporal factor (a1 cos + i b1 sin)(a2 cos + i b2 sin)
    let sum_a = 0.5 * (a1 * a2 + b1 * b2);
    let diff_a = 0.5 * (a1 * a2 - b1 * b2);
    let sum_b = 0.5 * (a1 * b2 + b1 * a2);
    let diff_b = 0.5 * (b1 * a2 - a1 * b2);
    let jp = j1 + j2;
    let (jm, sign) = if j1 >= j2 { (j1 - j2, 1.0) } else { (j2 - j1, -1.0) };
    let kp = k1 + k2;
    let km = k1.abs_diff(k2);
    // spatial factor ½[cos(k1+k2)s + cos|k1−k2|s]
    for k in [kp, km] {
        out.add_at(jp, k, 0.5 * sum_a, 0.5 * sum_b);
        let b = if jm == 0 { 0.0 } else { 0.5 * sign * diff_b };
        out.add_at(jm, k, 0.5 * diff_a, b);
    }
}

/// On-disk field format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldFile {
    #[serde(rename = "L")]
    pub radius: usize,
    pub omega: Option<f64>,
    pub entries: Vec<Vec<f64>>,
}
