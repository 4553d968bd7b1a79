//! Closed-form spectral data of the linearization at the trivial state.
//!
//! On mode `(j,k)` the linear part `−iΩ∂_t − ∂_ss + ω(u + ū)` acts on the pair
//! `(a, b)` through a symmetric 2×2 block. [`Convention::Physical`] is the block of
//! that map; [`Convention::Printed`] flips the sign of the off-diagonal (`Ω → −Ω`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{build_lattice, mode_weight, LatticeSite, SymmetricField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Convention {
    #[default]
    Physical,
    Printed,
}

impl Convention {
    fn sign(self) -> f64 {
        match self {
            Convention::Physical => 1.0,
            Convention::Printed => -1.0,
        }
    }
}

/// Block `[[k²+2ω, ±Ωj], [±Ωj, k²]]`.
pub fn block_matrix(j: usize, k: usize, big_omega: f64, omega: f64, conv: Convention) -> [[f64; 2]; 2] {
    let k2 = (k * k) as f64;
    let c = conv.sign() * big_omega * j as f64;
    [[k2 + 2.0 * omega, c], [c, k2]]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub site: LatticeSite,
    pub lambda: f64,
    pub vector: [f64; 2],
    pub omega: f64,
    pub big_omega: f64,
}

/// Eigenvalue and unit eigenvector (gauge `a ≥ 0`) of the block at `site`.
pub fn eigenpair(site: LatticeSite, big_omega: f64, omega: f64, conv: Convention) -> EigenPair {
    let (lambda, vector) = eigen_raw(site, big_omega, omega, conv);
    EigenPair { site, lambda, vector, omega, big_omega }
}

fn eigen_raw(site: LatticeSite, big_omega: f64, omega: f64, conv: Convention) -> (f64, [f64; 2]) {
    let k2 = (site.k * site.k) as f64;
    if site.j == 0 {
        return (k2 + 2.0 * omega, [1.0, 0.0]);
    }
    let c = conv.sign() * big_omega * site.j as f64;
    let r = (c * c + omega * omega).sqrt();
    if site.l > 0 {
        let n = (2.0 * r * (r + omega)).sqrt();
        (k2 + omega + r, [(omega + r) / n, c / n])
    } else {
        let gap = c * c / (r + omega);
        let n = (2.0 * r * gap).sqrt();
        (k2 - gap, [gap / n, -c / n])
    }
}

pub fn eigenvalue(site: LatticeSite, big_omega: f64, omega: f64) -> f64 {
    eigen_raw(site, big_omega, omega, Convention::Physical).0
}

/// `∂λ/∂Ω = l·j²Ω/√(j²Ω²+ω²)`.
pub fn eigenvalue_slope(site: LatticeSite, big_omega: f64, omega: f64) -> f64 {
    let j2 = (site.j * site.j) as f64;
    if site.j == 0 {
        return 0.0;
    }
    site.l as f64 * j2 * big_omega / (j2 * big_omega * big_omega + omega * omega).sqrt()
}

/// `Ω_{j,k} = j⁻¹√(k⁴+2k²ω)`, the zero of `λ_{j,k,−1}`.
pub fn resonance_frequency(j: usize, k: usize, omega: f64) -> Result<f64> {
    if j == 0 {
        return Err(Error::InvalidParameter("resonance frequency needs j >= 1".into()));
    }
    let k2 = (k * k) as f64;
    Ok((k2 * k2 + 2.0 * k2 * omega).sqrt() / j as f64)
}

/// Bifurcation frequency `√(1+2ω)`.
pub fn omega0(omega: f64) -> f64 {
    (1.0 + 2.0 * omega).sqrt()
}

/// `det M_{j,k}(Ω₀) = 2(k²−j²)ω + (k⁴−j²)`.
pub fn block_determinant(j: usize, k: usize, omega: f64) -> f64 {
    let (j2, k2) = ((j * j) as f64, (k * k) as f64);
    2.0 * (k2 - j2) * omega + (k2 * k2 - j2)
}

/// Sites with `j + k < radius` and `|λ| ≤ tol`.
pub fn kernel_sites(big_omega: f64, omega: f64, radius: usize, tol: f64) -> Vec<LatticeSite> {
    build_lattice(radius)
        .into_iter()
        .filter(|s| eigenvalue(*s, big_omega, omega).abs() <= tol)
        .collect()
}

/// Initial ball radius of the dyadic annuli used for clustering.
pub const DEFAULT_L0: usize = 8;

/// Index `n` of the dyadic annulus `L₀2^{n−1} ≤ j+k < L₀2^n` (0 for the initial ball).
pub fn stage_of(radius: usize, l0: usize) -> usize {
    let mut n = 0;
    let mut outer = l0;
    while radius >= outer {
        outer *= 2;
        n += 1;
    }
    n
}

/// Cluster radius `ℓ = ⌈√L⌉`.
pub fn cluster_radius(ball: usize) -> usize {
    (ball as f64).sqrt().ceil() as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub center: LatticeSite,
    pub sites: Vec<LatticeSite>,
    pub stage: usize,
    pub ell: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteClassification {
    pub d0: f64,
    pub regular: Vec<LatticeSite>,
    pub clusters: Vec<Cluster>,
    pub ell: usize,
    /// `min |j₁−j₂|/(k₁+k₂)` over singular pairs, if there are at least two.
    pub separation_constant: Option<f64>,
}

impl SiteClassification {
    pub fn singular(&self) -> Vec<LatticeSite> {
        self.clusters.iter().flat_map(|c| c.sites.iter().copied()).collect()
    }
}

pub fn classify_and_cluster(big_omega: f64, omega: f64, radius: usize, d0: f64) -> Result<SiteClassification> {
    classify_with_base(big_omega, omega, radius, d0, DEFAULT_L0)
}

pub fn classify_with_base(
    big_omega: f64,
    omega: f64,
    radius: usize,
    d0: f64,
    l0: usize,
) -> Result<SiteClassification> {
    if !(d0 > 0.0) || l0 == 0 {
        return Err(Error::InvalidParameter("d0 must be positive and L0 >= 1".into()));
    }
    let mut regular = Vec::new();
    let mut singular = Vec::new();
    for site in build_lattice(radius) {
        if eigenvalue(site, big_omega, omega).abs() <= d0 {
            if site.l > 0 {
                return Err(Error::ThresholdTooLarge(format!("+1 site {site:?} is singular")));
            }
            singular.push(site);
        } else {
            regular.push(site);
        }
    }
    let mut clusters = Vec::new();
    for &site in &singular {
        let stage = stage_of(site.radius(), l0);
        let ell = cluster_radius(l0 << stage);
        clusters.push(Cluster { center: site, sites: vec![site], stage, ell });
    }
    for (i, a) in clusters.iter().enumerate() {
        for b in &clusters[i + 1..] {
            if a.stage == b.stage && a.center.distance(&b.center) <= 4 * a.ell {
                return Err(Error::ThresholdTooLarge(format!(
                    "singular sites {:?} and {:?} within 4ℓ = {}",
                    a.center,
                    b.center,
                    4 * a.ell
                )));
            }
        }
    }
    let mut separation_constant: Option<f64> = None;
    for (i, a) in singular.iter().enumerate() {
        for b in &singular[i + 1..] {
            let c = a.j.abs_diff(b.j) as f64 / (a.k + b.k).max(1) as f64;
            separation_constant = Some(separation_constant.map_or(c, |m| m.min(c)));
        }
    }
    Ok(SiteClassification {
        d0,
        regular,
        clusters,
        ell: cluster_radius(radius),
        separation_constant,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiophantineParams {
    pub gamma: f64,
    pub tau: f64,
    pub q_max: u64,
}

impl Default for DiophantineParams {
    fn default() -> Self {
        DiophantineParams { gamma: 0.1, tau: 1.0, q_max: 100 }
    }
}

/// `min_{1≤q≤q_max} |qω − p| q^τ` with `p` the nearest integer.
pub fn diophantine_margin(omega: f64, p: &DiophantineParams) -> Result<f64> {
    if p.q_max < 2 {
        return Err(Error::InvalidParameter("q_max must be at least 2".into()));
    }
    Ok((1..=p.q_max)
        .map(|q| {
            let x = q as f64 * omega;
            (x - x.round()).abs() * (q as f64).powf(p.tau)
        })
        .fold(f64::INFINITY, f64::min))
}

/// Orthonormal eigenbasis `e_x = v_l(j,k)/√w_{jk}` at fixed `(Ω, ω)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenBasis {
    pub big_omega: f64,
    pub omega: f64,
    pub conv: Convention,
}

impl EigenBasis {
    pub fn new(big_omega: f64, omega: f64, conv: Convention) -> Self {
        EigenBasis { big_omega, omega, conv }
    }

    pub fn pair(&self, site: LatticeSite) -> EigenPair {
        eigenpair(site, self.big_omega, self.omega, self.conv)
    }

    /// `⟨u, e_x⟩`.
    pub fn coord(&self, u: &SymmetricField, site: LatticeSite) -> f64 {
        let (a, b) = u.get(site.j, site.k);
        let v = self.pair(site).vector;
        mode_weight(site.j, site.k).sqrt() * (a * v[0] + b * v[1])
    }

    pub fn coords(&self, u: &SymmetricField, sites: &[LatticeSite]) -> Vec<f64> {
        sites.iter().map(|&s| self.coord(u, s)).collect()
    }

    /// `(a, b)` coefficients of `e_x`.
    pub fn basis_coeffs(&self, site: LatticeSite) -> (f64, f64) {
        let v = self.pair(site).vector;
        let w = mode_weight(site.j, site.k).sqrt();
        (v[0] / w, v[1] / w)
    }

    pub fn basis_field(&self, site: LatticeSite, radius: usize) -> SymmetricField {
        let (a, b) = self.basis_coeffs(site);
        SymmetricField::mode(site.j, site.k, a, b, radius)
    }

    /// `Σ c_x e_x` on the given radius.
    pub fn field(&self, sites: &[LatticeSite], coords: &[f64], radius: usize) -> SymmetricField {
        let mut u = SymmetricField::zeros(radius);
        for (&site, &c) in sites.iter().zip(coords) {
            let (a, b) = self.basis_coeffs(site);
            let (a0, b0) = u.get(site.j, site.k);
            u.set(site.j, site.k, a0 + c * a, b0 + c * b);
        }
        u
    }
}

/// Kernel site `(1,1,−1)`.
pub const KERNEL_SITE: LatticeSite = LatticeSite { j: 1, k: 1, l: -1 };
