//! Residual map, its linearization `H = D + T` on lattice sites, weighted operator
//! norms, block inverses and the block preconditioner.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{mode_weight, LatticeSite, NormParams, SymmetricField};
use crate::spectrum::{Convention, EigenBasis};

/// Powers below this sup-size end the nonlinearity series.
const SERIES_TOL: f64 = 1e-18;
/// Bound on `Σ|a|+|b|` (a bound for `sup|u|`) above which the series is refused.
const STATE_LIMIT: f64 = 0.9;

fn l1_size(u: &SymmetricField) -> f64 {
    u.modes().iter().map(|m| m.2.abs() + m.3.abs()).sum()
}

/// `Σ_{n≥1} c_n zⁿ` on the given radius for `z` with `sup|z| < 1`.
fn power_series(z: &SymmetricField, radius: usize, coeff: impl Fn(usize) -> f64) -> Result<SymmetricField> {
    let size = l1_size(z);
    if size >= STATE_LIMIT {
        return Err(Error::StateTooLarge(size));
    }
    let z = z.with_radius(radius);
    let mut power = z.clone();
    let mut sum = z.scale(coeff(1));
    for n in 2..2000 {
        power = power.multiply_to(&z, radius);
        let c = coeff(n);
        if power.max_abs() * c.abs().max(1.0) < SERIES_TOL {
            return Ok(sum);
        }
        sum = sum.axpy(c, &power);
    }
    Err(Error::StateTooLarge(size))
}

/// `G(z) = −z²/(1+z)`, the nonlinear part of `ω(1 − |1+u|⁻²)(1+u)` evaluated at `z = ū`.
pub fn nonlinearity(u: &SymmetricField, radius: usize) -> Result<SymmetricField> {
    let work = 2 * radius.max(u.support_radius());
    let g = power_series(&u.conj(), work, |n| if n == 1 { 0.0 } else if n % 2 == 0 { -1.0 } else { 1.0 })?;
    Ok(g.with_radius(radius))
}

/// `ω G'(ū) = ω(−1 + (1+ū)⁻²)`, the multiplier acting on `δ̄` in the linearization.
pub fn multiplier(u: &SymmetricField, omega: f64, radius: usize) -> Result<SymmetricField> {
    let work = radius.max(2 * u.support_radius());
    let h = power_series(&u.conj(), work, |n| {
        let c = (n + 1) as f64;
        if n % 2 == 0 { c } else { -c }
    })?;
    Ok(h.with_radius(radius).scale(omega))
}

/// `f(u; Ω) = −iΩ∂_t u − ∂_ss u + ω(u + ū) + ωG(ū)` truncated to `radius`.
pub fn residual(u: &SymmetricField, big_omega: f64, omega: f64, radius: usize) -> Result<SymmetricField> {
    let u = u.with_radius(radius);
    let linear = u
        .i_dt()
        .scale(-big_omega)
        .add(&u.neg_dss())
        .add(&u.add(&u.conj()).scale(omega));
    Ok(linear.add(&nonlinearity(&u, radius)?.scale(omega)))
}

/// Hash of the field coefficients and parameters, for operator metadata.
pub fn fingerprint(u: &SymmetricField, big_omega: f64, omega: f64) -> u64 {
    use std::hash::{Hash, Hasher};
    let mut h = std::collections::hash_map::DefaultHasher::new();
    for (j, k, a, b) in u.modes() {
        (j, k, a.to_bits(), b.to_bits()).hash(&mut h);
    }
    big_omega.to_bits().hash(&mut h);
    omega.to_bits().hash(&mut h);
    h.finish()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorMeta {
    pub big_omega: f64,
    pub omega: f64,
    pub fingerprint: u64,
}

/// Real matrix indexed by lattice sites in the eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeOperator {
    pub rows: Vec<LatticeSite>,
    pub cols: Vec<LatticeSite>,
    pub matrix: DMatrix<f64>,
    pub meta: OperatorMeta,
}

fn index_of(sites: &[LatticeSite]) -> HashMap<LatticeSite, usize> {
    sites.iter().enumerate().map(|(i, s)| (*s, i)).collect()
}

impl LatticeOperator {
    pub fn identity(sites: &[LatticeSite]) -> Self {
        let n = sites.len();
        LatticeOperator {
            rows: sites.to_vec(),
            cols: sites.to_vec(),
            matrix: DMatrix::identity(n, n),
            meta: OperatorMeta { big_omega: 0.0, omega: 0.0, fingerprint: 0 },
        }
    }

    pub fn from_matrix(rows: &[LatticeSite], cols: &[LatticeSite], matrix: DMatrix<f64>, meta: OperatorMeta) -> Self {
        assert_eq!((matrix.nrows(), matrix.ncols()), (rows.len(), cols.len()));
        LatticeOperator { rows: rows.to_vec(), cols: cols.to_vec(), matrix, meta }
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.matrix * x
    }

    /// Row-major `f64` dump with a JSON header `<path>.json` naming the site order.
    pub fn write_dump(&self, path: &Path) -> std::io::Result<()> {
        #[derive(Serialize)]
        struct Header<'a> {
            rows: &'a [LatticeSite],
            cols: &'a [LatticeSite],
            meta: OperatorMeta,
            layout: &'static str,
        }
        let header = Header { rows: &self.rows, cols: &self.cols, meta: self.meta, layout: "row-major f64 little-endian" };
        std::fs::write(path.with_extension("json"), serde_json::to_vec_pretty(&header)?)?;
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        for i in 0..self.matrix.nrows() {
            for j in 0..self.matrix.ncols() {
                f.write_all(&self.matrix[(i, j)].to_le_bytes())?;
            }
        }
        f.flush()
    }
}

/// `(a,b)` contribution at output mode `x` of `h · (a2 cos j2t + i b2 sin j2t) cos k2s`.
fn product_entry(h: &SymmetricField, (j2, k2, a2, b2): (usize, usize, f64, f64), (jx, kx): (usize, usize)) -> (f64, f64) {
    let mut js = [jx.abs_diff(j2), jx + j2];
    let mut ks = [kx.abs_diff(k2), kx + k2];
    let nj = if js[0] == js[1] { 1 } else { 2 };
    let nk = if ks[0] == ks[1] { 1 } else { 2 };
    js.sort_unstable();
    ks.sort_unstable();
    let (mut ra, mut rb) = (0.0, 0.0);
    for &j1 in &js[..nj] {
        for &k1 in &ks[..nk] {
            let (a1, b1) = h.get(j1, k1);
            if a1 == 0.0 && b1 == 0.0 {
                continue;
            }
            let (pa, pb) = product_at((j1, k1, a1, b1), (j2, k2, a2, b2), (jx, kx));
            ra += pa;
            rb += pb;
        }
    }
    (ra, rb)
}

/// Contribution of one mode product to a single output mode.
fn product_at(
    (j1, k1, a1, b1): (usize, usize, f64, f64),
    (j2, k2, a2, b2): (usize, usize, f64, f64),
    (jx, kx): (usize, usize),
) -> (f64, f64) {
    let kfac = 0.5 * ((k1 + k2 == kx) as u8 as f64 + (k1.abs_diff(k2) == kx) as u8 as f64);
    if kfac == 0.0 {
        return (0.0, 0.0);
    }
    let (mut ra, mut rb) = (0.0, 0.0);
    if j1 + j2 == jx {
        ra += 0.5 * (a1 * a2 + b1 * b2);
        rb += 0.5 * (a1 * b2 + b1 * a2);
    }
    if j1.abs_diff(j2) == jx {
        ra += 0.5 * (a1 * a2 - b1 * b2);
        if jx != 0 {
            let sign = if j1 >= j2 { 1.0 } else { -1.0 };
            rb += 0.5 * sign * (b1 * a2 - a1 * b2);
        }
    }
    (kfac * ra, kfac * rb)
}

/// Matrix of `δ ↦ h·δ̄` between eigenbasis vectors: entry `(x,y) = ⟨h ē_y, e_x⟩`.
pub fn conjugate_multiplication(
    h: &SymmetricField,
    rows: &[LatticeSite],
    cols: &[LatticeSite],
    basis: &EigenBasis,
) -> DMatrix<f64> {
    let col_coeffs: Vec<(f64, f64)> = cols.iter().map(|&y| basis.basis_coeffs(y)).collect();
    let row_vecs: Vec<([f64; 2], f64)> =
        rows.iter().map(|&x| (basis.pair(x).vector, mode_weight(x.j, x.k).sqrt())).collect();
    let reach = h.support_radius();
    DMatrix::from_fn(rows.len(), cols.len(), |i, c| {
        let (x, y) = (rows[i], cols[c]);
        if x.distance(&y) >= reach {
            return 0.0;
        }
        let (a2, b2) = col_coeffs[c];
        let (pa, pb) = product_entry(h, (y.j, y.k, a2, -b2), (x.j, x.k));
        let (v, w) = row_vecs[i];
        w * (pa * v[0] + pb * v[1])
    })
}

/// `H = D(Ω) + T(u)` on `sites` at the full state `u`.
pub fn assemble_hamiltonian(
    u: &SymmetricField,
    big_omega: f64,
    omega: f64,
    sites: &[LatticeSite],
) -> Result<LatticeOperator> {
    let basis = EigenBasis::new(big_omega, omega, Convention::Physical);
    let reach = sites.iter().map(|s| s.radius()).max().unwrap_or(0) + 1;
    let h = multiplier(u, omega, 2 * reach.max(u.support_radius()))?;
    let mut m = conjugate_multiplication(&h, sites, sites, &basis);
    let scale = m.amax().max(1e-300);
    let asym = (&m - m.transpose()).amax();
    if asym > 1e-12 * scale.max(1.0) {
        return Err(Error::NoContraction(format!("assembled T is not symmetric (defect {asym:e})")));
    }
    m = (&m + m.transpose()) * 0.5;
    for (i, &s) in sites.iter().enumerate() {
        m[(i, i)] += basis.pair(s).lambda;
    }
    Ok(LatticeOperator::from_matrix(
        sites,
        sites,
        m,
        OperatorMeta { big_omega, omega, fingerprint: fingerprint(u, big_omega, omega) },
    ))
}

/// Only the interaction part `T` (diagonal `D` removed).
pub fn interaction_part(op: &LatticeOperator) -> DMatrix<f64> {
    let basis = EigenBasis::new(op.meta.big_omega, op.meta.omega, Convention::Physical);
    let mut t = op.matrix.clone();
    if op.is_square() {
        for (i, &s) in op.rows.iter().enumerate() {
            t[(i, i)] -= basis.pair(s).lambda;
        }
    }
    t
}

fn offset_weight(p: &NormParams, x: &LatticeSite, y: &LatticeSite) -> f64 {
    p.offset_weight(x.j.abs_diff(y.j), x.k.abs_diff(y.k))
}

/// `max(sup_x Σ_y |G(x,y)| w(x−y), sup_y Σ_x |G(x,y)| w(x−y))` with `w(Δ) = e^{σ|Δ|}⟨Δ⟩^s`.
pub fn operator_norm_sigma(g: &LatticeOperator, p: &NormParams) -> f64 {
    weighted_norm(&g.matrix, &g.rows, &g.cols, p)
}

pub fn weighted_norm(m: &DMatrix<f64>, rows: &[LatticeSite], cols: &[LatticeSite], p: &NormParams) -> f64 {
    let mut row_sums = vec![0.0; rows.len()];
    let mut col_sums = vec![0.0; cols.len()];
    for (c, y) in cols.iter().enumerate() {
        for (i, x) in rows.iter().enumerate() {
            let v = m[(i, c)];
            if v != 0.0 {
                let w = v.abs() * offset_weight(p, x, y);
                row_sums[i] += w;
                col_sums[c] += w;
            }
        }
    }
    row_sums.into_iter().chain(col_sums).fold(0.0, f64::max)
}

/// `P_A G P_B`, keeping `G`'s ordering.
pub fn restrict_block(g: &LatticeOperator, a: &[LatticeSite], b: &[LatticeSite]) -> Result<LatticeOperator> {
    let ri = index_of(&g.rows);
    let ci = index_of(&g.cols);
    let pick = |set: &[LatticeSite], idx: &HashMap<LatticeSite, usize>| -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(set.len());
        for s in set {
            out.push(*idx.get(s).ok_or_else(|| Error::InvalidParameter(format!("site {s:?} not in operator")))?);
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    };
    let rs = pick(a, &ri)?;
    let cs = pick(b, &ci)?;
    let m = DMatrix::from_fn(rs.len(), cs.len(), |i, j| g.matrix[(rs[i], cs[j])]);
    Ok(LatticeOperator {
        rows: rs.iter().map(|&i| g.rows[i]).collect(),
        cols: cs.iter().map(|&i| g.cols[i]).collect(),
        matrix: m,
        meta: g.meta,
    })
}

/// Blocks up to this size are inverted through a full eigen-decomposition.
const EIGEN_LIMIT: usize = 200;

/// `(P_E H P_E)⁻¹` for a symmetric block whose spectrum stays outside `(−d_floor, d_floor)`.
pub fn invert_block(h: &LatticeOperator, d_floor: f64) -> Result<LatticeOperator> {
    let n = h.rows.len();
    if n == 0 {
        return Ok(LatticeOperator { matrix: DMatrix::zeros(0, 0), ..h.clone() });
    }
    let wrap = |g: DMatrix<f64>| LatticeOperator { rows: h.rows.clone(), cols: h.cols.clone(), matrix: g, meta: h.meta };
    if n <= EIGEN_LIMIT {
        let eig = SymmetricEigen::new(h.matrix.clone());
        let (imin, min_abs) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.abs()))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        if min_abs <= d_floor {
            let site = eig.eigenvectors.column(imin).iamax();
            return Err(Error::SpectrumTooClose { d_floor, min_abs, site: Some(h.rows[site]) });
        }
        let inv_vals = eig.eigenvalues.map(|v| 1.0 / v);
        return Ok(wrap(&eig.eigenvectors * DMatrix::from_diagonal(&inv_vals) * eig.eigenvectors.transpose()));
    }
    let g = h.matrix.clone().lu().try_inverse();
    let Some(g) = g else {
        return Err(Error::SpectrumTooClose { d_floor, min_abs: 0.0, site: None });
    };
    let (rho, vec) = dominant_eigen(&g);
    let min_abs = 1.0 / rho;
    if !(min_abs > d_floor) {
        return Err(Error::SpectrumTooClose { d_floor, min_abs, site: Some(h.rows[vec.iamax()]) });
    }
    Ok(wrap(g))
}

/// Largest `|eigenvalue|` of a symmetric matrix and its eigenvector, by power iteration.
pub fn dominant_eigen(g: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let n = g.nrows();
    let mut x = DVector::from_fn(n, |i, _| 1.0 + 0.01 * ((i * 7919) % 101) as f64);
    x /= x.norm();
    let mut rho = 0.0;
    for _ in 0..500 {
        let y = g * &x;
        let next = y.norm();
        if next == 0.0 {
            return (0.0, x);
        }
        x = y / next;
        if (next - rho).abs() <= 1e-13 * next {
            rho = next;
            break;
        }
        rho = next;
    }
    (rho, x)
}

/// Smallest `|eigenvalue|` of a symmetric block.
pub fn min_abs_eigenvalue(h: &DMatrix<f64>) -> f64 {
    if h.nrows() == 0 {
        return f64::INFINITY;
    }
    SymmetricEigen::new(h.clone()).eigenvalues.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()))
}

/// Splitting `E = B_prev ∪ S ∪ A` with neighbourhoods `C(B_prev)`, `C(S_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub e: Vec<LatticeSite>,
    pub a: Vec<LatticeSite>,
    pub b_prev: Vec<LatticeSite>,
    pub c_b_prev: Vec<LatticeSite>,
    pub clusters: Vec<Vec<LatticeSite>>,
    pub neighborhoods: Vec<Vec<LatticeSite>>,
    pub ell: usize,
}

impl Decomposition {
    /// `B_prev = {x ∈ E : |x| < prev_radius}`; singular clusters are given; `A` is the rest.
    pub fn new(e: &[LatticeSite], prev_radius: usize, clusters: Vec<Vec<LatticeSite>>, ell: usize) -> Result<Self> {
        let in_e: std::collections::HashSet<_> = e.iter().copied().collect();
        let b_prev: Vec<_> = e.iter().copied().filter(|s| s.radius() < prev_radius).collect();
        let mut taken: std::collections::HashSet<_> = b_prev.iter().copied().collect();
        for c in &clusters {
            for s in c {
                if !in_e.contains(s) || !taken.insert(*s) {
                    return Err(Error::InvalidParameter(format!("cluster site {s:?} outside E or overlapping")));
                }
            }
        }
        for (i, ci) in clusters.iter().enumerate() {
            for cj in &clusters[i + 1..] {
                let d = ci.iter().flat_map(|x| cj.iter().map(move |y| x.distance(y))).min().unwrap_or(usize::MAX);
                if d <= 4 * ell {
                    return Err(Error::ThresholdTooLarge(format!("clusters within 4ℓ = {}", 4 * ell)));
                }
            }
        }
        let a: Vec<_> = e.iter().copied().filter(|s| !taken.contains(s)).collect();
        let c_b_prev: Vec<_> = e.iter().copied().filter(|s| s.radius() < prev_radius + ell).collect();
        let neighborhoods = clusters
            .iter()
            .map(|c| e.iter().copied().filter(|x| c.iter().any(|y| x.distance(y) <= ell)).collect())
            .collect();
        Ok(Decomposition { e: e.to_vec(), a, b_prev, c_b_prev, clusters, neighborhoods, ell })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreconditionerNorms {
    pub l_norm: f64,
    pub k_norm: f64,
    /// Row-block norms of `K` on `A`, `B_prev` and the clusters.
    pub k_regular: f64,
    pub k_previous: f64,
    pub k_clusters: f64,
}

#[derive(Debug, Clone)]
pub struct Preconditioner {
    pub l_n: LatticeOperator,
    pub k_n: LatticeOperator,
    pub norms: PreconditionerNorms,
    lu: Option<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
}

impl Preconditioner {
    /// Whether `‖K‖_σ ≤ 3/4`, so that `(I + K)⁻¹ L` is available.
    pub fn contracts(&self) -> bool {
        self.lu.is_some()
    }

    /// `(I + K)⁻¹ L x`.
    pub fn solve(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        self.lu.as_ref()?.solve(&(&self.l_n.matrix * x))
    }

    /// `G_E = (I + K)⁻¹ L` as a dense operator.
    pub fn inverse(&self) -> Option<LatticeOperator> {
        let g = self.lu.as_ref()?.solve(&self.l_n.matrix)?;
        Some(LatticeOperator { matrix: g, ..self.l_n.clone() })
    }
}

/// Bound on `‖K‖_σ` required before the Neumann-type inverse is formed.
pub const DEFECT_BOUND: f64 = 0.75;

/// Builds `L = G_A + P_B G_{C(B)} + Σ P_{S_j} G_{C(S_j)}` and `K = L H − I`.
///
/// `d_regular` floors the `A` and `C(B_prev)` inverses, `d_cluster` the cluster
/// neighbourhoods; a cluster failure is reported with the offending site.
pub fn assemble_preconditioner(
    h: &LatticeOperator,
    dec: &Decomposition,
    d_regular: f64,
    d_cluster: f64,
    p: &NormParams,
    enforce: bool,
) -> Result<Preconditioner> {
    let n = h.rows.len();
    let idx = index_of(&h.rows);
    let mut l = DMatrix::zeros(n, n);
    let mut place = |g: &LatticeOperator, keep: &[LatticeSite]| {
        let keep: std::collections::HashSet<_> = keep.iter().copied().collect();
        for (i, x) in g.rows.iter().enumerate() {
            if !keep.contains(x) {
                continue;
            }
            for (c, y) in g.cols.iter().enumerate() {
                l[(idx[x], idx[y])] = g.matrix[(i, c)];
            }
        }
    };
    let ga = invert_block(&restrict_block(h, &dec.a, &dec.a)?, d_regular)?;
    place(&ga, &dec.a);
    if !dec.b_prev.is_empty() {
        let gb = invert_block(&restrict_block(h, &dec.c_b_prev, &dec.c_b_prev)?, d_regular)?;
        place(&gb, &dec.b_prev);
    }
    for (s, c) in dec.clusters.iter().zip(&dec.neighborhoods) {
        let block = restrict_block(h, c, c)?;
        let gs = match invert_block(&block, d_cluster) {
            Ok(g) => g,
            Err(Error::SpectrumTooClose { d_floor, min_abs, .. }) => {
                return Err(Error::SpectrumTooClose { d_floor, min_abs, site: Some(s[0]) })
            }
            Err(e) => return Err(e),
        };
        place(&gs, s);
    }
    let k = &l * &h.matrix - DMatrix::<f64>::identity(n, n);
    let rows_of = |set: &[LatticeSite]| -> f64 {
        let ids: Vec<usize> = set.iter().map(|s| idx[s]).collect();
        let m = DMatrix::from_fn(ids.len(), n, |i, j| k[(ids[i], j)]);
        let rows: Vec<_> = set.to_vec();
        weighted_norm(&m, &rows, &h.rows, p)
    };
    let cluster_sites: Vec<_> = dec.clusters.iter().flatten().copied().collect();
    let norms = PreconditionerNorms {
        l_norm: weighted_norm(&l, &h.rows, &h.rows, p),
        k_norm: weighted_norm(&k, &h.rows, &h.rows, p),
        k_regular: rows_of(&dec.a),
        k_previous: rows_of(&dec.b_prev),
        k_clusters: rows_of(&cluster_sites),
    };
    let lu = if norms.k_norm <= DEFECT_BOUND {
        Some((DMatrix::<f64>::identity(n, n) + &k).lu())
    } else if enforce {
        return Err(Error::DefectTooLarge(norms.k_norm));
    } else {
        None
    };
    let wrap = |m: DMatrix<f64>| LatticeOperator { rows: h.rows.clone(), cols: h.cols.clone(), matrix: m, meta: h.meta };
    Ok(Preconditioner { l_n: wrap(l), k_n: wrap(k), norms, lu })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingReport {
    pub c_gamma: f64,
    pub lhs_row: f64,
    pub rhs_row: f64,
    pub row_holds: bool,
    pub lhs_block: f64,
    pub rhs_block: f64,
    pub block_holds: bool,
}

/// `c_γ = Σ_{Δ∈ℤ²} e^{−γ|Δ|} = ((1+e^{−γ})/(1−e^{−γ}))²`.
pub fn c_gamma(gamma: f64) -> f64 {
    let q = (-gamma).exp();
    ((1.0 + q) / (1.0 - q)).powi(2)
}

/// Evaluates `‖G‖_{σ−γ} ≤ c_γ sup_x ‖P_x G‖_σ` and `‖P_A G P_B‖_{σ−γ} ≤ e^{−γℓ}‖G‖_σ`.
pub fn smoothing_inequalities_check(
    g: &LatticeOperator,
    a: &[LatticeSite],
    b: &[LatticeSite],
    p: &NormParams,
    gamma: f64,
    ell: usize,
) -> Result<SmoothingReport> {
    let lower = NormParams { sigma: p.sigma - gamma, ..*p };
    let cg = c_gamma(gamma);
    let lhs_row = operator_norm_sigma(g, &lower);
    let rhs_row = cg
        * g.rows
            .iter()
            .map(|x| operator_norm_sigma(&restrict_block(g, &[*x], &g.cols).expect("row in operator"), p))
            .fold(0.0, f64::max);
    let block = restrict_block(g, a, b)?;
    let lhs_block = operator_norm_sigma(&block, &lower);
    let rhs_block = (-gamma * ell as f64).exp() * operator_norm_sigma(g, p);
    let slack = 1e-12;
    Ok(SmoothingReport {
        c_gamma: cg,
        lhs_row,
        rhs_row,
        row_holds: lhs_row <= rhs_row * (1.0 + slack),
        lhs_block,
        rhs_block,
        block_holds: lhs_block <= rhs_block * (1.0 + slack),
    })
}

/// `max |T(x,y)| e^{σ|Δ|}⟨Δ⟩^s`, the constant of the off-diagonal decay envelope.
pub fn decay_constant(op: &LatticeOperator, p: &NormParams) -> f64 {
    let t = interaction_part(op);
    let mut m: f64 = 0.0;
    for (i, x) in op.rows.iter().enumerate() {
        for (c, y) in op.cols.iter().enumerate() {
            m = m.max(t[(i, c)].abs() * offset_weight(p, x, y));
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_lattice;
    use crate::spectrum::{omega0, KERNEL_SITE};

    fn sample_state(r: f64, radius: usize) -> SymmetricField {
        let mut u = SymmetricField::zeros(radius);
        u.set(1, 1, r, -1.7 * r);
        u.set(0, 0, 0.3 * r * r, 0.0);
        u.set(2, 0, -0.2 * r * r, 0.4 * r * r);
        u.set(0, 2, 0.1 * r * r, 0.0);
        u
    }

    #[test]
    fn nonlinearity_matches_closed_form() {
        let u = sample_state(0.05, 6);
        let g = nonlinearity(&u, 24).unwrap();
        for (t, s) in [(0.3, 1.2), (2.0, 0.1), (4.4, 5.0)] {
            let z = u.evaluate(t, s).conj();
            let expect = -z * z / (1.0 + z);
            assert!((g.evaluate(t, s) - expect).norm() < 1e-14);
        }
        assert!(nonlinearity(&SymmetricField::constant(0.95, 2), 4).is_err());
    }

    #[test]
    fn multiplier_matches_derivative() {
        let u = sample_state(0.05, 6);
        let h = multiplier(&u, 1.3, 24).unwrap();
        let z = u.evaluate(0.7, 2.1).conj();
        let expect = 1.3 * (-1.0 + 1.0 / ((1.0 + z) * (1.0 + z)));
        assert!((h.evaluate(0.7, 2.1) - expect).norm() < 1e-14);
    }

    #[test]
    fn zero_state_gives_diagonal() {
        let sites = build_lattice(6);
        let w0 = omega0(0.8);
        let h = assemble_hamiltonian(&SymmetricField::zeros(6), w0, 0.8, &sites).unwrap();
        let basis = EigenBasis::new(w0, 0.8, Convention::Physical);
        for (i, s) in sites.iter().enumerate() {
            for (c, _) in sites.iter().enumerate() {
                let expect = if i == c { basis.pair(*s).lambda } else { 0.0 };
                assert_eq!(h.matrix[(i, c)], expect);
            }
        }
    }

    #[test]
    fn hamiltonian_matches_finite_differences() {
        let omega = 1.0;
        let w0 = omega0(omega);
        let radius = 6;
        let sites = build_lattice(radius);
        let basis = EigenBasis::new(w0, omega, Convention::Physical);
        let u = sample_state(0.01, radius);
        let h = assemble_hamiltonian(&u, w0, omega, &sites).unwrap();
        let eps = 1e-6;
        for (c, &y) in sites.iter().enumerate() {
            let e = basis.basis_field(y, radius);
            let fp = residual(&u.axpy(eps, &e), w0, omega, radius).unwrap();
            let fm = residual(&u.axpy(-eps, &e), w0, omega, radius).unwrap();
            let col = basis.coords(&fp.sub(&fm).scale(0.5 / eps), &sites);
            for (i, v) in col.iter().enumerate() {
                assert!((v - h.matrix[(i, c)]).abs() < 1e-7, "entry {:?},{:?}", sites[i], y);
            }
        }
    }

    #[test]
    fn operator_norm_examples() {
        let sites = build_lattice(4);
        let p = NormParams::default();
        assert_eq!(operator_norm_sigma(&LatticeOperator::identity(&sites), &p), 1.0);
        let mut d = LatticeOperator::identity(&sites);
        for i in 0..sites.len() {
            d.matrix[(i, i)] = -(i as f64) * 0.5;
        }
        assert_eq!(operator_norm_sigma(&d, &p), 0.5 * (sites.len() - 1) as f64);
    }

    #[test]
    fn restriction_algebra() {
        let sites = build_lattice(4);
        let mut g = LatticeOperator::identity(&sites);
        g.matrix = DMatrix::from_fn(sites.len(), sites.len(), |i, j| (i * 10 + j) as f64);
        assert_eq!(restrict_block(&g, &sites, &sites).unwrap(), g);
        let a: Vec<_> = sites[1..7].to_vec();
        let b: Vec<_> = sites[3..9].to_vec();
        let ab = restrict_block(&g, &a, &b).unwrap();
        let inner = restrict_block(&ab, &a[2..], &b[..3]).unwrap();
        assert_eq!(inner, restrict_block(&g, &a[2..], &b[..3]).unwrap());
        let bogus = LatticeSite { j: 9, k: 9, l: 1 };
        assert!(restrict_block(&g, &[bogus], &b).is_err());
    }

    #[test]
    fn inverse_of_two_by_two() {
        let sites = build_lattice(2)[..2].to_vec();
        let mut h = LatticeOperator::identity(&sites);
        h.matrix = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let g = invert_block(&h, 1e-3).unwrap();
        let adj = DMatrix::from_row_slice(2, 2, &[3.0, -1.0, -1.0, 2.0]) / 5.0;
        assert!((g.matrix - adj).amax() < 1e-14);
        h.matrix = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.01]);
        assert!(matches!(invert_block(&h, 0.05), Err(Error::SpectrumTooClose { .. })));
    }

    #[test]
    fn trivial_preconditioner() {
        let omega = std::f64::consts::SQRT_2;
        let sites: Vec<_> = build_lattice(16).into_iter().filter(|s| *s != KERNEL_SITE).collect();
        let h = assemble_hamiltonian(&SymmetricField::zeros(16), omega0(omega), omega, &sites).unwrap();
        let dec = Decomposition::new(&sites, 8, vec![], 4).unwrap();
        let pc = assemble_preconditioner(&h, &dec, 1e-3, 1e-3, &NormParams::default(), true).unwrap();
        assert!(pc.norms.k_norm < 1e-13);
        for (i, s) in sites.iter().enumerate() {
            let lam = EigenBasis::new(omega0(omega), omega, Convention::Physical).pair(*s).lambda;
            assert!((pc.l_n.matrix[(i, i)] - 1.0 / lam).abs() < 1e-12);
        }
    }

    #[test]
    fn c_gamma_scaling() {
        for g in [0.05, 0.1, 0.2] {
            let direct: f64 = (-400i64..=400)
                .flat_map(|a| (-400i64..=400).map(move |b| (-g * (a.abs() + b.abs()) as f64).exp()))
                .sum();
            assert!((direct - c_gamma(g)).abs() < 1e-6 * direct);
            assert!(c_gamma(g) * g * g <= 4.0 + g * g);
        }
    }
}
